#pragma once

#include <string>
#include <vector>

namespace atcws {

enum class Verdict { Ok, Fail, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Ok: return "ok";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

// Uniform result for the coarse checkers (well-formedness, stability,
// time properties, attacks). Body lines are deterministic; anything
// run-dependent stays out of them.
struct CheckReport {
  Verdict verdict = Verdict::Ok;
  std::string title;
  std::vector<std::string> violations;  // witness lines; empty iff ok
  std::vector<std::string> notes;       // informational only

  bool ok() const { return verdict == Verdict::Ok; }
  std::string render() const;
};

}  // namespace atcws
