#pragma once

#include <stdexcept>
#include <string>

namespace atcws {

// Structural problem in a model or query (bad arity, unknown name, ...).
// Distinct from a deduction/match that merely fails and selects an else
// branch at LTS time.
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + what),
        line(line), col(col) {}
  int line;
  int col;
};

}  // namespace atcws
