#pragma once

#include <optional>

#include "atcws/lts.hpp"
#include "atcws/report.hpp"

namespace atcws {

// Bounded weak (bi)simulation checking, on the fly: the product of
// implementation states and candidate specification states is explored up
// to a sigma depth, and pairs are refuted backwards (a pair dies when
// some implementation move has no surviving weak response). "holds" is
// always bounded and candidate-relative; "inconclusive" is reported only
// when a tau closure or the pair budget was truncated, never silently.

struct SimBounds {
  int max_sigma = 10;
  int tau_bound = 100000;
  std::size_t pair_budget = 2000000;
  std::set<std::string> direct_send;  // top-attacker nodes, see LtsCtx
};

struct SimResult {
  Verdict verdict = Verdict::Ok;
  std::optional<Trace> counterexample;  // impl trace ending at the blocking label
  std::optional<Label> blocking;
  std::size_t explored_pairs = 0;
  bool bound_hit = false;  // sigma bound reached during exploration
  std::string note;

  bool holds() const { return verdict == Verdict::Ok; }
};

// Checks impl <~ spec (impl on the left of the preorder).
SimResult simulates(const Network& spec, const Network& impl, const SimBounds& bounds,
                    const SlotCandidates& candidates = {});

// Mutual similarity; fails if either direction fails.
SimResult bisimilar(const Network& a, const Network& b, const SimBounds& bounds,
                    const SlotCandidates& candidates = {});

// Falsification-oriented congruence probe: bisimilarity of m|ctx and n|ctx.
SimResult congruence_spot_check(const Network& m, const Network& n, const Network& ctx,
                                const SimBounds& bounds);

}  // namespace atcws
