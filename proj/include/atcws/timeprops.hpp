#pragma once

#include <random>

#include "atcws/lts.hpp"
#include "atcws/report.hpp"

namespace atcws {
namespace propgen {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned long seed) : gen(seed) {}
  long pick(long n) { return static_cast<long>(gen() % static_cast<unsigned long>(n)); }
  bool coin() { return (gen() & 1) != 0; }
};

// Random well-formed Prc_wt network: connected symmetric topology, guarded
// recursion only, depth-bounded bodies.
Network random_network(Rng& rng, int max_nodes, int depth);

}  // namespace propgen

// Property suite over randomly generated networks: every reachable state
// satisfies time determinism, patience, maximal progress and
// well-formedness preservation, and instantaneous action sequences
// between sigmas stay finite (no cycle of non-sigma edges).
CheckReport run_time_property_suite(int count, unsigned long seed, int max_sigma,
                                    int max_nodes = 4, int depth = 5);

}  // namespace atcws
