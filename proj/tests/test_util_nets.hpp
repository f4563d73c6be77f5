#pragma once

// Seeded random generator for small well-formed Prc_wt networks, used by
// the time-property and equivalence suites.

#include <string>
#include <vector>

#include "atcws/process.hpp"
#include "test_util.hpp"

namespace atcws::testutil {

inline TermPtr random_small_term(Rng& rng, const std::vector<std::string>& scope, int depth) {
  static const char* atoms[] = {"a", "b", "c", "k"};
  long pick = rng.pick(6 + static_cast<long>(scope.size()));
  if (depth > 0 && pick == 0)
    return pair_of(random_small_term(rng, scope, depth - 1),
                   random_small_term(rng, scope, depth - 1));
  if (depth > 0 && pick == 1)
    return Term::app(Ctor::Mac, {random_small_term(rng, scope, depth - 1),
                                 random_small_term(rng, scope, depth - 1)});
  if (pick >= 6) return Term::var(scope[pick - 6]);
  return Term::atom(atoms[pick % 4]);
}

inline ProcPtr random_proc(Rng& rng, int depth, std::vector<std::string> scope,
                           int* binders) {
  if (depth <= 0) return rng.coin() ? Process::nil()
                                    : Process::sleep(Process::nil());
  switch (rng.pick(8)) {
    case 0:
      return Process::nil();
    case 1:
      return Process::bang(random_small_term(rng, scope, 1),
                           random_proc(rng, depth - 1, scope, binders));
    case 2: {
      std::string x = "x" + std::to_string((*binders)++);
      auto inner = scope;
      inner.push_back(x);
      return Process::recv(x, random_proc(rng, depth - 1, inner, binders),
                           random_proc(rng, depth - 1, scope, binders));
    }
    case 3: {
      ProcVec branches;
      long n = 1 + rng.pick(2);
      for (long i = 0; i < n; ++i)
        branches.push_back(random_proc(rng, depth - 1, scope, binders));
      return Process::sum(std::move(branches), random_proc(rng, depth - 1, scope, binders));
    }
    case 4:
      return Process::sleep(random_proc(rng, depth - 1, scope, binders));
    case 5: {
      TermPtr l = random_small_term(rng, scope, 1);
      TermPtr r = rng.coin() ? l : random_small_term(rng, scope, 1);
      return Process::match(l, r, random_proc(rng, depth - 1, scope, binders),
                            random_proc(rng, depth - 1, scope, binders));
    }
    case 6: {
      static const char* rules[] = {"pair", "fst", "snd", "mac", "hash", "dec"};
      const char* rule = rules[rng.pick(6)];
      int arity = rule_by_name(rule)->arity;
      TermVec prem;
      for (int i = 0; i < arity; ++i) prem.push_back(random_small_term(rng, scope, 1));
      std::string x = "y" + std::to_string((*binders)++);
      auto inner = scope;
      inner.push_back(x);
      return Process::deduce(std::move(prem), rule, x,
                             random_proc(rng, depth - 1, inner, binders),
                             random_proc(rng, depth - 1, scope, binders));
    }
    default:
      return Process::sleep(random_proc(rng, depth - 1, scope, binders));
  }
}

inline Network random_network(Rng& rng, int max_nodes, int depth) {
  int n = 1 + static_cast<int>(rng.pick(max_nodes));
  int binders = 0;
  auto defs = std::make_shared<DefTable>();
  std::vector<NetNode> nodes;
  std::vector<std::vector<std::string>> nbrs(n);
  // chain topology keeps the network connected; sprinkle extra edges
  for (int i = 1; i < n; ++i) {
    nbrs[i - 1].push_back("n" + std::to_string(i));
    nbrs[i].push_back("n" + std::to_string(i - 1));
  }
  if (n > 2 && rng.coin()) {
    nbrs[0].push_back("n" + std::to_string(n - 1));
    nbrs[n - 1].push_back("n0");
  }
  for (int i = 0; i < n; ++i) {
    if (rng.pick(3) == 0) nbrs[i].push_back("obs");
    ProcPtr p;
    if (rng.pick(4) == 0) {
      // a time-guarded persistent listener
      std::string dn = "Rcv" + std::to_string(i) + "_" + std::to_string(rng.pick(1000));
      std::string x = "x" + std::to_string(binders++);
      ProcPtr body = Process::recv(
          x, Process::sleep(random_proc(rng, depth - 2, {x}, &binders)),
          Process::call(dn, {}));
      (*defs)[dn] = ProcessDef{dn, {}, body};
      p = Process::call(dn, {});
    } else {
      p = random_proc(rng, depth, {}, &binders);
    }
    nodes.push_back(NetNode::make("n" + std::to_string(i), p, nbrs[i]));
  }
  return Network::make(std::move(nodes), defs);
}

}  // namespace atcws::testutil
