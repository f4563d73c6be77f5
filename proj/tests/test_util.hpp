#pragma once

// Shared helpers for the test suites: an independent forward-closure
// oracle for message deduction, and seeded random generators.

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "atcws/deduce.hpp"
#include "atcws/term.hpp"

namespace atcws::testutil {

// Independent deduction oracle: forward fixpoint of all inference rules,
// restricted to the joint subterm vocabulary of phi and the query (plus
// chain keys below any known one). No goal direction, no saturation
// sharing with the implementation under test.
inline bool oracle_deducible(TermPtr w, const Knowledge& phi) {
  TermVec vocab;
  for (TermPtr g : phi.gens) subterms(g, vocab);
  subterms(w, vocab);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    TermPtr t = vocab[i];
    if (t->kind == Term::Kind::ChainKey)
      for (long j = 0; j < t->chain_index; ++j) {
        TermPtr down = Term::chain_key(t->name, j);
        if (std::find(vocab.begin(), vocab.end(), down) == vocab.end())
          vocab.push_back(down);
      }
  }
  std::set<TermPtr> known(phi.gens.begin(), phi.gens.end());
  bool changed = true;
  auto in_vocab = [&](TermPtr t) {
    return std::find(vocab.begin(), vocab.end(), t) != vocab.end();
  };
  while (changed) {
    changed = false;
    std::vector<TermPtr> snap(known.begin(), known.end());
    auto add = [&](TermPtr t) {
      if (known.insert(t).second) changed = true;
    };
    for (TermPtr a : snap) {
      // unary rules
      for (const char* rn : {"fst", "snd", "hash", "F"}) {
        auto r = apply_rule(*rule_by_name(rn), {a});
        if (r && in_vocab(*r)) add(*r);
      }
      for (TermPtr b : snap) {
        for (const char* rn : {"pair", "mac", "prf", "enc", "dec"}) {
          auto r = apply_rule(*rule_by_name(rn), {a, b});
          if (r && in_vocab(*r)) add(*r);
        }
      }
    }
  }
  return known.count(w) != 0;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned long seed) : gen(seed) {}
  long pick(long n) { return static_cast<long>(gen() % static_cast<unsigned long>(n)); }
  bool coin() { return (gen() & 1) != 0; }
};

inline TermPtr random_message(Rng& rng, int depth) {
  static const char* atoms[] = {"a", "b", "m", "req", "k1", "n0"};
  if (depth <= 0 || rng.pick(3) == 0) {
    if (rng.pick(5) == 0) return Term::chain_key("kc", rng.pick(4));
    return Term::atom(atoms[rng.pick(6)]);
  }
  static const Ctor ctors[] = {Ctor::Pair, Ctor::Mac, Ctor::Prf, Ctor::Hash,
                               Ctor::Enc,  Ctor::Dec, Ctor::F};
  Ctor c = ctors[rng.pick(7)];
  TermVec args;
  for (int i = 0; i < ctor_arity(c); ++i) args.push_back(random_message(rng, depth - 1));
  return Term::app(c, std::move(args));
}

}  // namespace atcws::testutil
