#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "atcws/errors.hpp"

namespace atcws {

// Symbolic messages. Terms are hash-consed: Term::* factories return
// canonical pointers, so structural equality is pointer equality and
// terms are safe to share across threads once built.
//
// Terms are kept in normal form:
//   dec(k, enc(k, m))      -> m
//   F(chain key at i+1)    -> chain key at i
// F applied to the chain bottom (index 0) stays as an application.

enum class AtomKind { NodeName, Tag, Nonce, BaseKey, Other };

enum class Ctor { Pair, Mac, Prf, Hash, Enc, Dec, F };

int ctor_arity(Ctor c);
const char* ctor_name(Ctor c);
bool ctor_from_name(const std::string& s, Ctor* out);

struct Term;
using TermPtr = const Term*;
using TermVec = std::vector<TermPtr>;

struct Term {
  enum class Kind { Atom, ChainKey, Var, App };

  Kind kind;
  AtomKind atom_kind = AtomKind::Other;  // Atom
  std::string name;                      // Atom / var name, chain id
  long chain_index = 0;                  // ChainKey
  Ctor ctor = Ctor::Pair;                // App
  TermVec args;                          // App
  bool ground = true;                    // no Var below
  std::size_t hash = 0;
  std::string text;                      // canonical serialization

  static TermPtr atom(const std::string& name, AtomKind k = AtomKind::Other);
  static TermPtr integer(long v);  // atom of kind Other, decimal name
  static TermPtr chain_key(const std::string& chain, long index);
  static TermPtr var(const std::string& name);
  // Normalizing application; args must already be interned.
  static TermPtr app(Ctor c, TermVec args);

  bool is_message() const { return ground; }
};

// Full bottom-up renormalization (idempotent; identity on factory-built terms).
TermPtr normalize(TermPtr t);

inline const std::string& to_string(TermPtr t) { return t->text; }

// Canonical order: lexicographic over the serialization.
inline bool term_less(TermPtr a, TermPtr b) {
  return a != b && a->text < b->text;
}

inline TermPtr pair_of(TermPtr a, TermPtr b) { return Term::app(Ctor::Pair, {a, b}); }

// Collects t and all its subterms into out (deduplicated, any order).
void subterms(TermPtr t, TermVec& out);

}  // namespace atcws
