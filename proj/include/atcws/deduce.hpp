#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atcws/term.hpp"

namespace atcws {

// The inference system: total constructor rules (pair, mac, prf, hash,
// enc, F) and partial destructors (fst, snd, dec). dec succeeds only on a
// ciphertext under the matching key; a mismatch is a rule failure, which
// at LTS time selects the else branch of the deduction construct.

struct InferenceRule {
  std::string name;
  int arity;
};

// nullptr if unknown.
const InferenceRule* rule_by_name(const std::string& name);

// Conclusion (normalized) or nullopt if the rule is not applicable.
// Throws ModelError on arity mismatch or non-message premises.
std::optional<TermPtr> apply_rule(const InferenceRule& rule, const TermVec& premises);

// Finite generator set for the attacker knowledge phi; set semantics,
// messages only, kept sorted in canonical term order.
struct Knowledge {
  TermVec gens;

  static Knowledge of(TermVec terms);
  bool contains(TermPtr t) const;
  Knowledge union_with(const Knowledge& other) const;
  bool subset_of(const Knowledge& other) const;
};

// Closure of phi under destructors: pair projections, dec with a
// derivable key, and F walking chain keys down to index 0. Sorted.
TermVec saturate(const Knowledge& phi);

// Membership in D(phi), decided as destructor saturation plus structural
// decomposition through total constructors. Every composition of
// saturation members decomposes along its own structure, so the depth
// slack is not consumed by the goal-directed search; the parameter is
// kept for reporting and for parity with the synthesis bound.
bool deducible(TermPtr w, const Knowledge& phi, int depth);
bool deducible_from(TermPtr w, const TermVec& sat);

// Finite stand-in for the top attacker's per-slot send alphabet: every
// saturation member, plus every constructor composition of at most
// `depth` new layers that matches one of the shapes (terms with
// variables; repeated variables must match equal subterms). Results are
// messages in D(phi), deterministically ordered, deduplicated.
// cap = 0 means unlimited; a hit is reported through *capped.
TermVec synth_candidates(const Knowledge& phi, int depth, const TermVec& shapes,
                         std::size_t cap = 0, bool* capped = nullptr);

}  // namespace atcws
