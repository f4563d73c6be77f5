#include "atcws/deduce.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace atcws {

namespace {

const InferenceRule kRules[] = {
    {"pair", 2}, {"fst", 1}, {"snd", 1}, {"mac", 2},  {"prf", 2},
    {"hash", 1}, {"enc", 2}, {"dec", 2}, {"F", 1},
};

void sort_unique(TermVec& v) {
  std::sort(v.begin(), v.end(), term_less);
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool sorted_contains(const TermVec& v, TermPtr t) {
  return std::binary_search(v.begin(), v.end(), t, term_less);
}

}  // namespace

const InferenceRule* rule_by_name(const std::string& name) {
  for (const auto& r : kRules)
    if (r.name == name) return &r;
  return nullptr;
}

std::optional<TermPtr> apply_rule(const InferenceRule& rule, const TermVec& premises) {
  if (static_cast<int>(premises.size()) != rule.arity)
    throw ModelError("rule " + rule.name + " expects " + std::to_string(rule.arity) +
                     " premises, got " + std::to_string(premises.size()));
  for (TermPtr p : premises)
    if (!p->is_message())
      throw ModelError("rule " + rule.name + " applied to an open term " + to_string(p));

  if (rule.name == "fst" || rule.name == "snd") {
    TermPtr t = premises[0];
    if (t->kind != Term::Kind::App || t->ctor != Ctor::Pair) return std::nullopt;
    return t->args[rule.name == "fst" ? 0 : 1];
  }
  if (rule.name == "dec") {
    // partial destructor: succeeds only on a matching ciphertext (D1)
    TermPtr k = premises[0], c2 = premises[1];
    if (c2->kind == Term::Kind::App && c2->ctor == Ctor::Enc && c2->args[0] == k)
      return c2->args[1];
    return std::nullopt;
  }
  Ctor c;
  if (ctor_from_name(rule.name, &c)) return Term::app(c, premises);
  throw ModelError("unknown rule " + rule.name);
}

Knowledge Knowledge::of(TermVec terms) {
  for (TermPtr t : terms)
    if (!t->is_message())
      throw ModelError("knowledge may only hold messages, got " + to_string(t));
  sort_unique(terms);
  return Knowledge{std::move(terms)};
}

bool Knowledge::contains(TermPtr t) const { return sorted_contains(gens, t); }

Knowledge Knowledge::union_with(const Knowledge& other) const {
  TermVec v = gens;
  v.insert(v.end(), other.gens.begin(), other.gens.end());
  sort_unique(v);
  return Knowledge{std::move(v)};
}

bool Knowledge::subset_of(const Knowledge& other) const {
  for (TermPtr t : gens)
    if (!other.contains(t)) return false;
  return true;
}

TermVec saturate(const Knowledge& phi) {
  std::unordered_set<TermPtr> sat(phi.gens.begin(), phi.gens.end());
  bool changed = true;
  auto add = [&](TermPtr t) {
    if (sat.insert(t).second) changed = true;
  };
  // helper used for dec keys mid-saturation: decompose against the
  // current (growing) set; monotone, so the final fixpoint is exact.
  auto derivable_now = [&](TermPtr w) {
    auto rec = [&](auto&& self, TermPtr t) -> bool {
      if (sat.count(t)) return true;
      if (t->kind == Term::Kind::App && t->ctor != Ctor::Dec) {
        for (TermPtr a : t->args)
          if (!self(self, a)) return false;
        return true;
      }
      return false;
    };
    return rec(rec, w);
  };
  while (changed) {
    changed = false;
    TermVec snapshot(sat.begin(), sat.end());
    for (TermPtr t : snapshot) {
      if (t->kind == Term::Kind::App && t->ctor == Ctor::Pair) {
        add(t->args[0]);
        add(t->args[1]);
      } else if (t->kind == Term::Kind::App && t->ctor == Ctor::Enc) {
        if (derivable_now(t->args[0])) add(t->args[1]);
      } else if (t->kind == Term::Kind::ChainKey) {
        for (long j = 0; j < t->chain_index; ++j) add(Term::chain_key(t->name, j));
      }
    }
  }
  TermVec out(sat.begin(), sat.end());
  std::sort(out.begin(), out.end(), term_less);
  return out;
}

bool deducible_from(TermPtr w, const TermVec& sat) {
  if (sorted_contains(sat, w)) return true;
  if (w->kind == Term::Kind::App && w->ctor != Ctor::Dec) {
    for (TermPtr a : w->args)
      if (!deducible_from(a, sat)) return false;
    return true;
  }
  return false;
}

bool deducible(TermPtr w, const Knowledge& phi, int depth) {
  if (!w->is_message()) throw ModelError("deducible: open term " + to_string(w));
  if (depth < 0) throw ModelError("deducible: negative depth");
  return deducible_from(w, saturate(phi));
}

namespace {

// Composition universe for variable slots: level 0 is the saturation,
// level k adds every total-constructor application over level k-1.
struct Domains {
  const TermVec& sat;
  std::vector<TermVec> levels;

  explicit Domains(const TermVec& sat) : sat(sat) { levels.push_back(sat); }

  const TermVec& level(int k) {
    static const Ctor kTotal[] = {Ctor::Pair, Ctor::Mac, Ctor::Prf,
                                  Ctor::Hash, Ctor::Enc, Ctor::F};
    while (static_cast<int>(levels.size()) <= k) {
      const TermVec& prev = levels.back();
      if (prev.size() > 700)
        throw ModelError("candidate synthesis exceeds budget; use tighter shapes");
      TermVec next = prev;
      for (Ctor c : kTotal) {
        if (ctor_arity(c) == 1) {
          for (TermPtr a : prev) next.push_back(Term::app(c, {a}));
        } else {
          for (TermPtr a : prev)
            for (TermPtr b : prev) next.push_back(Term::app(c, {a, b}));
        }
      }
      sort_unique(next);
      levels.push_back(std::move(next));
    }
    return levels[k];
  }
};

// Remaining composition budget at each variable occurrence; false if the
// shape's own structure already exceeds the budget.
bool var_budgets(TermPtr shape, int budget, std::map<std::string, int>& vb) {
  if (budget < 0) return false;
  if (shape->kind == Term::Kind::Var) {
    auto it = vb.find(shape->name);
    if (it == vb.end() || budget < it->second) vb[shape->name] = budget;
    return true;
  }
  if (shape->kind == Term::Kind::App) {
    for (TermPtr a : shape->args)
      if (!var_budgets(a, budget - 1, vb)) return false;
  }
  return true;
}

TermPtr subst_shape(TermPtr shape, const std::map<std::string, TermPtr>& env) {
  switch (shape->kind) {
    case Term::Kind::Var:
      return env.at(shape->name);
    case Term::Kind::App: {
      TermVec args;
      args.reserve(shape->args.size());
      for (TermPtr a : shape->args) args.push_back(subst_shape(a, env));
      return Term::app(shape->ctor, std::move(args));
    }
    default:
      return shape;
  }
}

void instantiate(TermPtr shape, int budget, Domains& dom, TermVec& out) {
  std::map<std::string, int> vb;
  if (!var_budgets(shape, budget, vb)) return;
  std::vector<std::pair<std::string, int>> vars(vb.begin(), vb.end());
  std::map<std::string, TermPtr> env;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == vars.size()) {
      out.push_back(subst_shape(shape, env));
      return;
    }
    for (TermPtr t : dom.level(vars[i].second)) {
      env[vars[i].first] = t;
      self(self, i + 1);
    }
    env.erase(vars[i].first);
  };
  rec(rec, 0);
}

}  // namespace

TermVec synth_candidates(const Knowledge& phi, int depth, const TermVec& shapes,
                         std::size_t cap, bool* capped) {
  if (depth < 0) throw ModelError("synth_candidates: negative depth");
  if (capped) *capped = false;
  TermVec sat = saturate(phi);
  TermVec out = sat;
  Domains dom(sat);
  for (TermPtr shape : shapes) {
    TermVec raw;
    instantiate(shape, depth, dom, raw);
    for (TermPtr t : raw)
      if (t->is_message() && deducible_from(t, sat)) out.push_back(t);
  }
  sort_unique(out);
  if (cap && out.size() > cap) {
    out.resize(cap);
    if (capped) *capped = true;
  }
  return out;
}

}  // namespace atcws
