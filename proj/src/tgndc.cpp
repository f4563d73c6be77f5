#include "atcws/tgndc.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace atcws {

KnowledgeSequence KnowledgeSequence::of(std::vector<Knowledge> slots, Extension ext) {
  if (slots.empty()) throw ModelError("knowledge sequence needs at least phi_0");
  for (std::size_t j = 1; j < slots.size(); ++j)
    if (!slots[j - 1].subset_of(slots[j]))
      throw ModelError("knowledge sequence not monotone at slot " + std::to_string(j));
  return KnowledgeSequence{std::move(slots), ext};
}

const Knowledge& KnowledgeSequence::at(int j) const {
  if (j < 0) throw ModelError("negative knowledge slot");
  if (j < size()) return slots[j];
  return slots.back();
}

void AttackerWiring::validate(const Network& m) const {
  if (protocol_nodes.size() != attacker_nodes.size())
    throw ModelError("attacker wiring: |A| must equal |P|");
  std::set<std::string> p(protocol_nodes.begin(), protocol_nodes.end());
  std::set<std::string> a(attacker_nodes.begin(), attacker_nodes.end());
  if (p.size() != protocol_nodes.size() || a.size() != attacker_nodes.size())
    throw ModelError("attacker wiring: duplicate names");
  for (const auto& x : attacker_nodes)
    if (p.count(x)) throw ModelError("attacker wiring: " + x + " is both in A and P");
  if (p.count("obs") || a.count("obs"))
    throw ModelError("attacker wiring: obs is reserved for the observer");
  Topology t = topology(m);
  if (t.nds != p) throw ModelError("attacker wiring: P must name exactly nds(M)");
  for (const auto& o : observed)
    if (!p.count(o)) throw ModelError("attacker wiring: observed node " + o + " not in P");
  for (const auto& x : attacker_nodes)
    if (t.env.count(x))
      throw ModelError("attacker wiring: " + x + " already appears in Env(M)");
}

std::string AttackerWiring::attacker_for(const std::string& protocol_node) const {
  for (std::size_t i = 0; i < protocol_nodes.size(); ++i)
    if (protocol_nodes[i] == protocol_node) return attacker_nodes[i];
  throw ModelError("no attacker assigned to " + protocol_node);
}

Network wire_observed(const Network& m, const AttackerWiring& w) {
  w.validate(m);
  Topology t = topology(m);
  std::vector<NetNode> nodes;
  nodes.reserve(m.nodes.size());
  for (const auto& n : m.nodes) {
    std::vector<std::string> nu;
    for (const auto& x : n.neighbors)
      if (t.nds.count(x)) nu.push_back(x);  // nu_i restricted to nds(M)
    nu.push_back(w.attacker_for(n.name));
    if (w.observed.count(n.name)) nu.push_back("obs");
    nodes.push_back(NetNode::make(n.name, n.proc, std::move(nu)));
  }
  return Network::make(std::move(nodes), m.defs);
}

// ---------------------------------------------------------------------------
// receive-shape harvest

namespace {

struct PatternState {
  std::map<std::string, TermPtr> subst;  // pattern var -> pattern term
  int fresh = 0;

  TermPtr fresh_var() { return Term::var("_s" + std::to_string(fresh++)); }

  TermPtr resolve(TermPtr t) {
    switch (t->kind) {
      case Term::Kind::Var: {
        auto it = subst.find(t->name);
        return it == subst.end() ? t : resolve(it->second);
      }
      case Term::Kind::App: {
        TermVec args;
        args.reserve(t->args.size());
        for (TermPtr a : t->args) args.push_back(resolve(a));
        return Term::app(t->ctor, std::move(args));
      }
      default:
        return t;
    }
  }

  bool occurs(const std::string& v, TermPtr t) {
    if (t->kind == Term::Kind::Var) return t->name == v;
    if (t->kind == Term::Kind::App)
      for (TermPtr a : t->args)
        if (occurs(v, a)) return true;
    return false;
  }

  bool unify(TermPtr a, TermPtr b) {
    a = resolve(a);
    b = resolve(b);
    if (a == b) return true;
    if (a->kind == Term::Kind::Var) {
      if (occurs(a->name, b)) return false;
      subst[a->name] = b;
      return true;
    }
    if (b->kind == Term::Kind::Var) return unify(b, a);
    if (a->kind == Term::Kind::App && b->kind == Term::Kind::App && a->ctor == b->ctor) {
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!unify(a->args[i], b->args[i])) return false;
      return true;
    }
    return false;
  }
};

// canonical variable renaming so identical shapes deduplicate
TermPtr canon_shape(TermPtr t, std::map<std::string, TermPtr>& ren, int& counter) {
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = ren.find(t->name);
      if (it != ren.end()) return it->second;
      TermPtr v = Term::var("x" + std::to_string(counter++));
      ren[t->name] = v;
      return v;
    }
    case Term::Kind::App: {
      TermVec args;
      for (TermPtr a : t->args) args.push_back(canon_shape(a, ren, counter));
      return Term::app(t->ctor, std::move(args));
    }
    default:
      return t;
  }
}

struct Harvester {
  const DefTable& defs;
  std::map<std::string, TermVec>& out;
  std::string node;
  std::unordered_set<ProcPtr> visited;  // instantiated bodies walked once

  // Walks the success spine after a receive, refining the pattern of the
  // received variable; gives up (emits the current pattern) at the first
  // non-guard construct.
  void spine(ProcPtr p, PatternState st, TermPtr received_var) {
    for (;;) {
      switch (p->kind) {
        case Process::Kind::Match: {
          if (!st.unify(p->left, p->right)) {
            emit(st, received_var);
            return;  // success path unreachable beyond here
          }
          p = p->then_p;
          break;
        }
        case Process::Kind::Deduce: {
          TermVec prem;
          for (TermPtr t : p->premises) prem.push_back(st.resolve(t));
          TermPtr bound = nullptr;
          if (p->rule == "fst" || p->rule == "snd") {
            TermPtr t = prem[0];
            if (t->kind == Term::Kind::Var) {
              TermPtr l = st.fresh_var(), r = st.fresh_var();
              st.unify(t, pair_of(l, r));
              bound = p->rule == "fst" ? l : r;
            } else if (t->kind == Term::Kind::App && t->ctor == Ctor::Pair) {
              bound = t->args[p->rule == "fst" ? 0 : 1];
            } else {
              emit(st, received_var);
              return;
            }
          } else if (p->rule == "dec") {
            TermPtr key = prem[0], ct = prem[1];
            if (ct->kind == Term::Kind::Var) {
              TermPtr payload = st.fresh_var();
              st.unify(ct, Term::app(Ctor::Enc, {key, payload}));
              bound = payload;
            } else if (ct->kind == Term::Kind::App && ct->ctor == Ctor::Enc &&
                       st.unify(ct->args[0], key)) {
              bound = ct->args[1];
            } else {
              emit(st, received_var);
              return;
            }
          } else {
            Ctor c;
            if (!ctor_from_name(p->rule, &c)) {
              emit(st, received_var);
              return;
            }
            bound = Term::app(c, prem);
          }
          // bind the deduction variable in the continuation
          p = substitute(p->then_p, p->binder, bound);
          break;
        }
        default:
          emit(st, received_var);
          return;
      }
    }
  }

  void emit(PatternState& st, TermPtr received_var) {
    TermPtr shape = st.resolve(received_var);
    if (shape->kind == Term::Kind::Var) return;  // no structure beyond saturation
    std::map<std::string, TermPtr> ren;
    int counter = 0;
    shape = canon_shape(shape, ren, counter);
    TermVec& v = out[node];
    if (std::find(v.begin(), v.end(), shape) == v.end()) v.push_back(shape);
  }

  void walk(ProcPtr p) {
    if (!visited.insert(p).second) return;
    switch (p->kind) {
      case Process::Kind::Nil:
        return;
      case Process::Kind::Bang:
      case Process::Kind::Sleep:
        walk(p->cont);
        return;
      case Process::Kind::RcvTimeout: {
        PatternState st;
        TermPtr rv = Term::var("_recv_" + p->binder);
        ProcPtr body = substitute(p->body, p->binder, rv);
        spine(body, st, rv);
        walk(body);
        walk(p->timeout);
        return;
      }
      case Process::Kind::SumTimeout:
        for (ProcPtr b : p->branches) walk(b);
        walk(p->timeout);
        return;
      case Process::Kind::Match:
      case Process::Kind::Deduce:
        walk(p->then_p);
        walk(p->else_p);
        return;
      case Process::Kind::Call: {
        auto it = defs.find(p->name);
        if (it == defs.end()) return;
        // unbound parameters stay as pattern variables
        std::map<std::string, TermPtr> env;
        for (std::size_t i = 0; i < it->second.params.size() && i < p->args.size(); ++i)
          env[it->second.params[i]] = p->args[i];
        walk(substitute_all(it->second.body, env));
        return;
      }
    }
  }
};

}  // namespace

std::map<std::string, TermVec> harvest_shapes(const Network& m) {
  std::map<std::string, TermVec> out;
  for (const auto& n : m.nodes) {
    Harvester h{*m.defs, out, n.name, {}};
    h.walk(n.proc);
    auto it = out.find(n.name);
    if (it != out.end())
      std::sort(it->second.begin(), it->second.end(), term_less);
  }
  return out;
}

// ---------------------------------------------------------------------------
// top attacker

TopAttacker top_attacker(const AttackerWiring& w, const KnowledgeSequence& phi,
                         const std::map<std::string, TermVec>& shapes_by_target,
                         const TopConfig& cfg) {
  if (phi.size() == 0) throw ModelError("top attacker needs a knowledge sequence");
  TopAttacker top;
  auto defs = std::make_shared<DefTable>();
  std::vector<NetNode> nodes;
  top.candidates_per_slot.assign(cfg.max_slots + 1, 0);

  static const TermVec kNoShapes;
  for (std::size_t i = 0; i < w.attacker_nodes.size(); ++i) {
    const std::string& a = w.attacker_nodes[i];
    const std::string& target = w.protocol_nodes[i];
    auto sit = shapes_by_target.find(target);
    const TermVec& shapes = sit == shapes_by_target.end() ? kNoShapes : sit->second;
    std::string base = "Top_" + a + "_";
    for (int j = 0; j <= cfg.max_slots; ++j) {
      bool capped = false;
      TermVec cands =
          synth_candidates(phi.at(j), cfg.candidate_depth, shapes, cfg.candidate_cap, &capped);
      {
        // keep the whole saturation, cap the synthesised extras
        TermVec sat = saturate(phi.at(j));
        TermVec kept;
        std::size_t extras = 0;
        for (TermPtr c : cands) {
          bool is_sat = std::binary_search(sat.begin(), sat.end(), c, term_less);
          if (is_sat) {
            kept.push_back(c);
          } else if (extras < cfg.extras_cap) {
            kept.push_back(c);
            ++extras;
          } else {
            capped = true;
          }
        }
        cands = std::move(kept);
      }
      top.capped = top.capped || capped;
      top.candidates_per_slot[j] += cands.size();
      ProcPtr next = Process::call(base + std::to_string(std::min(j + 1, cfg.max_slots)), {});
      ProcPtr body;
      if (cands.empty()) {
        body = Process::sleep(next);  // pure clock
      } else {
        ProcVec branches;
        branches.reserve(cands.size());
        ProcPtr self = Process::call(base + std::to_string(j), {});
        for (TermPtr c : cands) branches.push_back(Process::bang(c, self));
        body = Process::sum(std::move(branches), next);
      }
      (*defs)[base + std::to_string(j)] = ProcessDef{base + std::to_string(j), {}, body};
    }
    nodes.push_back(NetNode::make(a, Process::call(base + "0", {}), {target}));
  }
  top.network = Network::make(std::move(nodes), std::move(defs));
  return top;
}

// ---------------------------------------------------------------------------
// stability (eavesdropping coverage) and sequence derivation

namespace {

struct SlotExploration {
  std::vector<std::pair<int, Network>> states;  // (sigma depth, state)
  // visits every reachable state of m up to max_sigma, reporting raw
  // broadcast payloads per slot through sink(depth, sender, payload)
  template <typename Sink>
  static bool run(const Network& m, int max_sigma, std::size_t budget, LtsCtx& ctx,
                  Sink&& sink) {
    std::unordered_map<std::string, int> seen;
    std::deque<std::pair<Network, int>> work;
    Network init = normal_form(m, ctx);
    work.emplace_back(init, 0);
    seen.emplace(state_key(init), 0);
    std::size_t visited = 0;
    while (!work.empty()) {
      auto [state, depth] = std::move(work.front());
      work.pop_front();
      if (++visited > budget) return false;
      for (const auto& [l, succ] : step(state, ctx)) {
        int d = depth;
        if (l.kind == Label::Kind::Sigma) {
          d += 1;
          if (d > max_sigma) continue;
        } else if (l.kind == Label::Kind::Bcast) {
          sink(depth, l.sender, l.payload);
        }
        std::string k = state_key(succ);
        auto it = seen.find(k);
        if (it == seen.end()) {
          seen.emplace(std::move(k), d);
          work.emplace_back(succ, d);
        } else if (d < it->second) {
          it->second = d;
          work.emplace_back(succ, d);
        }
      }
    }
    return true;
  }
};

}  // namespace

CheckReport check_stability(const Network& m, const AttackerWiring& w,
                            const KnowledgeSequence& phi, const TgndcBounds& bounds) {
  CheckReport rep;
  rep.title = "time-dependent stability (eavesdropping coverage)";
  Network wired = wire_observed(m, w);
  LtsCtx ctx(wired.defs);

  // cache saturations per slot
  std::vector<TermVec> sats;
  for (int j = 0; j <= bounds.max_sigma; ++j) sats.push_back(saturate(phi.at(j)));

  std::set<std::string> witnessed;
  bool complete = SlotExploration::run(
      wired, bounds.max_sigma, bounds.state_budget, ctx,
      [&](int depth, const std::string& sender, TermPtr payload) {
        if (!deducible_from(payload, sats[depth])) {
          std::ostringstream os;
          os << "slot " << depth << ": node " << sender << " broadcast "
             << to_string(payload) << " outside D(phi_" << depth << ")";
          witnessed.insert(os.str());
        }
      });
  for (const auto& v : witnessed) rep.violations.push_back(v);
  if (!complete) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back("state budget exhausted; coverage incomplete");
    return rep;
  }
  rep.verdict = rep.violations.empty() ? Verdict::Ok : Verdict::Fail;
  if (rep.ok())
    rep.notes.push_back("all protocol broadcasts covered through slot " +
                        std::to_string(bounds.max_sigma));
  return rep;
}

KnowledgeSequence derive_knowledge_sequence(const Network& m, const AttackerWiring& w,
                                            const Knowledge& seed, const TermVec& ambient,
                                            const TgndcBounds& bounds) {
  Network wired = wire_observed(m, w);
  LtsCtx ctx(wired.defs);
  std::vector<TermVec> per_slot(bounds.max_sigma + 1);
  bool complete = SlotExploration::run(
      wired, bounds.max_sigma, bounds.state_budget, ctx,
      [&](int depth, const std::string&, TermPtr payload) {
        per_slot[depth].push_back(payload);
      });
  if (!complete) throw ModelError("derive_knowledge_sequence: state budget exhausted");
  std::vector<Knowledge> slots;
  Knowledge acc = seed.union_with(Knowledge::of(TermVec(ambient)));
  for (int j = 0; j <= bounds.max_sigma; ++j) {
    acc = acc.union_with(Knowledge::of(std::move(per_slot[j])));
    slots.push_back(acc);
  }
  return KnowledgeSequence::of(std::move(slots), KnowledgeSequence::Extension::Generated);
}

// ---------------------------------------------------------------------------
// the criterion

std::string TgndcReport::render() const {
  std::ostringstream os;
  for (const auto& l : lines) os << l << "\n";
  return os.str();
}

CriterionSetup criterion_composition(const Network& system, const AttackerWiring& wiring,
                                     const KnowledgeSequence& phi, const TopConfig& cfg) {
  CriterionSetup setup;
  Network wired = wire_observed(system, wiring);
  auto shapes = harvest_shapes(system);
  setup.top = top_attacker(wiring, phi, shapes, cfg);
  setup.composition = compose(wired, setup.top.network);
  setup.attackers.insert(wiring.attacker_nodes.begin(), wiring.attacker_nodes.end());
  CheckReport wf = check_well_formed(setup.composition);
  if (!wf.ok()) throw ModelError("tgndc composition not well-formed:\n" + wf.render());
  return setup;
}

TgndcReport check_tgndc(const TgndcQuery& q) {
  TgndcReport rep;
  std::ostringstream head;

  if (!q.stability_established) {
    rep.stability = check_stability(q.system, q.wiring, q.phi, q.bounds);
  } else {
    rep.stability.title = "time-dependent stability";
    rep.stability.verdict = Verdict::Ok;
    rep.stability.notes.push_back("established jointly by the compositional driver");
  }
  if (!rep.stability.ok()) {
    rep.refused = true;
    rep.verdict = Verdict::Inconclusive;
    rep.lines.push_back("tgndc " + q.name + ": inconclusive (refused)");
    rep.lines.push_back("  the stability precondition of the criterion is unmet;");
    rep.lines.push_back("  the top attacker is only the reference attacker for");
    rep.lines.push_back("  time-dependent stable systems");
    for (const auto& v : rep.stability.violations) rep.lines.push_back("  " + v);
    return rep;
  }

  TopConfig top_cfg = q.bounds.top;
  top_cfg.max_slots = std::max(top_cfg.max_slots, q.bounds.max_sigma + 1);
  CriterionSetup setup = criterion_composition(q.system, q.wiring, q.phi, top_cfg);
  const Network& comp = setup.composition;
  const TopAttacker& top = setup.top;

  SimBounds sb = q.bounds.sim;
  sb.max_sigma = q.bounds.max_sigma;
  sb.direct_send.insert(q.wiring.attacker_nodes.begin(), q.wiring.attacker_nodes.end());
  rep.sim = simulates(q.spec, comp, sb);

  rep.verdict = rep.sim.verdict;
  std::string verdict_text = rep.sim.holds() ? "holds (bounded, candidate-relative)"
                             : rep.sim.verdict == Verdict::Fail ? "fails" : "inconclusive";
  rep.lines.push_back("tgndc " + q.name + ": " + verdict_text);
  {
    std::ostringstream os;
    os << "  bounds: max-sigma=" << q.bounds.max_sigma
       << " candidate-depth=" << top_cfg.candidate_depth
       << " deduction-depth=" << q.bounds.deduction_depth
       << " candidate-cap=" << top_cfg.candidate_cap;
    rep.lines.push_back(os.str());
  }
  for (const auto& n : rep.stability.notes) rep.lines.push_back("  stability: " + n);
  {
    std::ostringstream os;
    os << "  candidates per slot:";
    for (int j = 0; j <= q.bounds.max_sigma && j < static_cast<int>(top.candidates_per_slot.size()); ++j)
      os << " " << top.candidates_per_slot[j];
    if (top.capped) os << " (capped)";
    rep.lines.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "  sim: pairs=" << rep.sim.explored_pairs
       << (rep.sim.bound_hit ? " sigma-bound-hit" : "");
    if (!rep.sim.note.empty()) os << " note=" << rep.sim.note;
    rep.lines.push_back(os.str());
  }
  if (rep.sim.verdict == Verdict::Fail && rep.sim.counterexample) {
    rep.attack = rep.sim.counterexample;
    rep.lines.push_back("  attack trace:");
    for (const auto& l : rep.attack->steps) rep.lines.push_back("    " + l.text());
    // the witness must replay on the composition and be rejected by the spec
    LtsCtx cctx(comp.defs);
    cctx.direct_send = sb.direct_send;
    LtsCtx sctx(q.spec.defs);
    bool replays = !run_trace(comp, *rep.attack, cctx).states.empty();
    bool rejected = run_trace(q.spec, *rep.attack, sctx).states.empty();
    rep.lines.push_back(std::string("  witness: replays-on-system=") +
                        (replays ? "yes" : "NO") +
                        " rejected-by-spec=" + (rejected ? "yes" : "NO"));
  }
  return rep;
}

TgndcReport check_tgndc_compositional(const std::vector<TgndcPart>& parts,
                                      const KnowledgeSequence& phi,
                                      const TgndcBounds& bounds) {
  if (parts.empty()) throw ModelError("compositional check needs at least one part");
  TgndcReport rep;

  // joint stability on the composed system with the joint wiring
  Network composed = parts[0].system;
  for (std::size_t i = 1; i < parts.size(); ++i) composed = compose(composed, parts[i].system);
  AttackerWiring joint;
  std::set<std::string> joint_observed;
  for (const auto& part : parts) {
    Topology t = topology(part.system);
    for (const auto& n : t.nds) {
      joint.protocol_nodes.push_back(n);
      joint.attacker_nodes.push_back("atk_" + n);
    }
    for (const auto& o : part.observed) joint_observed.insert(o);
  }
  joint.observed = joint_observed;
  rep.stability = check_stability(composed, joint, phi, bounds);
  if (!rep.stability.ok()) {
    rep.refused = true;
    rep.verdict = Verdict::Inconclusive;
    rep.lines.push_back("tgndc (compositional): inconclusive (refused)");
    rep.lines.push_back("  joint stability precondition unmet");
    for (const auto& v : rep.stability.violations) rep.lines.push_back("  " + v);
    return rep;
  }

  std::vector<std::string> spec_names;
  Verdict combined = Verdict::Ok;
  for (const auto& part : parts) {
    TgndcQuery q;
    q.name = part.name;
    q.system = part.system;
    q.spec = part.spec;
    Topology t = topology(part.system);
    for (const auto& n : t.nds) {
      q.wiring.protocol_nodes.push_back(n);
      q.wiring.attacker_nodes.push_back("atk_" + n);
    }
    q.wiring.observed = part.observed;
    q.phi = phi;
    q.bounds = bounds;
    q.stability_established = true;
    TgndcReport sub = check_tgndc(q);
    for (const auto& l : sub.lines) rep.lines.push_back("  " + l);
    if (sub.verdict == Verdict::Fail) {
      combined = Verdict::Fail;
      if (!rep.attack) rep.attack = sub.attack;
    } else if (sub.verdict == Verdict::Inconclusive && combined == Verdict::Ok) {
      combined = Verdict::Inconclusive;
    }
    spec_names.push_back(part.name);
  }
  rep.verdict = combined;
  std::string speclist;
  for (std::size_t i = 0; i < spec_names.size(); ++i)
    speclist += (i ? " | " : "") + spec_names[i];
  std::string verdict_text = combined == Verdict::Ok
                                 ? "holds (bounded, candidate-relative)"
                                 : combined == Verdict::Fail ? "fails" : "inconclusive";
  rep.lines.insert(rep.lines.begin(),
                   "tgndc composed [" + speclist + "]: " + verdict_text);
  return rep;
}

}  // namespace atcws
