#include "atcws/equivalence.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace atcws {

namespace {

struct Side {
  LtsCtx ctx;
  std::vector<Network> states;
  std::unordered_map<std::string, int> index;

  explicit Side(const Network& initial) : ctx(initial.defs) {
    intern(normal_form(initial, ctx));
  }

  int intern(const Network& n) {
    auto [it, fresh] = index.emplace(state_key(n), static_cast<int>(states.size()));
    if (fresh) states.push_back(n);
    return it->second;
  }
};

struct Engine {
  Side impl;
  Side spec;
  const SimBounds& bounds;
  const SlotCandidates& candidates;
  bool truncated = false;
  bool bound_hit = false;

  // memoized observed successor lists
  std::map<std::pair<int, int>, std::vector<std::pair<Label, int>>> impl_steps;
  std::unordered_map<int, std::vector<int>> spec_closures;
  std::map<std::pair<int, std::string>, std::vector<int>> spec_responses;

  Engine(const Network& spec_net, const Network& impl_net, const SimBounds& b,
         const SlotCandidates& cands)
      : impl(impl_net), spec(spec_net), bounds(b), candidates(cands) {
    impl.ctx.direct_send = b.direct_send;
    spec.ctx.direct_send = b.direct_send;
  }

  const std::vector<InputCandidate>& slot_inputs(int depth) const {
    static const std::vector<InputCandidate> kNone;
    if (depth < static_cast<int>(candidates.size())) return candidates[depth];
    return kNone;
  }

  const std::vector<std::pair<Label, int>>& impl_successors(int id, int depth) {
    int bucket = candidates.empty() ? 0 : depth;
    auto key = std::make_pair(id, bucket);
    auto it = impl_steps.find(key);
    if (it != impl_steps.end()) return it->second;
    std::vector<std::pair<Label, int>> out;
    Network state = impl.states[id];
    for (const auto& [l, succ] : step(state, impl.ctx, slot_inputs(depth)))
      out.emplace_back(observe(l), impl.intern(succ));
    return impl_steps.emplace(key, std::move(out)).first->second;
  }

  const std::vector<int>& spec_closure(int id) {
    auto it = spec_closures.find(id);
    if (it != spec_closures.end()) return it->second;
    std::vector<int> out{id};
    std::unordered_set<int> seen{id};
    std::deque<int> work{id};
    int steps_done = 0;
    while (!work.empty()) {
      if (steps_done++ > bounds.tau_bound) {
        truncated = true;
        break;
      }
      int cur = work.front();
      work.pop_front();
      Network state = spec.states[cur];
      for (const auto& [l, succ] : step(state, spec.ctx)) {
        if (observe(l).kind != Label::Kind::Tau) continue;
        int sid = spec.intern(succ);
        if (seen.insert(sid).second) {
          out.push_back(sid);
          work.push_back(sid);
        }
      }
    }
    return spec_closures.emplace(id, std::move(out)).first->second;
  }

  // weak alpha-hat responses of the specification side
  const std::vector<int>& spec_response(int id, const Label& alpha) {
    auto key = std::make_pair(id, alpha.text());
    auto it = spec_responses.find(key);
    if (it != spec_responses.end()) return it->second;
    std::vector<int> out;
    std::unordered_set<int> seen;
    auto add_closed = [&](int sid) {
      for (int c : spec_closure(sid))
        if (seen.insert(c).second) out.push_back(c);
    };
    if (alpha.kind == Label::Kind::Tau) {
      add_closed(id);
    } else {
      for (int pre : spec_closure(id)) {
        Network state = spec.states[pre];
        std::vector<InputCandidate> inputs;
        if (alpha.kind == Label::Kind::Input) inputs.push_back({alpha.sender, alpha.payload});
        for (const auto& [l, succ] : step(state, spec.ctx, inputs))
          if (observe(l) == alpha) add_closed(spec.intern(succ));
      }
    }
    std::sort(out.begin(), out.end());
    return spec_responses.emplace(key, std::move(out)).first->second;
  }
};

struct Move {
  Label label;
  int remaining = 0;  // unrefuted successor pairs; 0 refutes the owner
};

struct PairNode {
  int impl_id;
  int spec_id;
  int depth;
  bool expanded = false;
  bool refuted = false;
  int rank = -1;
  std::vector<Move> moves;
  int refuting_move = -1;
  int refuting_succ = -1;  // the successor whose death triggered refutation
};

struct PairSpace {
  std::vector<PairNode> pairs;
  std::map<std::pair<int, int>, int> index;
  // reverse dependencies: pair -> (parent pair, move index)
  std::unordered_map<int, std::vector<std::pair<int, int>>> parents;

  int intern(int impl_id, int spec_id, int depth, bool* fresh) {
    auto [it, inserted] = index.emplace(std::make_pair(impl_id, spec_id),
                                        static_cast<int>(pairs.size()));
    if (inserted) pairs.push_back({impl_id, spec_id, depth, false, false, -1, {}, -1, -1});
    if (fresh) *fresh = inserted;
    if (depth < pairs[it->second].depth) pairs[it->second].depth = depth;
    return it->second;
  }
};

}  // namespace

SimResult simulates(const Network& spec_net, const Network& impl_net,
                    const SimBounds& bounds, const SlotCandidates& candidates) {
  Engine eng(spec_net, impl_net, bounds, candidates);
  PairSpace ps;
  SimResult res;

  int root = ps.intern(0, 0, 0, nullptr);
  std::deque<int> work{root};
  std::deque<int> refuted_queue;
  int next_rank = 0;

  auto refute = [&](int pid, int move_idx, int via_succ) {
    PairNode& p = ps.pairs[pid];
    if (p.refuted) return;
    p.refuted = true;
    p.rank = next_rank++;
    p.refuting_move = move_idx;
    p.refuting_succ = via_succ;
    refuted_queue.push_back(pid);
  };

  bool budget_hit = false;
  while (!work.empty() || !refuted_queue.empty()) {
    // propagate refutations first: they can prune expansion early
    if (!refuted_queue.empty()) {
      int dead = refuted_queue.front();
      refuted_queue.pop_front();
      for (auto [parent, mi] : ps.parents[dead]) {
        PairNode& pp = ps.pairs[parent];
        if (pp.refuted) continue;
        Move& mv = pp.moves[mi];
        if (--mv.remaining == 0) refute(parent, mi, dead);
      }
      if (ps.pairs[root].refuted) break;
      continue;
    }
    int pid = work.front();
    work.pop_front();
    PairNode& p = ps.pairs[pid];
    if (p.expanded || p.refuted) continue;
    if (ps.pairs.size() > bounds.pair_budget) {
      budget_hit = true;
      break;
    }
    p.expanded = true;
    int impl_id = p.impl_id, spec_id = p.spec_id, depth = p.depth;
    auto successors = eng.impl_successors(impl_id, depth);  // copy: ps may reallocate
    for (std::size_t si = 0; si < successors.size(); ++si) {
      const auto& [alpha, impl_succ] = successors[si];
      bool is_sigma = alpha.kind == Label::Kind::Sigma;
      if (is_sigma && depth >= bounds.max_sigma) {
        eng.bound_hit = true;
        continue;  // beyond the bound: assumed matched, reported via bound_hit
      }
      const std::vector<int>& responses = eng.spec_response(spec_id, alpha);
      std::vector<int> succs;
      for (int spec_succ : responses) {
        bool fresh = false;
        int q = ps.intern(impl_succ, spec_succ, depth + (is_sigma ? 1 : 0), &fresh);
        if (ps.pairs[q].refuted) continue;
        succs.push_back(q);
        if (fresh) work.push_back(q);
      }
      PairNode& pnode = ps.pairs[pid];  // re-fetch (intern may reallocate)
      pnode.moves.push_back({alpha, static_cast<int>(succs.size())});
      int mi = static_cast<int>(pnode.moves.size()) - 1;
      if (succs.empty()) {
        refute(pid, mi, -1);
        break;
      }
      for (int q : succs) ps.parents[q].emplace_back(pid, mi);
    }
  }
  // drain any outstanding propagation
  while (!refuted_queue.empty()) {
    int dead = refuted_queue.front();
    refuted_queue.pop_front();
    for (auto [parent, mi] : ps.parents[dead]) {
      PairNode& pp = ps.pairs[parent];
      if (pp.refuted) continue;
      Move& mv = pp.moves[mi];
      if (--mv.remaining == 0) refute(parent, mi, dead);
    }
  }

  res.explored_pairs = ps.pairs.size();
  res.bound_hit = eng.bound_hit;

  if (ps.pairs[root].refuted) {
    res.verdict = Verdict::Fail;
    Trace ce;
    int cur = root;
    for (;;) {
      const PairNode& p = ps.pairs[cur];
      ce.steps.push_back(p.moves[p.refuting_move].label);
      if (p.refuting_succ < 0) {
        res.blocking = p.moves[p.refuting_move].label;
        break;
      }
      // the triggering successor died strictly earlier, so ranks descend
      cur = p.refuting_succ;
    }
    res.counterexample = std::move(ce);
    return res;
  }
  if (budget_hit || eng.truncated) {
    res.verdict = Verdict::Inconclusive;
    res.note = eng.truncated ? "tau-closure truncated" : "pair budget exhausted";
    return res;
  }
  res.verdict = Verdict::Ok;
  return res;
}

SimResult bisimilar(const Network& a, const Network& b, const SimBounds& bounds,
                    const SlotCandidates& candidates) {
  SimResult left = simulates(b, a, bounds, candidates);   // a <~ b
  if (left.verdict == Verdict::Fail) return left;
  SimResult right = simulates(a, b, bounds, candidates);  // b <~ a
  right.explored_pairs += left.explored_pairs;
  right.bound_hit = right.bound_hit || left.bound_hit;
  if (right.verdict == Verdict::Fail) return right;
  if (left.verdict == Verdict::Inconclusive) {
    left.explored_pairs = right.explored_pairs;
    return left;
  }
  return right;
}

SimResult congruence_spot_check(const Network& m, const Network& n, const Network& ctx,
                                const SimBounds& bounds) {
  Network mc = compose(m, ctx);
  Network nc = compose(n, ctx);
  CheckReport wm = check_well_formed(mc);
  CheckReport wn = check_well_formed(nc);
  if (!wm.ok() || !wn.ok())
    throw ModelError("congruence_spot_check: composition is not well-formed");
  return bisimilar(mc, nc, bounds);
}

}  // namespace atcws
