#include "atcws/timeprops.hpp"

#include "atcws/deduce.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace atcws {
namespace propgen {

namespace {

TermPtr random_small_term(Rng& rng, const std::vector<std::string>& scope, int depth) {
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

ProcPtr random_proc(Rng& rng, int depth, std::vector<std::string> scope, int* binders) {
  if (depth <= 0) return rng.coin() ? Process::nil() : Process::sleep(Process::nil());
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

}  // namespace

Network random_network(Rng& rng, int max_nodes, int depth) {
  int n = 1 + static_cast<int>(rng.pick(max_nodes));
  int binders = 0;
  auto defs = std::make_shared<DefTable>();
  std::vector<NetNode> nodes;
  std::vector<std::vector<std::string>> nbrs(n);
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
      // a persistent listener with time-guarded recursion
      std::string dn = "Rcv" + std::to_string(i) + "_" + std::to_string(rng.pick(1000));
      std::string x = "x" + std::to_string(binders++);
      ProcPtr body =
          Process::recv(x, Process::sleep(random_proc(rng, depth - 2, {x}, &binders)),
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

}  // namespace propgen

CheckReport run_time_property_suite(int count, unsigned long seed, int max_sigma,
                                    int max_nodes, int depth) {
  CheckReport rep;
  rep.title = "time properties over " + std::to_string(count) +
              " random networks (seed " + std::to_string(seed) + ")";
  propgen::Rng rng(seed);
  long states_checked = 0;
  for (int i = 0; i < count; ++i) {
    Network net = propgen::random_network(rng, max_nodes, depth);
    auto flag = [&](const std::string& what) {
      rep.violations.push_back("network " + std::to_string(i) + ": " + what);
    };
    if (!check_well_formed(net).ok()) {
      flag("generator produced an ill-formed network");
      continue;
    }
    if (!is_well_timed_syntax(net)) {
      flag("generator produced a non-Prc_wt network");
      continue;
    }
    LtsCtx ctx(net.defs);
    StateGraph g = explore(net, max_sigma, ctx, {}, 40000);
    if (!g.complete) {
      flag("state budget exhausted");
      continue;
    }
    states_checked += static_cast<long>(g.states.size());
    // per-state SOS properties
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      const Network& st = g.states[s];
      if (!check_well_formed(st).ok()) flag("well-formedness lost (Prop 2.5)");
      int sigmas = 0;
      bool bang = false;
      std::set<std::string> sigma_targets;
      for (const auto& [l, succ] : step(st, ctx)) {
        if (l.kind == Label::Kind::Sigma) {
          ++sigmas;
          sigma_targets.insert(state_key(succ));
        } else if (l.kind == Label::Kind::Bcast) {
          bang = true;
        }
      }
      if (sigma_targets.size() > 1) flag("sigma successor not unique (Prop 2.6)");
      if (bang && sigmas > 0) flag("sigma enabled under a pending broadcast (Prop 2.8)");
      if (!bang && sigmas != 1) flag("patience violated (Prop 2.7)");
    }
    // bounded instantaneous runs: the non-sigma edge subgraph is acyclic
    std::vector<std::vector<int>> insta(g.states.size());
    for (const auto& e : g.edges)
      if (e.label.kind != Label::Kind::Sigma && e.from != e.to) insta[e.from].push_back(e.to);
    std::vector<int> mark(g.states.size(), 0);
    bool cyclic = false;
    std::function<void(int)> dfs = [&](int v) {
      mark[v] = 1;
      for (int w : insta[v]) {
        if (mark[w] == 1) cyclic = true;
        else if (mark[w] == 0) dfs(w);
        if (cyclic) return;
      }
      mark[v] = 2;
    };
    for (std::size_t s = 0; s < g.states.size() && !cyclic; ++s)
      if (mark[s] == 0) dfs(static_cast<int>(s));
    // self-loops of non-sigma edges would also be divergent
    for (const auto& e : g.edges)
      if (e.label.kind != Label::Kind::Sigma && e.from == e.to) cyclic = true;
    if (cyclic) flag("instantaneous cycle inside a slot (Def 2.9)");
  }
  std::ostringstream note;
  note << count << " networks, " << states_checked << " reachable states checked to sigma depth "
       << max_sigma;
  rep.notes.push_back(note.str());
  rep.verdict = rep.violations.empty() ? Verdict::Ok : Verdict::Fail;
  return rep;
}

}  // namespace atcws
