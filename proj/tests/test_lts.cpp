#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/lts.hpp"
#include "test_util_nets.hpp"

using namespace atcws;

namespace {
TermPtr A(const char* n) { return Term::atom(n); }

Network bcast_pair() {
  // m[!<w>.nil]^{n} | n[|?(x).!<x>.nil|nil]^{m}
  ProcPtr sender = Process::bang(A("w"), Process::nil());
  ProcPtr recv = Process::recv("x", Process::bang(Term::var("x"), Process::nil()),
                               Process::nil());
  return Network::make(
      {NetNode::make("m", sender, {"n"}), NetNode::make("n", recv, {"m"})}, nullptr);
}
}  // namespace

TEST_CASE("step: broadcast with reception and loss") {
  Network net = bcast_pair();
  LtsCtx ctx(net.defs);
  auto steps = step(net, ctx);
  int bcasts = 0;
  bool got_recv = false, got_miss = false;
  for (const auto& [l, succ] : steps) {
    if (l.kind != Label::Kind::Bcast) continue;
    ++bcasts;
    CHECK(l.sender == "m");
    CHECK(l.receivers.empty());  // nu subset of nds, nothing observable
    const NetNode* n = succ.find("n");
    REQUIRE(n);
    if (n->proc == Process::bang(A("w"), Process::nil())) got_recv = true;
    if (n->proc == head_normal(Process::recv("x", Process::bang(Term::var("x"), Process::nil()),
                                             Process::nil()),
                               ctx))
      got_miss = true;
  }
  CHECK(bcasts == 2);
  CHECK(got_recv);
  CHECK(got_miss);
  // maximal progress: no sigma while the broadcast is pending
  for (const auto& [l, succ] : steps) CHECK(l.kind != Label::Kind::Sigma);
}

TEST_CASE("step: the empty network ticks forever") {
  Network net = Network::empty();
  LtsCtx ctx(net.defs);
  auto steps = step(net, ctx);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.kind == Label::Kind::Sigma);
  CHECK(steps[0].second.nodes.empty());
}

TEST_CASE("step: receiver timeout moves to the alternative") {
  ProcPtr q = Process::bang(A("q"), Process::nil());
  Network net = Network::make(
      {NetNode::make("n", Process::recv("x", Process::nil(), q), {})}, nullptr);
  LtsCtx ctx(net.defs);
  auto steps = step(net, ctx);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.kind == Label::Kind::Sigma);
  CHECK(steps[0].second.nodes[0].proc == q);
}

TEST_CASE("observe applies (Shh) and (Obs)") {
  CHECK(observe(Label::bcast("m", A("w"), {})) == Label::tau());
  Label o = observe(Label::bcast("m", A("w"), {"obs"}));
  CHECK(o.kind == Label::Kind::ObsBcast);
  CHECK(o.sender.empty());  // transmitter name erased
  CHECK(o.receivers == std::vector<std::string>{"obs"});
  CHECK(observe(Label::sigma()) == Label::sigma());
}

TEST_CASE("weak_step") {
  Network net = bcast_pair();
  LtsCtx ctx(net.defs);
  SUBCASE("tau closure contains the state itself") {
    WeakResult r = weak_step(net, Label::tau(), ctx);
    bool self = false;
    for (const auto& s : r.states)
      if (state_key(s) == state_key(normal_form(net, ctx))) self = true;
    CHECK(self);
  }
  SUBCASE("deterministic sigma successor") {
    ProcPtr p = Process::sleep(Process::nil());
    Network m = Network::make({NetNode::make("a", p, {"b"}), NetNode::make("b", p, {"a"})},
                              nullptr);
    WeakResult r = weak_step(m, Label::sigma(), ctx);
    REQUIRE(r.states.size() == 1);
    CHECK(r.states[0].nodes[0].proc == Process::nil());
  }
}

TEST_CASE("run_trace on the empty trace is the identity") {
  Network net = bcast_pair();
  LtsCtx ctx(net.defs);
  WeakResult r = run_trace(net, Trace{}, ctx);
  REQUIRE(r.states.size() == 1);
}

TEST_CASE("sigma_count") {
  Trace t;
  t.steps = {Label::sigma(), Label::tau(), Label::sigma()};
  CHECK(sigma_count(t) == 2);
  CHECK(sigma_count(Trace{}) == 0);
}

TEST_CASE("trace text format") {
  Trace t;
  t.steps = {Label::obs(pair_of(A("req"), A("m")), {"obs"}), Label::sigma(), Label::tau(),
             Label::input("a", A("w"))};
  CHECK(trace_to_text(t) == "out pair(req,m) > {obs}\nsigma\ntau\nin a w\n");
}

TEST_CASE("explore") {
  SUBCASE("empty network: one state, a sigma self-loop") {
    LtsCtx ctx(std::make_shared<DefTable>());
    StateGraph g = explore(Network::empty(), 3, ctx);
    CHECK(g.states.size() == 1);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].label.kind == Label::Kind::Sigma);
    CHECK(g.edges[0].from == g.edges[0].to);
  }
  SUBCASE("Tick has one canonical state") {
    auto defs = std::make_shared<DefTable>();
    (*defs)["Tick"] = ProcessDef{"Tick", {}, Process::sleep(Process::call("Tick", {}))};
    Network net = Network::make({NetNode::make("m", Process::call("Tick", {}), {})}, defs);
    LtsCtx ctx(defs);
    StateGraph g = explore(net, 5, ctx);
    CHECK(g.states.size() == 1);
  }
  SUBCASE("dot export mentions every edge") {
    Network net = bcast_pair();
    LtsCtx ctx(net.defs);
    StateGraph g = explore(net, 2, ctx);
    std::string dot = g.to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("sigma") != std::string::npos);
  }
}

TEST_CASE("time properties on random Prc_wt networks (smoke)") {
  testutil::Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    Network net = testutil::random_network(rng, 3, 4);
    LtsCtx ctx(net.defs);
    CAPTURE(i);
    REQUIRE(check_well_formed(net).ok());
    StateGraph g = explore(net, 3, ctx);
    REQUIRE(g.complete);
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      // well-formedness preservation
      CHECK(check_well_formed(g.states[s]).ok());
    }
    // time determinism / patience / maximal progress per state
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      int sigmas = 0;
      bool bang = false;
      std::set<std::string> sigma_targets;
      LtsCtx c2(g.states[s].defs);
      for (const auto& [l, succ] : step(g.states[s], c2)) {
        if (l.kind == Label::Kind::Sigma) {
          ++sigmas;
          sigma_targets.insert(state_key(succ));
        }
        if (l.kind == Label::Kind::Bcast) bang = true;
      }
      CHECK(sigma_targets.size() <= 1);      // Prop 2.6
      CHECK((bang ? sigmas == 0 : true));    // Prop 2.8
      CHECK((!bang ? sigmas == 1 : true));   // Prop 2.7
    }
  }
}
