#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/protocols.hpp"
#include "test_util_nets.hpp"

using namespace atcws;

namespace {

// self-composition of a protocol part with its top attacker, per the
// decomposition lemmas of the verification theorems
SimResult lemma_check(const ProtocolInstance& inst, const std::string& node,
                      const std::string& attacker, bool observed, ProcPtr spec_proc,
                      bool spec_obs, int max_sigma) {
  const NetNode* n = inst.system.find(node);
  REQUIRE(n != nullptr);
  Network part = Network::make({NetNode::make(node, n->proc, {})}, inst.system.defs);
  AttackerWiring w;
  w.protocol_nodes = {node};
  w.attacker_nodes = {attacker};
  if (observed) w.observed = {node};
  TopConfig cfg;
  cfg.max_slots = max_sigma + 1;
  CriterionSetup setup = criterion_composition(part, w, inst.knowledge, cfg);
  Network spec = Network::make(
      {NetNode::make(node, spec_proc,
                     spec_obs ? std::vector<std::string>{"obs"} : std::vector<std::string>{})},
      inst.system.defs);
  SimBounds bounds;
  bounds.max_sigma = max_sigma;
  bounds.direct_send = setup.attackers;
  return simulates(spec, setup.composition, bounds);
}

ProcPtr proc_of(const Network& net, const std::string& node) {
  const NetNode* n = net.find(node);
  REQUIRE(n != nullptr);
  return n->proc;
}

}  // namespace

TEST_CASE("simulation is reflexive on random well-formed networks") {
  testutil::Rng rng(2024);
  SimBounds bounds;
  bounds.max_sigma = 3;
  for (int i = 0; i < 40; ++i) {
    Network m = testutil::random_network(rng, 3, 4);
    CAPTURE(i);
    SimResult res = simulates(m, m, bounds);
    CHECK(res.holds());
  }
}

TEST_CASE("bisimilarity with the monoid unit") {
  testutil::Rng rng(7);
  Network m = testutil::random_network(rng, 2, 3);
  Network with_unit = compose(m, Network::empty());
  SimBounds bounds;
  bounds.max_sigma = 3;
  CHECK(bisimilar(m, with_unit, bounds).holds());
}

TEST_CASE("structurally congruent networks are bisimilar") {
  testutil::Rng rng(99);
  SimBounds bounds;
  bounds.max_sigma = 3;
  int done = 0;
  for (int i = 0; i < 50; ++i) {
    Network m = testutil::random_network(rng, 2, 3);
    // wrap each process in a definition call: one unfolding of Def 2.2
    auto defs = std::make_shared<DefTable>(*m.defs);
    std::vector<NetNode> nodes;
    for (std::size_t k = 0; k < m.nodes.size(); ++k) {
      std::string dn = "Wrap" + std::to_string(k);
      (*defs)[dn] = ProcessDef{dn, {}, m.nodes[k].proc};
      nodes.push_back(NetNode::make(m.nodes[k].name, Process::call(dn, {}),
                                    m.nodes[k].neighbors));
    }
    Network n = Network::make(std::move(nodes), defs);
    CAPTURE(i);
    REQUIRE(struct_congruent(m, n));
    CHECK(bisimilar(m, n, bounds).holds());
    ++done;
  }
  CHECK(done == 50);
}

TEST_CASE("differing node names are distinguished through input availability") {
  // Prop A.1 at the checkable level: nds(M) != nds(N) refutes bisimilarity
  // once any environment input candidate is supplied
  ProcPtr p = Process::sleep(Process::nil());
  Network m = Network::make({NetNode::make("m", p, {})}, nullptr);
  Network n = Network::make({NetNode::make("n", p, {})}, nullptr);
  SimBounds bounds;
  bounds.max_sigma = 2;
  SlotCandidates cands{{{"m", Term::atom("w")}}};
  CHECK(bisimilar(m, n, bounds).holds());  // no candidates, no distinction
  SimResult res = bisimilar(m, n, bounds, cands);
  CHECK(res.verdict == Verdict::Fail);
}

TEST_CASE("congruence spot check") {
  ProcPtr p = Process::sleep(Process::bang(Term::atom("a"), Process::nil()));
  Network m = Network::make({NetNode::make("m", p, {"obs"})}, nullptr);
  Network listener = Network::make(
      {NetNode::make("o2", Process::recv("x", Process::nil(), Process::nil()), {"m"})},
      nullptr);
  // m | O with itself: trivially holds
  Network m2 = Network::make({NetNode::make("m", p, {"obs", "o2"})}, nullptr);
  SimBounds bounds;
  bounds.max_sigma = 3;
  CHECK(congruence_spot_check(m2, m2, listener, bounds).holds());
}

TEST_CASE("Lemma 4.4: bootstrapping parts against their abstractions") {
  ProtocolInstance inst = build_protocol("mutesla-boot", "integrity");
  SUBCASE("(1) base station vs the silent clock") {
    SimResult res = lemma_check(inst, "bs", "b", false, Process::call("Tick", {}), false, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
  SUBCASE("(2) requester vs the observable abstraction") {
    SimResult res = lemma_check(inst, "m", "a", true,
                                proc_of(inst.abstraction, "m"), true, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
}

TEST_CASE("Lemma 4.7: authenticated-broadcast parts") {
  ProtocolParams params;
  params.receivers = 1;
  ProtocolInstance inst = build_protocol("mutesla-auth", "integrity", params);
  SUBCASE("(1) sender composed with its attacker stays below itself") {
    SimResult res = lemma_check(inst, "bs", "b", true, proc_of(inst.system, "bs"), true, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
  SUBCASE("(2) receiver vs R-hat") {
    SimResult res = lemma_check(inst, "m1", "a1", true,
                                proc_of(inst.abstraction, "m1"), true, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
}

TEST_CASE("Lemma 5.4: LEAP+ parts") {
  ProtocolInstance inst = build_protocol("leap", "integrity");
  SUBCASE("(1) initiator vs S-hat") {
    SimResult res = lemma_check(inst, "m", "a", true, proc_of(inst.abstraction, "m"), true, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
  SUBCASE("(2) responder vs the silent clock") {
    SimResult res = lemma_check(inst, "r", "b", false, Process::call("Tick", {}), false, 8);
    CAPTURE(res.note);
    CHECK(res.holds());
  }
}

TEST_CASE("the Theorem 4.2 attack refutes the agreement abstraction") {
  AttackReport rep = replay_attack("mutesla-boot");
  SimBounds bounds;
  bounds.max_sigma = 5;
  SimResult res = simulates(rep.instance.abstraction, rep.composition, bounds);
  REQUIRE(res.verdict == Verdict::Fail);
  REQUIRE(res.counterexample.has_value());
  // the counterexample replays on the composition and the spec rejects it
  LtsCtx ictx(rep.composition.defs);
  CHECK(!run_trace(rep.composition, *res.counterexample, ictx).states.empty());
  LtsCtx sctx(rep.instance.abstraction.defs);
  CHECK(run_trace(rep.instance.abstraction, *res.counterexample, sctx).states.empty());
}
