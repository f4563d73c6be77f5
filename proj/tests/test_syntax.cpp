#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/process.hpp"
#include "atcws/protocols.hpp"
#include "test_util_nets.hpp"

using namespace atcws;

namespace {
TermPtr A(const char* n) { return Term::atom(n); }
}  // namespace

TEST_CASE("substitute") {
  TermPtr a = A("a");
  ProcPtr bang_x = Process::bang(Term::var("x"), Process::nil());

  SUBCASE("replaces free occurrences") {
    CHECK(substitute(bang_x, "x", a) == Process::bang(a, Process::nil()));
  }
  SUBCASE("rebinding shadows") {
    ProcPtr p = Process::recv("x", bang_x, Process::nil());
    CHECK(substitute(p, "x", a) == p);
  }
  SUBCASE("no-op without free occurrences") {
    ProcPtr p = Process::bang(a, Process::sleep(Process::nil()));
    CHECK(substitute(p, "x", A("b")) == p);
  }
  SUBCASE("rule (Rcv): receiving w instantiates the body") {
    // |?(x).!<x>.nil|nil receiving w yields !<w>.nil
    ProcPtr p = Process::recv("x", bang_x, Process::nil());
    LtsCtx ctx(std::make_shared<DefTable>());
    Network net = Network::make({NetNode::make("n", p, {"m"})}, nullptr);
    auto steps = step(net, ctx, {{"m", a}});
    bool got = false;
    for (const auto& [l, succ] : steps)
      if (l.kind == Label::Kind::Input && succ.nodes[0].proc == Process::bang(a, Process::nil()))
        got = true;
    CHECK(got);
  }
}

TEST_CASE("check_well_formed") {
  ProcPtr nil = Process::nil();

  SUBCASE("duplicate names") {
    Network net = Network::make(
        {NetNode::make("m", nil, {}), NetNode::make("m", nil, {})}, nullptr);
    CheckReport rep = check_well_formed(net);
    REQUIRE(!rep.ok());
    CHECK(rep.violations[0].find("duplicate node name m") != std::string::npos);
  }
  SUBCASE("asymmetric neighbouring") {
    Network net = Network::make(
        {NetNode::make("m", nil, {"n"}), NetNode::make("n", nil, {})}, nullptr);
    CheckReport rep = check_well_formed(net);
    REQUIRE(!rep.ok());
    CHECK(rep.violations[0].find("asymmetric") != std::string::npos);
  }
  SUBCASE("single node with empty neighbours is fine") {
    CHECK(check_well_formed(Network::make({NetNode::make("m", nil, {})}, nullptr)).ok());
  }
  SUBCASE("disconnected components are flagged") {
    Network net = Network::make({NetNode::make("a", nil, {"b"}), NetNode::make("b", nil, {"a"}),
                                 NetNode::make("c", nil, {"d"}), NetNode::make("d", nil, {"c"})},
                                nullptr);
    CheckReport rep = check_well_formed(net);
    REQUIRE(!rep.ok());
    CHECK(rep.violations[0].find("disconnected") != std::string::npos);
  }
  SUBCASE("shared out-of-network neighbours connect") {
    Network net = Network::make(
        {NetNode::make("a", nil, {"obs"}), NetNode::make("b", nil, {"obs"})}, nullptr);
    CHECK(check_well_formed(net).ok());
  }
  SUBCASE("phantom neighbours are noted") {
    Network net = Network::make({NetNode::make("a", nil, {"ghost"})}, nullptr);
    CheckReport rep = check_well_formed(net);
    CHECK(rep.ok());
    REQUIRE(!rep.notes.empty());
    CHECK(rep.notes[0].find("ghost") != std::string::npos);
  }
}

TEST_CASE("topology") {
  SUBCASE("empty network") {
    Topology t = topology(Network::empty());
    CHECK(t.nds.empty());
    CHECK(t.env.empty());
  }
  SUBCASE("environment per the attack setups") {
    Network net = Network::make({NetNode::make("bs", Process::nil(), {"m", "b", "obs"}),
                                 NetNode::make("m", Process::nil(), {"bs", "a", "obs"})},
                                nullptr);
    Topology t = topology(net);
    CHECK(t.nds == std::set<std::string>{"bs", "m"});
    CHECK(t.env == std::set<std::string>{"a", "b", "obs"});
    CHECK(neighbors_of(t, "m") == std::set<std::string>{"a", "bs", "obs"});
    CHECK_THROWS_AS(neighbors_of(t, "zz"), ModelError);
  }
}

TEST_CASE("msg function (Table 4)") {
  auto defs = std::make_shared<DefTable>();
  SUBCASE("nil and broadcast") {
    CHECK(msg_of_process(Process::nil(), *defs).empty());
    TermPtr w = pair_of(A("a"), A("b"));
    TermVec got = msg_of_process(Process::bang(w, Process::nil()), *defs);
    CHECK(got == TermVec{A("a"), A("b"), w});  // canonical order: a < b < pair(..)
  }
  SUBCASE("recursive definitions unwind once") {
    (*defs)["H"] = ProcessDef{
        "H", {"x"}, Process::bang(Term::var("x"), Process::call("H", {Term::var("x")}))};
    TermVec got = msg_of_process(Process::call("H", {A("a")}), *defs);
    CHECK(got == TermVec{A("a")});
  }
  SUBCASE("undefined call errors") {
    CHECK_THROWS_AS(msg_of_process(Process::call("Zz", {}), *defs), ModelError);
  }
}

TEST_CASE("well-timedness of syntax") {
  auto defs = std::make_shared<DefTable>();
  auto net_with = [&](ProcPtr p) {
    return Network::make({NetNode::make("m", p, {})}, defs);
  };
  SUBCASE("sigma-guarded recursion") {
    (*defs)["H"] = ProcessDef{"H", {"x"},
                              Process::sleep(Process::call("H", {Term::var("x")}))};
    CHECK(is_well_timed_syntax(net_with(Process::call("H", {A("a")}))));
  }
  SUBCASE("a broadcast loop without sigma is rejected") {
    (*defs)["B"] = ProcessDef{"B", {}, Process::bang(A("a"), Process::call("B", {}))};
    CHECK(!is_well_timed_syntax(net_with(Process::call("B", {}))));
  }
  SUBCASE("persistent listeners are time-guarded") {
    (*defs)["Rcv"] = ProcessDef{
        "Rcv", {}, Process::recv("x", Process::nil(), Process::call("Rcv", {}))};
    CHECK(is_well_timed_syntax(net_with(Process::call("Rcv", {}))));
  }
  SUBCASE("unguarded mutual recursion is rejected") {
    (*defs)["P"] = ProcessDef{"P", {}, Process::bang(A("a"), Process::call("Q", {}))};
    (*defs)["Q"] = ProcessDef{"Q", {}, Process::match(A("a"), A("a"),
                                                      Process::call("P", {}), Process::nil())};
    CHECK(!is_well_timed_syntax(net_with(Process::call("P", {}))));
  }
}

TEST_CASE("structural congruence") {
  auto defs = std::make_shared<DefTable>();
  (*defs)["H"] = ProcessDef{"H", {"x"}, Process::bang(Term::var("x"), Process::nil())};
  ProcPtr direct = Process::bang(A("a"), Process::nil());

  SUBCASE("definition unfolding") {
    Network lhs = Network::make({NetNode::make("n", Process::call("H", {A("a")}), {})}, defs);
    Network rhs = Network::make({NetNode::make("n", direct, {})}, defs);
    CHECK(struct_congruent(lhs, rhs));
  }
  SUBCASE("parallel commutativity via canonical node order") {
    Network a = Network::make({NetNode::make("m", direct, {"n"}),
                               NetNode::make("n", Process::nil(), {"m"})},
                              defs);
    Network b = Network::make({NetNode::make("n", Process::nil(), {"m"}),
                               NetNode::make("m", direct, {"n"})},
                              defs);
    CHECK(struct_congruent(a, b));
    CHECK(network_equal(a, b));
  }
  SUBCASE("sum reordering is canonical") {
    ProcPtr p1 = Process::sleep(Process::nil());
    ProcPtr p2 = Process::bang(A("a"), Process::nil());
    CHECK(Process::sum({p1, p2}, Process::nil()) == Process::sum({p2, p1}, Process::nil()));
  }
  SUBCASE("distinct payloads are not congruent") {
    Network lhs = Network::make({NetNode::make("n", direct, {})}, defs);
    Network rhs = Network::make(
        {NetNode::make("n", Process::bang(A("b"), Process::nil()), {})}, defs);
    CHECK(!struct_congruent(lhs, rhs));
  }
  SUBCASE("equivalence relation on random networks") {
    testutil::Rng rng(5);
    for (int i = 0; i < 30; ++i) {
      Network m = testutil::random_network(rng, 3, 3);
      CHECK(struct_congruent(m, m));
    }
  }
}

TEST_CASE("well-formedness across the bundled protocols after wiring") {
  for (const auto& name : protocol_names())
    for (const auto& variant : protocol_variants(name)) {
      ProtocolInstance inst = build_protocol(name, variant);
      Network wired = wire_observed(inst.system, inst.wiring);
      CAPTURE(name);
      CAPTURE(variant);
      CHECK(check_well_formed(wired).ok());
    }
}

TEST_CASE("free variables and binder discipline") {
  ProcPtr p = Process::deduce({Term::var("u")}, "fst", "q",
                              Process::bang(Term::var("q"), Process::nil()),
                              Process::bang(Term::var("v"), Process::nil()));
  std::set<std::string> fv;
  free_vars(p, fv);
  CHECK(fv == std::set<std::string>{"u", "v"});
}
