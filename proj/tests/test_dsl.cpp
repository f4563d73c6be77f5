#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/dsl.hpp"

using namespace atcws;

TEST_CASE("parse: processes and networks") {
  SUBCASE("a broadcast head in a node") {
    SourceModel m = parse(
        "atoms { node m; node bs; tag req; nonce n1; }\n"
        "network N { node m [ out(pair(req,pair(m,n1))).sleep.nil ] nbr {bs,a,obs} }\n");
    const Network* net = m.network("N");
    REQUIRE(net);
    REQUIRE(net->nodes.size() == 1);
    ProcPtr p = net->nodes[0].proc;
    REQUIRE(p->kind == Process::Kind::Bang);
    CHECK(to_string(p->payload) == "pair(req,pair(m,n1))");
    CHECK(p->cont == Process::sleep(Process::nil()));
    CHECK(net->nodes[0].neighbors == std::vector<std::string>{"a", "bs", "obs"});
  }
  SUBCASE("empty network block is the empty network") {
    SourceModel m = parse("network Zero { }\n");
    REQUIRE(m.network("Zero"));
    CHECK(m.network("Zero")->nodes.empty());
  }
  SUBCASE("let maps to the deduction construct") {
    SourceModel m = parse(
        "atoms { key km; }\n"
        "def T(w) = let k = dec(km, w) in out(k).nil else sleep.T(w)\n"
        "network N { node m [ T(km) ] nbr {} }\n");
    const ProcessDef& d = m.defs->at("T");
    REQUIRE(d.body->kind == Process::Kind::Deduce);
    CHECK(d.body->rule == "dec");
    CHECK(d.body->binder == "k");
    CHECK(d.body->else_p->kind == Process::Kind::Sleep);
  }
  SUBCASE("choice with timeout") {
    SourceModel m = parse(
        "network N { node m [ choice { tau. nil | tau. sleep.nil } timeout nil ] nbr {} }\n");
    ProcPtr p = m.network("N")->nodes[0].proc;
    REQUIRE(p->kind == Process::Kind::SumTimeout);
    CHECK(p->branches.size() == 2);
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("network N { node m [ ??? ] nbr {} }"), ParseError);
  CHECK_THROWS_AS(parse("def F(x) = nil\nnetwork N { node m [ G() ] nbr {} }"), ParseError);
  CHECK_THROWS_AS(
      parse("atoms { other a; } network N { node m [ out(pair(a)).nil ] nbr {} }"),
      ModelError);  // wrong constructor arity
  CHECK_THROWS_AS(parse("def H(x) = out(y).nil\n"), ParseError);  // unbound y
  try {
    parse("network N {\n  node m [ nil ] nbr {}\n  oops\n}");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("emit/parse round trip on the bundled instances") {
  for (const auto& name : protocol_names()) {
    for (const auto& variant : protocol_variants(name)) {
      CAPTURE(name);
      CAPTURE(variant);
      ProtocolInstance inst = build_protocol(name, variant);
      SourceModel model = source_of_instance(inst);
      std::string text = emit(model);
      SourceModel back = parse(text);
      // canonical emission is a fixed point
      CHECK(emit(back) == text);
      // and the parsed networks match the built ones structurally
      std::string base = inst.name + "_" + inst.variant;
      std::replace(base.begin(), base.end(), '-', '_');
      const Network* sys = back.network(base);
      REQUIRE(sys);
      REQUIRE(sys->nodes.size() == inst.system.nodes.size());
      for (std::size_t i = 0; i < sys->nodes.size(); ++i) {
        CAPTURE(sys->nodes[i].name);
        CHECK(sys->nodes[i].name == inst.system.nodes[i].name);
        CHECK(sys->nodes[i].proc == inst.system.nodes[i].proc);
        CHECK(sys->nodes[i].neighbors == inst.system.nodes[i].neighbors);
      }
      // definition tables agree
      CHECK(*back.defs == *inst.system.defs);
      // knowledge sequences agree slot by slot
      const KnowledgeSequence* phi = back.phi(base + "_phi");
      REQUIRE(phi);
      REQUIRE(phi->size() == inst.knowledge.size());
      for (int j = 0; j < phi->size(); ++j)
        CHECK(phi->slots[j].gens == inst.knowledge.slots[j].gens);
    }
  }
}

TEST_CASE("trace files round trip byte-identically") {
  ProtocolInstance inst = build_protocol("leap", "agreement");
  AttackReport rep = replay_attack("leap");
  std::string text = trace_to_text(rep.golden);
  Trace back = parse_trace(text, scope_of(inst));
  REQUIRE(back.steps.size() == rep.golden.steps.size());
  for (std::size_t i = 0; i < back.steps.size(); ++i) CHECK(back.steps[i] == rep.golden.steps[i]);
  CHECK(trace_to_text(back) == text);
}

TEST_CASE("chain keys and integers parse in term position") {
  SourceModel m = parse(
      "chain kc;\n"
      "network N { node m [ out(pair(1,kc_3)).nil ] nbr {} }\n");
  ProcPtr p = m.network("N")->nodes[0].proc;
  CHECK(p->payload == pair_of(Term::integer(1), Term::chain_key("kc", 3)));
}

TEST_CASE("queries parse with bounds") {
  SourceModel m = parse(
      "network A { } network B { }\n"
      "phi P { slot { } }\n"
      "check tgndc A spec B observe {m} attackers {a,b} phi P bound 10 depth 2\n"
      "check wf A\n");
  REQUIRE(m.queries.size() == 2);
  const QuerySpec& q = m.queries[0];
  CHECK(q.kind == QuerySpec::Kind::Tgndc);
  CHECK(q.spec == "B");
  CHECK(q.bound_or("bound", 0) == 10);
  CHECK(q.bound_or("depth", 0) == 2);
  CHECK(q.attackers == std::vector<std::string>{"a", "b"});
}
