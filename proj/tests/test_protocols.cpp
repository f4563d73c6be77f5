#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/protocols.hpp"

using namespace atcws;

TEST_CASE("builders produce well-formed, well-timed systems") {
  for (const auto& name : protocol_names()) {
    for (const auto& variant : protocol_variants(name)) {
      CAPTURE(name);
      CAPTURE(variant);
      ProtocolInstance inst = build_protocol(name, variant);
      CHECK(check_well_formed(inst.system).ok());
      CHECK(check_well_formed(inst.abstraction).ok());
      CHECK(is_well_timed_syntax(inst.system));
      CHECK(check_well_formed(wire_observed(inst.system, inst.wiring)).ok());
    }
  }
}

TEST_CASE("boot builder matches the table shapes") {
  ProtocolInstance inst = build_protocol("mutesla-boot", "agreement");
  // p_1 = pair(req, pair(m, prf(m, n0m))), end_1 = pair(end, prf(m, n0m))
  TermPtr m = inst.atoms.at("m");
  TermPtr n1 = Term::app(Ctor::Prf, {m, inst.atoms.at("n0m")});
  TermPtr p1 = pair_of(inst.atoms.at("req"), pair_of(m, n1));
  CHECK(to_string(p1) == "pair(req,pair(m,prf(m,n0m)))");
  TermVec msgs = msg_of(inst.system);
  CHECK(std::find(msgs.begin(), msgs.end(), inst.atoms.at("kBSm")) != msgs.end());
}

TEST_CASE("auth builder starts receivers at R<1,-1,bot,kBS>") {
  ProtocolParams p;
  p.receivers = 2;
  ProtocolInstance inst = build_protocol("mutesla-auth", "integrity", p);
  const NetNode* m1 = inst.system.find("m1");
  REQUIRE(m1 != nullptr);
  CHECK(m1->proc->kind == Process::Kind::Call);
  CHECK(m1->proc->name == "Ra_1_m1");
  CHECK(m1->proc->args.size() == 2);
  CHECK(to_string(m1->proc->args[1]) == "kc_0");
}

TEST_CASE("lisp full variant splits the key server into kd and kl") {
  ProtocolInstance inst = build_protocol("lisp", "full");
  CHECK(inst.system.find("kd") != nullptr);
  CHECK(inst.system.find("kl") != nullptr);
  CHECK(inst.system.find("m") != nullptr);
}

TEST_CASE("scripted attackers are admissible (Def 3.2)") {
  for (const auto& name : {"mutesla-boot", "leap", "lisp"}) {
    CAPTURE(name);
    Network atk = scripted_attacker(name);
    CHECK(is_well_timed_syntax(atk));
    CHECK(msg_of(atk).empty());  // msg(Q_i) subset of D(empty phi_0)
  }
}

TEST_CASE("top attacker violates well-timedness (Remark 3.10)") {
  ProtocolInstance inst = build_protocol("mutesla-boot", "integrity");
  auto shapes = harvest_shapes(inst.system);
  TopConfig cfg;
  cfg.max_slots = 4;
  TopAttacker top = top_attacker(inst.wiring, inst.knowledge, shapes, cfg);
  CHECK(!is_well_timed_syntax(top.network));
  CHECK(check_well_formed(compose(wire_observed(inst.system, inst.wiring), top.network)).ok());
}

TEST_CASE("replay attacks reproduce the exhibited traces") {
  SUBCASE("mutesla-boot: agreement gap 4 vs specified 2") {
    AttackReport rep = replay_attack("mutesla-boot");
    CHECK(rep.report.verdict == Verdict::Fail);
    CHECK(rep.observed_gap == 4);
    CHECK(rep.specified_gap == 2);
  }
  SUBCASE("leap: agreement gap 4 vs specified 2") {
    AttackReport rep = replay_attack("leap");
    CHECK(rep.report.verdict == Verdict::Fail);
    CHECK(rep.observed_gap == 4);
    CHECK(rep.specified_gap == 2);
  }
  SUBCASE("lisp: integrity gap 3 vs specified 2") {
    AttackReport rep = replay_attack("lisp");
    CHECK(rep.report.verdict == Verdict::Fail);
    CHECK(rep.observed_gap == 3);
    CHECK(rep.specified_gap == 2);
  }
}

TEST_CASE("sigma-gap suites hold on the abstractions (one round smoke)") {
  for (const auto& [name, variant] : std::vector<std::pair<std::string, std::string>>{
           {"mutesla-boot", "agreement"},
           {"mutesla-boot", "integrity"},
           {"leap", "agreement"},
           {"leap", "integrity"},
           {"lisp", "integrity"}}) {
    CAPTURE(name);
    CAPTURE(variant);
    ProtocolInstance inst = build_protocol(name, variant);
    CheckReport rep = check_sigma_gaps(inst, 1, 4);
    CAPTURE(rep.render());
    CHECK(rep.ok());
  }
}
