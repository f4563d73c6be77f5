#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "atcws/deduce.hpp"
#include "test_util.hpp"

using namespace atcws;

namespace {

TermPtr atom(const char* n, AtomKind k = AtomKind::Other) { return Term::atom(n, k); }

// Bootstrapping-phase message kit, built by hand from the protocol
// formulas: n_j = prf(m, n_{j-1}), p_j = pair(req, pair(m, n_j)),
// q_i = pair(i, k_{i-1}), w_i = pair(q_i, mac(kBSm, pair(n_i, q_i))),
// auth_i = pair(auth, n_i).
struct BootKit {
  TermPtr m = atom("m", AtomKind::NodeName);
  TermPtr req = atom("req", AtomKind::Tag);
  TermPtr auth_tag = atom("auth", AtomKind::Tag);
  TermPtr kbsm = atom("kBSm", AtomKind::BaseKey);
  TermPtr n0 = atom("n0m", AtomKind::Nonce);

  TermPtr nonce(int j) const {
    TermPtr n = n0;
    for (int i = 0; i < j; ++i) n = Term::app(Ctor::Prf, {m, n});
    return n;
  }
  TermPtr p(int j) const { return pair_of(req, pair_of(m, nonce(j))); }
  TermPtr q(int i) const { return pair_of(Term::integer(i), Term::chain_key("kc", i - 1)); }
  TermPtr mac_w(int i) const { return Term::app(Ctor::Mac, {kbsm, pair_of(nonce(i), q(i))}); }
  TermPtr w(int i) const { return pair_of(q(i), mac_w(i)); }
  TermPtr auth(int i) const { return pair_of(auth_tag, nonce(i)); }

  // knowledge sequence (slot-indexed) of the bootstrapping analysis
  Knowledge phi(int slot) const {
    TermVec g = {p(1)};
    for (int i = 1; i <= slot; ++i) {
      if (i % 2 == 1) {
        g.push_back(w((i + 1) / 2));
      } else {
        g.push_back(auth(i / 2));
        g.push_back(p(i / 2 + 1));
      }
    }
    return Knowledge::of(g);
  }
};

}  // namespace

TEST_CASE("apply_rule: destructors on constructors") {
  TermPtr a = atom("a"), b = atom("b");
  TermPtr k = atom("k", AtomKind::BaseKey);
  CHECK(apply_rule(*rule_by_name("fst"), {pair_of(a, b)}) == a);
  CHECK(apply_rule(*rule_by_name("snd"), {pair_of(a, b)}) == b);
  CHECK(apply_rule(*rule_by_name("dec"), {k, Term::app(Ctor::Enc, {k, a})}) == a);

  SUBCASE("dec fails on a key mismatch") {
    TermPtr k2 = atom("k2", AtomKind::BaseKey);
    CHECK(!apply_rule(*rule_by_name("dec"), {k2, Term::app(Ctor::Enc, {k, a})}));
  }
  SUBCASE("fst fails on a non-pair") {
    CHECK(!apply_rule(*rule_by_name("fst"), {a}));
  }
  SUBCASE("arity mismatch is a structural error") {
    CHECK_THROWS_AS(apply_rule(*rule_by_name("pair"), {a}), ModelError);
  }
  SUBCASE("open premises are rejected") {
    CHECK_THROWS_AS(apply_rule(*rule_by_name("hash"), {Term::var("x")}), ModelError);
  }
}

TEST_CASE("constructor/destructor inverses") {
  testutil::Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    TermPtr a = testutil::random_message(rng, 2);
    TermPtr b = testutil::random_message(rng, 2);
    TermPtr p = *apply_rule(*rule_by_name("pair"), {a, b});
    CHECK(apply_rule(*rule_by_name("fst"), {p}) == a);
    CHECK(apply_rule(*rule_by_name("snd"), {p}) == b);
    TermPtr c = *apply_rule(*rule_by_name("enc"), {a, b});
    CHECK(apply_rule(*rule_by_name("dec"), {a, c}) == b);
  }
}

TEST_CASE("deducible: spec examples") {
  BootKit kit;
  TermPtr a = atom("a"), b = atom("b");

  CHECK(deducible(a, Knowledge::of({pair_of(a, b)}), 0));
  CHECK(deducible(kit.mac_w(1), kit.phi(1), 2));
  for (int slot = 0; slot <= 8; ++slot) {
    CAPTURE(slot);
    CHECK(!deducible(kit.kbsm, kit.phi(slot), 4));
    CHECK(!testutil::oracle_deducible(kit.kbsm, kit.phi(slot)));
  }
}

TEST_CASE("deducible: membership and monotonicity") {
  testutil::Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    TermVec g;
    for (int j = 0; j < 3; ++j) g.push_back(testutil::random_message(rng, 2));
    Knowledge phi = Knowledge::of(g);
    Knowledge wider = phi.union_with(Knowledge::of({testutil::random_message(rng, 2)}));
    for (TermPtr t : phi.gens) CHECK(deducible(t, phi, 0));
    TermPtr w = testutil::random_message(rng, 3);
    if (deducible(w, phi, 2)) CHECK(deducible(w, wider, 2));
  }
}

TEST_CASE("deducible agrees with the forward-closure oracle") {
  testutil::Rng rng(5);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    TermVec g;
    long n = 1 + rng.pick(5);
    for (long j = 0; j < n; ++j) g.push_back(testutil::random_message(rng, 2));
    Knowledge phi = Knowledge::of(g);
    TermPtr w = testutil::random_message(rng, 3);
    CAPTURE(to_string(w));
    CHECK(deducible(w, phi, 3) == testutil::oracle_deducible(w, phi));
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("synth_candidates: spec examples") {
  TermPtr a = atom("a"), b = atom("b");
  TermPtr x = Term::var("x"), y = Term::var("y");

  SUBCASE("depth-1 pairs") {
    TermVec got = synth_candidates(Knowledge::of({a, b}), 1, {pair_of(x, y)});
    std::set<std::string> names;
    for (TermPtr t : got) names.insert(to_string(t));
    CHECK(names == std::set<std::string>{"a", "b", "pair(a,a)", "pair(a,b)",
                                         "pair(b,a)", "pair(b,b)"});
  }
  SUBCASE("pure saturation of p_1") {
    BootKit kit;
    TermVec got = synth_candidates(Knowledge::of({kit.p(1)}), 0, {pair_of(x, y)});
    std::set<std::string> names;
    for (TermPtr t : got) names.insert(to_string(t));
    std::set<std::string> want = {to_string(kit.p(1)), to_string(pair_of(kit.m, kit.nonce(1))),
                                  "m", to_string(kit.nonce(1)), "req"};
    // the pair shape at depth 0 adds nothing beyond the saturation
    CHECK(names == want);
  }
  SUBCASE("empty knowledge") {
    CHECK(synth_candidates(Knowledge::of({}), 1, {pair_of(x, y)}).empty());
  }
  SUBCASE("identical runs produce identical ordering") {
    TermVec s1 = synth_candidates(Knowledge::of({a, b}), 1, {pair_of(x, y)});
    TermVec s2 = synth_candidates(Knowledge::of({a, b}), 1, {pair_of(x, y)});
    CHECK(s1 == s2);
  }
  SUBCASE("repeated variables force equal instantiations") {
    TermVec got = synth_candidates(Knowledge::of({a, b}), 1, {pair_of(x, x)});
    std::set<std::string> names;
    for (TermPtr t : got) names.insert(to_string(t));
    CHECK(names == std::set<std::string>{"a", "b", "pair(a,a)", "pair(b,b)"});
  }
  SUBCASE("instantiations outside D(phi) are filtered") {
    // shape embeds a mac under a secret key: only the saturation survives
    TermPtr k = atom("kSec", AtomKind::BaseKey);
    TermPtr shape = pair_of(x, Term::app(Ctor::Mac, {k, x}));
    TermVec got = synth_candidates(Knowledge::of({a}), 2, {shape});
    CHECK(got == TermVec{a});
  }
}
