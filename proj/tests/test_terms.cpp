#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "atcws/term.hpp"
#include "test_util.hpp"

using namespace atcws;

TEST_CASE("interning gives pointer equality") {
  TermPtr a1 = Term::atom("a");
  TermPtr a2 = Term::atom("a");
  CHECK(a1 == a2);
  CHECK(Term::atom("a", AtomKind::Nonce) != a1);
  CHECK(pair_of(a1, a2) == pair_of(a2, a1->kind == Term::Kind::Atom ? a1 : a2));
}

TEST_CASE("normal form rewrites") {
  TermPtr k = Term::atom("k", AtomKind::BaseKey);
  TermPtr a = Term::atom("a");
  TermPtr b = Term::atom("b");

  SUBCASE("F steps a chain key down") {
    CHECK(Term::app(Ctor::F, {Term::chain_key("kc", 5)}) == Term::chain_key("kc", 4));
  }
  SUBCASE("F at the chain bottom stays") {
    TermPtr t = Term::app(Ctor::F, {Term::chain_key("kc", 0)});
    CHECK(t->kind == Term::Kind::App);
    CHECK(to_string(t) == "F(kc_0)");
  }
  SUBCASE("dec cancels enc under the same key") {
    TermPtr m = pair_of(a, b);
    CHECK(Term::app(Ctor::Dec, {k, Term::app(Ctor::Enc, {k, m})}) == m);
  }
  SUBCASE("dec stays symbolic under a different key") {
    TermPtr other = Term::atom("k2", AtomKind::BaseKey);
    TermPtr t = Term::app(Ctor::Dec, {other, Term::app(Ctor::Enc, {k, a})});
    CHECK(t->kind == Term::Kind::App);
    CHECK(t->ctor == Ctor::Dec);
  }
}

TEST_CASE("normalize is idempotent on random terms") {
  testutil::Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    TermPtr t = testutil::random_message(rng, 4);
    TermPtr n = normalize(t);
    CHECK(n == t);  // factories already maintain the normal form
    CHECK(normalize(n) == n);
  }
}

TEST_CASE("serialization matches the canonical grammar") {
  TermPtr m = Term::atom("m", AtomKind::NodeName);
  TermPtr req = Term::atom("req", AtomKind::Tag);
  TermPtr n1 = Term::atom("n1", AtomKind::Nonce);
  TermPtr p1 = pair_of(req, pair_of(m, n1));
  CHECK(to_string(p1) == "pair(req,pair(m,n1))");
  TermPtr w = Term::app(Ctor::Mac, {Term::atom("kBSm", AtomKind::BaseKey),
                                    pair_of(n1, pair_of(Term::integer(1), Term::chain_key("kc", 0)))});
  CHECK(to_string(w) == "mac(kBSm,pair(n1,pair(1,kc_0)))");
  CHECK(to_string(Term::app(Ctor::F, {Term::chain_key("kc", 0)})) == "F(kc_0)");
}

TEST_CASE("term order is deterministic and total on distinct terms") {
  testutil::Rng rng(11);
  TermVec v;
  for (int i = 0; i < 100; ++i) v.push_back(testutil::random_message(rng, 3));
  std::sort(v.begin(), v.end(), term_less);
  for (std::size_t i = 1; i < v.size(); ++i)
    CHECK(!term_less(v[i], v[i - 1]));
}

TEST_CASE("chain key index must be non-negative") {
  CHECK_THROWS_AS(Term::chain_key("kc", -1), ModelError);
}
