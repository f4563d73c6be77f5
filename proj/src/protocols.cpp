#include "atcws/protocols.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_set>

namespace atcws {

namespace {

// ---- construction shorthands ------------------------------------------------

ProcPtr NIL() { return Process::nil(); }
ProcPtr OUT(TermPtr w, ProcPtr k) { return Process::bang(w, k); }
ProcPtr SLP(ProcPtr k) { return Process::sleep(k); }
ProcPtr RCV(const std::string& x, ProcPtr body, ProcPtr to) {
  return Process::recv(x, body, to);
}
ProcPtr DED(TermVec prem, const char* rule, const std::string& x, ProcPtr then_p,
            ProcPtr else_p = nullptr) {
  return Process::deduce(std::move(prem), rule, x, then_p, else_p ? else_p : NIL());
}
ProcPtr MAT(TermPtr l, TermPtr r, ProcPtr t, ProcPtr e) {
  return Process::match(l, r, t, e);
}
ProcPtr CALL(const std::string& n, TermVec a = {}) { return Process::call(n, std::move(a)); }
ProcPtr TAU1(ProcPtr branch, ProcPtr to) { return Process::sum({branch}, to); }
TermPtr V(const std::string& n) { return Term::var(n); }
TermPtr P2T(TermPtr a, TermPtr b) { return pair_of(a, b); }
TermPtr MACT(TermPtr a, TermPtr b) { return Term::app(Ctor::Mac, {a, b}); }
TermPtr PRFT(TermPtr a, TermPtr b) { return Term::app(Ctor::Prf, {a, b}); }
TermPtr ENCT(TermPtr a, TermPtr b) { return Term::app(Ctor::Enc, {a, b}); }
TermPtr HASHT(TermPtr a) { return Term::app(Ctor::Hash, {a}); }
TermPtr FN(TermPtr a, int e) {
  for (int i = 0; i < e; ++i) a = Term::app(Ctor::F, {a});
  return a;
}

struct Kit {
  DefTable defs;
  std::map<std::string, TermPtr> atoms;
  std::set<std::string> chains;

  TermPtr atom(const std::string& n, AtomKind k) {
    TermPtr t = Term::atom(n, k);
    atoms[n] = t;
    return t;
  }
  TermPtr ck(const std::string& chain, long i) {
    chains.insert(chain);
    return Term::chain_key(chain, i);
  }
  void def(const std::string& name, std::vector<std::string> params, ProcPtr body) {
    defs[name] = ProcessDef{name, std::move(params), body};
  }
  DefTablePtr freeze() { return std::make_shared<DefTable>(defs); }
};

std::string lsuffix(int l) { return l < 0 ? "m" + std::to_string(-l) : std::to_string(l); }

// ambient public data: names, tags, small integers, bot
TermVec ambient_atoms(const Kit& kit, int max_int) {
  TermVec out;
  for (const auto& [name, t] : kit.atoms)
    if (t->atom_kind == AtomKind::NodeName || t->atom_kind == AtomKind::Tag ||
        (t->atom_kind == AtomKind::Other))
      out.push_back(t);
  for (int i = 0; i <= max_int; ++i) out.push_back(Term::integer(i));
  return out;
}

void validate_params(const ProtocolParams& p) {
  if (p.chain_length < 1 || p.chain_length > 32)
    throw ModelError("chain length out of supported bounds");
  if (p.buffer_size < 1) throw ModelError("buffer size must be >= 1");
  if (p.receivers < 1) throw ModelError("receiver count must be >= 1");
  if (p.rounds < 3 || p.rounds > 24) throw ModelError("rounds out of supported bounds");
}

// ---- the authenticated-broadcast receiver family (Table 7) -------------------
//
// R, P, Q are generated per concrete (interval i, last-auth interval l);
// the runtime parameters are the stored packet and the last key. The key
// check F^{i-1-l}(k) = k_l resolves by chain-key index arithmetic.
struct RFamily {
  std::string base;  // "Rr" plain, "Ra" with the auth broadcast (Z')
  bool with_auth;
  int imax;
  TermPtr auth_tag;

  std::string rn(int i, int l) const { return base + "_" + std::to_string(i) + "_" + lsuffix(l); }
  std::string pn(int i, int l) const { return base + "P_" + std::to_string(i) + "_" + lsuffix(l); }
  std::string qn(int i, int l) const { return base + "Q_" + std::to_string(i) + "_" + lsuffix(l); }

  ProcPtr rcall(int i, int l, TermPtr r, TermPtr kl) const {
    if (i > imax) return CALL("Tick");
    return CALL(rn(i, l), {r, kl});
  }

  // T(i, l, p, r, k_l, k): authenticate the key, then the stored packet
  ProcPtr t_chain(int i, int l, TermPtr p, TermPtr r, TermPtr kl, TermPtr k) const {
    ProcPtr on_auth;  // sigma.Z<i+1, i-1, p, r, k>
    if (with_auth) {
      on_auth = SLP(DED({auth_tag, r}, "pair", "zt",
                        OUT(V("zt"), rcall(i + 1, i - 1, p, k))));
    } else {
      on_auth = SLP(rcall(i + 1, i - 1, p, k));
    }
    ProcPtr key_ok_pkt_bad = SLP(rcall(i + 1, i - 1, p, k));
    ProcPtr key_bad = SLP(rcall(i + 1, l, p, kl));
    return MAT(FN(k, i - 1 - l), kl,
               DED({r}, "fst", "u",
                   DED({r}, "snd", "q",
                       DED({V("q"), k}, "mac", "u2",
                           MAT(V("u"), V("u2"), on_auth, key_ok_pkt_bad), NIL()),
                       NIL()),
                   key_ok_pkt_bad),
               key_bad);
  }

  void generate(Kit& kit) const {
    for (int i = 1; i <= imax; ++i) {
      for (int l = -1; l <= i - 2; ++l) {
        kit.def(rn(i, l), {"r", "kl"},
                RCV("p", SLP(CALL(pn(i, l), {V("p"), V("r"), V("kl")})),
                    CALL(qn(i, l), {V("r"), V("kl")})));
        kit.def(pn(i, l), {"p", "r", "kl"},
                RCV("k", t_chain(i, l, V("p"), V("r"), V("kl"), V("k")),
                    rcall(i + 1, l, V("p"), V("kl"))));
        kit.def(qn(i, l), {"r", "kl"},
                RCV("k", t_chain(i, l, V("r"), V("r"), V("kl"), V("k")),
                    rcall(i + 1, l, V("r"), V("kl"))));
      }
    }
  }
};

void def_tick(Kit& kit) { kit.def("Tick", {}, SLP(CALL("Tick"))); }

// ---- muTESLA bootstrapping ----------------------------------------------------

struct BootTerms {
  Kit& kit;
  TermPtr m, bs, req, end_tag, auth_tag, kbsm, n0, bot;

  explicit BootTerms(Kit& k) : kit(k) {
    m = kit.atom("m", AtomKind::NodeName);
    bs = kit.atom("bs", AtomKind::NodeName);
    req = kit.atom("req", AtomKind::Tag);
    end_tag = kit.atom("end", AtomKind::Tag);
    auth_tag = kit.atom("auth", AtomKind::Tag);
    kbsm = kit.atom("kBSm", AtomKind::BaseKey);
    n0 = kit.atom("n0m", AtomKind::Nonce);
    bot = kit.atom("bot", AtomKind::Other);
  }

  TermPtr nonce(int j) const {
    TermPtr n = n0;
    for (int i = 0; i < j; ++i) n = PRFT(m, n);
    return n;
  }
  TermPtr p(int j) const { return P2T(req, P2T(m, nonce(j))); }
  TermPtr q(int i) const { return P2T(Term::integer(i), kit.ck("kc", i - 1)); }
  // reply computed in interval i for the nonce of request j
  TermPtr w(int i, int j) const { return P2T(q(i), MACT(kbsm, P2T(nonce(j), q(i)))); }
  TermPtr end_(int j) const { return P2T(end_tag, nonce(j)); }
  TermPtr auth(int j) const { return P2T(auth_tag, nonce(j)); }
};

ProtocolInstance build_mutesla_boot(const std::string& variant, const ProtocolParams& params) {
  bool agreement = variant == "agreement";
  Kit kit;
  BootTerms t(kit);
  def_tick(kit);
  RFamily rf{"Rr", false, params.rounds + 1, t.auth_tag};
  rf.generate(kit);
  const int R = params.rounds;

  auto acall = [&](int j) { return j > R ? CALL("Tick") : CALL("A_" + std::to_string(j)); };
  auto dcall = [&](int i) { return i > R ? CALL("Tick") : CALL("D_" + std::to_string(i)); };

  for (int j = 1; j <= R; ++j) {
    // request round j at node m (Table 5, A/B/C chain inlined)
    ProcPtr retry = SLP(acall(j + 1));
    ProcPtr c3_cont =
        agreement ? SLP(rf.rcall(j + 1, j - 1, t.bot, V("k")))
                  : SLP(DED({t.auth_tag, V("nj")}, "pair", "t2",
                            OUT(V("t2"), rf.rcall(j + 1, j - 1, t.bot, V("k")))));
    ProcPtr c3 = DED({V("q")}, "snd", "k", c3_cont, NIL());
    ProcPtr c2 = DED({V("q")}, "fst", "iv", c3, retry);
    ProcPtr c1 = DED({V("w")}, "snd", "h",
                     DED({V("nj"), V("q")}, "pair", "r2",
                         DED({t.kbsm, V("r2")}, "mac", "h2",
                             MAT(V("h"), V("h2"), c2, retry), NIL()),
                         NIL()),
                     NIL());
    ProcPtr c = DED({V("w")}, "fst", "q", c1, retry);
    ProcPtr b = RCV("w", c, acall(j + 1));
    ProcPtr body = DED({t.m, t.nonce(j - 1)}, "prf", "nj",
                       DED({t.m, V("nj")}, "pair", "tt",
                           DED({t.req, V("tt")}, "pair", "pj",
                               OUT(V("pj"), SLP(b)), NIL()),
                           NIL()),
                       NIL());
    kit.def("A_" + std::to_string(j), {}, body);
  }

  for (int i = 1; i <= R; ++i) {
    // reply round i at the base station
    ProcPtr miss = SLP(SLP(dcall(i + 1)));
    ProcPtr tail = agreement
                       ? SLP(DED({t.end_tag, V("nn")}, "pair", "te",
                                 OUT(V("te"), dcall(i + 1)), NIL()))
                       : SLP(dcall(i + 1));
    ProcPtr e3 = DED({V("tt")}, "snd", "nn",
                     DED({Term::integer(i), kit.ck("kc", i - 1)}, "pair", "qi",
                         DED({V("nn"), V("qi")}, "pair", "ri",
                             DED({t.kbsm, V("ri")}, "mac", "hi",
                                 DED({V("qi"), V("hi")}, "pair", "wi",
                                     SLP(OUT(V("wi"), tail)), NIL()),
                                 NIL()),
                             NIL()),
                         NIL()),
                     NIL());
    ProcPtr e2 = DED({V("p")}, "snd", "tt",
                     DED({V("tt")}, "fst", "mm", e3, miss), NIL());
    ProcPtr e1 = MAT(V("p1"), t.req, e2, miss);
    ProcPtr e = DED({V("p")}, "fst", "p1", e1, miss);
    kit.def("D_" + std::to_string(i), {}, RCV("p", e, SLP(dcall(i + 1))));
  }

  // abstractions (rho_agr / rho_int)
  if (agreement) {
    for (int i = 1; i <= R; ++i) {
      ProcPtr dnext = i + 1 > R ? CALL("Tick") : CALL("Dh_" + std::to_string(i + 1));
      kit.def("Dh_" + std::to_string(i), {},
              TAU1(SLP(OUT(t.w(i, i), SLP(OUT(t.end_(i), dnext)))), SLP(dnext)));
      ProcPtr anext = i + 1 > R ? CALL("Tick") : CALL("Ah_" + std::to_string(i + 1));
      kit.def("Ah_" + std::to_string(i), {},
              OUT(t.p(i), SLP(TAU1(SLP(rf.rcall(i + 1, i - 1, t.bot, kit.ck("kc", i - 1))),
                                   anext))));
    }
  } else {
    for (int i = 1; i <= R; ++i) {
      ProcPtr anext = i + 1 > R ? CALL("Tick") : CALL("Ab_" + std::to_string(i + 1));
      kit.def("Ab_" + std::to_string(i), {},
              OUT(t.p(i), SLP(TAU1(SLP(OUT(t.auth(i),
                                           rf.rcall(i + 1, i - 1, t.bot,
                                                    kit.ck("kc", i - 1)))),
                                   anext))));
    }
  }

  DefTablePtr defs = kit.freeze();
  ProtocolInstance inst;
  inst.name = "mutesla-boot";
  inst.variant = variant;
  inst.params = params;
  inst.system = Network::make({NetNode::make("bs", CALL("D_1"), {"m"}),
                               NetNode::make("m", CALL("A_1"), {"bs"})},
                              defs);
  if (agreement) {
    inst.abstraction = Network::make({NetNode::make("bs", CALL("Dh_1"), {"obs"}),
                                      NetNode::make("m", CALL("Ah_1"), {"obs"})},
                                     defs);
  } else {
    inst.abstraction = Network::make({NetNode::make("bs", CALL("Tick"), {}),
                                      NetNode::make("m", CALL("Ab_1"), {"obs"})},
                                     defs);
  }

  // sequence (1), slot-indexed, ambient data included
  {
    TermVec g = ambient_atoms(kit, R + 1);
    g.push_back(t.p(1));
    std::vector<Knowledge> slots;
    slots.push_back(Knowledge::of(g));
    for (int s = 1; s <= params.max_slots; ++s) {
      TermVec add;
      int j = s / 2;
      if (s % 2 == 1) {
        add.push_back(t.w(j + 1, j + 1));
      } else {
        add.push_back(t.auth(j));
        add.push_back(t.p(j + 1));
      }
      slots.push_back(slots.back().union_with(Knowledge::of(add)));
    }
    inst.knowledge = KnowledgeSequence::of(std::move(slots));
  }

  inst.wiring.protocol_nodes = {"m", "bs"};
  inst.wiring.attacker_nodes = {"a", "b"};
  inst.wiring.observed = agreement ? std::set<std::string>{"m", "bs"}
                                   : std::set<std::string>{"m"};
  GapSpec gap;
  gap.what = agreement ? "p_i -> end_i" : "p_i -> auth_i";
  gap.gap = 2;
  gap.first.push_back(nullptr);
  gap.second.push_back(nullptr);
  for (int i = 1; i <= R; ++i) {
    gap.first.push_back(t.p(i));
    gap.second.push_back(agreement ? t.end_(i) : t.auth(i));
  }
  inst.gaps.push_back(std::move(gap));
  inst.atoms = kit.atoms;
  inst.chains = kit.chains;
  return inst;
}

// ---- muTESLA authenticated broadcast ------------------------------------------

struct AuthTerms {
  Kit& kit;
  TermPtr auth_tag;
  std::vector<TermPtr> data;  // payloads d_0 .. d_R

  AuthTerms(Kit& k, int rounds) : kit(k) {
    kit.atom("bs", AtomKind::NodeName);
    auth_tag = kit.atom("auth", AtomKind::Tag);
    kit.atom("bot", AtomKind::Other);
    for (int i = 0; i <= rounds + 1; ++i)
      data.push_back(kit.atom("d" + std::to_string(i), AtomKind::Other));
  }
  // interval i's key sits one above it in the chain; k_BS ("interval -1")
  // is the chain bottom
  TermPtr key(int i) const { return kit.ck("kc", i + 1); }
  TermPtr kbs() const { return kit.ck("kc", 0); }
  TermPtr p(int i) const { return P2T(MACT(data[i], key(i)), data[i]); }
  TermPtr auth(int i) const { return P2T(auth_tag, p(i)); }
};

ProtocolInstance build_mutesla_auth(const std::string& variant, const ProtocolParams& params) {
  if (variant != "integrity")
    throw ModelError("mutesla-auth supports the integrity variant");
  Kit kit;
  AuthTerms t(kit, params.rounds);
  def_tick(kit);
  const int R = params.rounds;
  RFamily rf{"Ra", true, R + 1, t.auth_tag};
  rf.generate(kit);

  for (int i = 1; i <= R; ++i) {
    ProcPtr next = i + 1 > R ? CALL("Tick") : CALL("S_" + std::to_string(i + 1));
    kit.def("S_" + std::to_string(i), {},
            DED({t.data[i], t.key(i)}, "mac", "ui",
                DED({V("ui"), t.data[i]}, "pair", "pi",
                    OUT(V("pi"), SLP(OUT(t.key(i - 1), SLP(next)))), NIL()),
                NIL()));
  }
  // rho_int receiver: R-hat_i = sigma.(tau.sigma.!<auth_{i-1}>.R-hat_{i+1} | R-hat_{i+1})
  for (int i = 1; i <= R; ++i) {
    ProcPtr next = i + 1 > R ? CALL("Tick") : CALL("Rh_" + std::to_string(i + 1));
    ProcPtr z = i - 1 >= 0 ? OUT(t.auth(i - 1), next) : next;
    kit.def("Rh_" + std::to_string(i), {}, SLP(TAU1(SLP(z), next)));
  }

  DefTablePtr defs = kit.freeze();
  ProtocolInstance inst;
  inst.name = "mutesla-auth";
  inst.variant = variant;
  inst.params = params;

  std::vector<std::string> receivers;
  for (int j = 1; j <= params.receivers; ++j) receivers.push_back("m" + std::to_string(j));
  std::vector<NetNode> sys{NetNode::make("bs", CALL("S_1"), receivers)};
  std::vector<NetNode> abs{NetNode::make("bs", CALL("S_1"), {"obs"})};
  for (const auto& rname : receivers) {
    kit.atoms[rname] = Term::atom(rname, AtomKind::NodeName);
    sys.push_back(NetNode::make(
        rname, CALL(rf.rn(1, -1), {Term::atom("bot"), t.kbs()}), {"bs"}));
    abs.push_back(NetNode::make(rname, CALL("Rh_1"), {"obs"}));
  }
  inst.system = Network::make(std::move(sys), defs);
  inst.abstraction = Network::make(std::move(abs), defs);

  // sequence (2)
  {
    TermVec g = ambient_atoms(kit, R + 1);
    g.push_back(t.p(1));
    std::vector<Knowledge> slots;
    slots.push_back(Knowledge::of(g));
    for (int s = 1; s <= params.max_slots; ++s) {
      TermVec add;
      int j = s / 2;
      if (s % 2 == 1) {
        add.push_back(t.key(j));  // k_j disclosed in the second half of interval j+1
      } else {
        add.push_back(t.p(j + 1));
        add.push_back(t.auth(j - 1));
      }
      slots.push_back(slots.back().union_with(Knowledge::of(add)));
    }
    inst.knowledge = KnowledgeSequence::of(std::move(slots));
  }

  inst.wiring.protocol_nodes.push_back("bs");
  inst.wiring.attacker_nodes.push_back("b");
  inst.wiring.observed.insert("bs");
  for (int j = 1; j <= params.receivers; ++j) {
    inst.wiring.protocol_nodes.push_back("m" + std::to_string(j));
    inst.wiring.attacker_nodes.push_back("a" + std::to_string(j));
    inst.wiring.observed.insert("m" + std::to_string(j));
  }
  GapSpec gap;
  gap.what = "p_i -> auth_i";
  gap.gap = 4;
  gap.first.push_back(nullptr);
  gap.second.push_back(nullptr);
  for (int i = 1; i <= R; ++i) {
    gap.first.push_back(t.p(i));
    gap.second.push_back(t.auth(i));
  }
  inst.gaps.push_back(std::move(gap));
  inst.atoms = kit.atoms;
  inst.chains = kit.chains;
  return inst;
}

// ---- LEAP+ --------------------------------------------------------------------

struct LeapTerms {
  Kit& kit;
  TermPtr m, r, hello, end_tag, auth_tag, kin, n0, bot;

  explicit LeapTerms(Kit& k) : kit(k) {
    m = kit.atom("m", AtomKind::NodeName);
    r = kit.atom("r", AtomKind::NodeName);
    hello = kit.atom("hello", AtomKind::Tag);
    end_tag = kit.atom("end", AtomKind::Tag);
    auth_tag = kit.atom("auth", AtomKind::Tag);
    kin = kit.atom("kin", AtomKind::BaseKey);
    n0 = kit.atom("n0", AtomKind::Nonce);
    bot = kit.atom("bot", AtomKind::Other);
  }
  TermPtr kr() const { return PRFT(kin, r); }
  TermPtr nonce(int i) const {
    TermPtr n = n0;
    for (int j = 0; j < i; ++j) n = PRFT(n, m);
    return n;
  }
  TermPtr hello_(int i) const { return P2T(hello, P2T(m, nonce(i))); }
  TermPtr q(int i) const { return P2T(r, MACT(kr(), P2T(r, nonce(i)))); }
  TermPtr end_(int i) const { return P2T(end_tag, nonce(i)); }
  TermPtr auth(int i) const { return P2T(auth_tag, P2T(m, nonce(i))); }
};

ProtocolInstance build_leap(const std::string& variant, const ProtocolParams& params) {
  bool agreement = variant == "agreement";
  Kit kit;
  LeapTerms t(kit);
  def_tick(kit);
  const int R = params.rounds;

  auto scall = [&](int i) { return i > R ? CALL("Tick") : CALL("S_" + std::to_string(i)); };

  for (int i = 1; i <= R; ++i) {
    ProcPtr retry = SLP(scall(i + 1));
    ProcPtr p4 = agreement
                     ? SLP(NIL())
                     : SLP(DED({t.auth_tag, V("tt")}, "pair", "a2", OUT(V("a2"), NIL()),
                               NIL()));
    ProcPtr p3 = DED({V("kr"), t.m}, "prf", "kmr", p4, NIL());
    ProcPtr p2 = DED({V("q")}, "snd", "h",
                     DED({V("rr"), V("ni")}, "pair", "t2",
                         DED({t.kin, V("rr")}, "prf", "kr",
                             DED({V("kr"), V("t2")}, "mac", "h2",
                                 MAT(V("h2"), V("h"), p3, retry), NIL()),
                             NIL()),
                         NIL()),
                     NIL());
    ProcPtr p1 = DED({V("q")}, "fst", "rr", p2, retry);
    ProcPtr pwait = RCV("q", p1, scall(i + 1));
    kit.def("S_" + std::to_string(i), {},
            DED({t.nonce(i - 1), t.m}, "prf", "ni",
                DED({t.m, V("ni")}, "pair", "tt",
                    DED({t.hello, V("tt")}, "pair", "p", OUT(V("p"), SLP(pwait)), NIL()),
                    NIL()),
                NIL()));
  }

  {
    // responder (single time-guarded recursive definition)
    ProcPtr missR = SLP(SLP(CALL("R")));
    ProcPtr r6 = agreement
                     ? SLP(DED({t.end_tag, V("nn")}, "pair", "e", OUT(V("e"), NIL()), NIL()))
                     : SLP(NIL());
    ProcPtr r5 = DED({t.kr(), V("mm")}, "prf", "kmr", r6, NIL());
    ProcPtr r4 = DED({V("p2")}, "snd", "nn",
                     DED({t.r, V("nn")}, "pair", "tt",
                         DED({t.kr(), V("tt")}, "mac", "h",
                             DED({t.r, V("h")}, "pair", "qq",
                                 SLP(OUT(V("qq"), r5)), NIL()),
                             NIL()),
                         NIL()),
                     NIL());
    ProcPtr r3 = DED({V("p2")}, "fst", "mm", r4, missR);
    ProcPtr r2 = DED({V("p")}, "snd", "p2", MAT(V("p1"), t.hello, r3, missR), NIL());
    ProcPtr r1 = DED({V("p")}, "fst", "p1", r2, missR);
    kit.def("R", {}, RCV("p", r1, SLP(CALL("R"))));
  }

  // abstractions
  if (agreement) {
    for (int i = 1; i <= R; ++i) {
      ProcPtr snext = i + 1 > R ? CALL("Tick") : CALL("Sb_" + std::to_string(i + 1));
      kit.def("Sb_" + std::to_string(i), {},
              OUT(t.hello_(i), SLP(TAU1(SLP(NIL()), snext))));
      ProcPtr rnext = i + 1 > R ? CALL("Tick") : CALL("Rb_" + std::to_string(i + 1));
      kit.def("Rb_" + std::to_string(i), {},
              TAU1(SLP(OUT(t.q(i), SLP(OUT(t.end_(i), NIL())))), SLP(rnext)));
    }
  } else {
    for (int i = 1; i <= R; ++i) {
      ProcPtr snext = i + 1 > R ? CALL("Tick") : CALL("Sh_" + std::to_string(i + 1));
      kit.def("Sh_" + std::to_string(i), {},
              OUT(t.hello_(i), SLP(TAU1(SLP(OUT(t.auth(i), NIL())), snext))));
    }
  }

  DefTablePtr defs = kit.freeze();
  ProtocolInstance inst;
  inst.name = "leap";
  inst.variant = variant;
  inst.params = params;
  inst.system = Network::make({NetNode::make("m", CALL("S_1"), {"r"}),
                               NetNode::make("r", CALL("R"), {"m"})},
                              defs);
  if (agreement) {
    inst.abstraction = Network::make({NetNode::make("m", CALL("Sb_1"), {"obs"}),
                                      NetNode::make("r", CALL("Rb_1"), {"obs"})},
                                     defs);
  } else {
    inst.abstraction = Network::make({NetNode::make("m", CALL("Sh_1"), {"obs"}),
                                      NetNode::make("r", CALL("Tick"), {})},
                                     defs);
  }

  // sequence (3)
  {
    TermVec g = ambient_atoms(kit, 2);
    g.push_back(t.hello_(1));
    std::vector<Knowledge> slots;
    slots.push_back(Knowledge::of(g));
    for (int s = 1; s <= params.max_slots; ++s) {
      TermVec add;
      int j = s / 2;
      if (s % 2 == 1) {
        add.push_back(MACT(t.kr(), P2T(t.r, t.nonce(j + 1))));
      } else {
        add.push_back(t.hello_(j + 1));
        add.push_back(t.auth(j));
      }
      slots.push_back(slots.back().union_with(Knowledge::of(add)));
    }
    inst.knowledge = KnowledgeSequence::of(std::move(slots));
  }

  inst.wiring.protocol_nodes = {"m", "r"};
  inst.wiring.attacker_nodes = {"a", "b"};
  inst.wiring.observed =
      agreement ? std::set<std::string>{"m", "r"} : std::set<std::string>{"m"};
  GapSpec gap;
  gap.what = agreement ? "hello_i -> end_i" : "hello_i -> auth_i";
  gap.gap = 2;
  gap.first.push_back(nullptr);
  gap.second.push_back(nullptr);
  for (int i = 1; i <= R; ++i) {
    gap.first.push_back(t.hello_(i));
    gap.second.push_back(agreement ? t.end_(i) : t.auth(i));
  }
  inst.gaps.push_back(std::move(gap));
  inst.atoms = kit.atoms;
  inst.chains = kit.chains;
  return inst;
}

// ---- LiSP ----------------------------------------------------------------------

struct LispTerms {
  Kit& kit;
  const ProtocolParams& params;
  TermPtr m, kl, request, initkey, updatekey, auth_tag, kksm, bot;

  LispTerms(Kit& k, const ProtocolParams& p) : kit(k), params(p) {
    m = kit.atom("m", AtomKind::NodeName);
    kl = kit.atom("kl", AtomKind::NodeName);
    request = kit.atom("RequestKey", AtomKind::Tag);
    initkey = kit.atom("InitKey", AtomKind::Tag);
    updatekey = kit.atom("UpdateKey", AtomKind::Tag);
    auth_tag = kit.atom("auth", AtomKind::Tag);
    kksm = kit.atom("kKSm", AtomKind::BaseKey);
    bot = kit.atom("bot", AtomKind::Other);
  }
  TermPtr key(int i) const { return kit.ck("kc", i); }
  TermPtr rq() const { return P2T(request, m); }
  TermPtr q(int i) const {
    return P2T(initkey, P2T(ENCT(kksm, key(params.buffer_size + i)),
                            HASHT(key(params.buffer_size + i))));
  }
  TermPtr auth(int i) const { return P2T(auth_tag, key(params.buffer_size + i)); }
};

ProtocolInstance build_lisp(const std::string& variant, const ProtocolParams& params) {
  bool full = variant == "full";
  if (!full && variant != "integrity")
    throw ModelError("lisp supports the integrity and full variants");
  Kit kit;
  LispTerms t(kit, params);
  def_tick(kit);
  const int R = params.rounds;
  const int s = params.buffer_size;

  auto lcall = [&](int i) { return i > R ? CALL("Tick") : CALL("L_" + std::to_string(i)); };
  auto rl = [&](int l) { return "Rl_" + std::to_string(l); };

  for (int i = 0; i <= R; ++i) {
    // listener round: a request received while in L_i is served by I_{i+1}
    int k = i + 1;
    ProcPtr miss = SLP(SLP(lcall(k + 1)));
    ProcPtr i2 = DED({V("rq2")}, "snd", "mm",
                     DED({t.kksm, t.key(s + k)}, "enc", "wi",
                         DED({t.key(s + k)}, "hash", "hi",
                             DED({V("wi"), V("hi")}, "pair", "ri",
                                 DED({t.initkey, V("ri")}, "pair", "qi",
                                     SLP(OUT(V("qi"), SLP(lcall(k + 1)))), NIL()),
                                 NIL()),
                             NIL()),
                         NIL()),
                     NIL());
    ProcPtr i1 = MAT(V("r1"), t.request, i2, miss);
    ProcPtr ii = DED({V("rq2")}, "fst", "r1", i1, miss);
    kit.def("L_" + std::to_string(i), {}, RCV("rq2", ii, SLP(lcall(i + 1))));
  }

  // node buffer states R(k_c, k_l, l), generated per l
  for (int l = 0; l <= s - 1; ++l) {
    ProcPtr fproc = l == 0 ? CALL("Z")
                           : SLP(CALL(rl(l - 1), {FN(V("kl2"), l - 1), V("kl2")}));
    ProcPtr e4 = SLP(SLP(CALL(rl(s - 1), {FN(V("k2"), s - 1), V("k2")})));
    ProcPtr e = DED({V("u")}, "fst", "u1",
                    MAT(V("u1"), t.updatekey,
                        DED({V("u")}, "snd", "u2",
                            DED({V("kc2"), V("u2")}, "dec", "k2",
                                MAT(FN(V("k2"), s - l), V("kl2"), e4, SLP(fproc)),
                                SLP(fproc)),
                            NIL()),
                        SLP(fproc)),
                    SLP(fproc));
    kit.def(rl(l), {"kc2", "kl2"}, RCV("u", e, fproc));
  }

  {
    // reconfiguration at node m, with the observable auth signal (Z')
    ProcPtr t4 = SLP(DED({t.auth_tag, V("kv")}, "pair", "a2",
                         OUT(V("a2"), SLP(CALL(rl(s - 1), {FN(V("kv"), s - 1), V("kv")}))),
                         NIL()));
    ProcPtr t3 = DED({V("kv")}, "hash", "h2",
                     MAT(V("h2"), V("hv"), t4, SLP(CALL("Z"))), NIL());
    ProcPtr t2 = DED({V("q")}, "snd", "q2",
                     DED({V("q2")}, "fst", "wv",
                         DED({V("q2")}, "snd", "hv",
                             DED({t.kksm, V("wv")}, "dec", "kv", t3, SLP(CALL("Z"))),
                             NIL()),
                         NIL()),
                     NIL());
    ProcPtr tq = DED({V("q")}, "fst", "q1",
                     MAT(V("q1"), t.initkey, t2, SLP(CALL("Z"))), SLP(CALL("Z")));
    kit.def("Z", {},
            DED({t.request, t.m}, "pair", "rq2",
                OUT(V("rq2"), SLP(RCV("q", tq, CALL("Z")))), NIL()));
  }

  if (full) {
    kit.atoms["kd"] = Term::atom("kd", AtomKind::NodeName);
    kit.def("Dk_0", {}, SLP(CALL("Dk_1")));
    for (int i = 1; i <= R; ++i) {
      ProcPtr next = i + 1 > R ? CALL("Tick") : CALL("Dk_" + std::to_string(i + 1));
      kit.def("Dk_" + std::to_string(i), {},
              DED({t.key(i), t.key(s + i)}, "enc", "ti",
                  DED({t.updatekey, V("ti")}, "pair", "ui",
                      OUT(V("ui"), SLP(SLP(next))), NIL()),
                  NIL()));
    }
  }

  // rho_int abstraction; the auth signal sits two sigmas after the InitKey
  // reply, the paper's stated bound (Prop 6.1)
  for (int i = 1; i <= R; ++i) {
    ProcPtr znext = i + 1 > R ? CALL("Tick") : CALL("Zh_" + std::to_string(i + 1));
    kit.def("Zh_" + std::to_string(i), {},
            OUT(t.rq(),
                SLP(TAU1(SLP(SLP(OUT(t.auth(i),
                                     SLP(CALL(rl(s - 1), {t.key(i + 1), t.key(s + i)}))))),
                         znext))));
    ProcPtr lnext = i + 1 > R ? CALL("Tick") : CALL("Lh_" + std::to_string(i + 1));
    kit.def("Lh_" + std::to_string(i), {},
            TAU1(SLP(OUT(t.q(i), SLP(lnext))), SLP(lnext)));
  }

  DefTablePtr defs = kit.freeze();
  ProtocolInstance inst;
  inst.name = "lisp";
  inst.variant = variant;
  inst.params = params;
  std::vector<NetNode> sys{
      NetNode::make("kl", CALL("L_0"), full ? std::vector<std::string>{"m"}
                                            : std::vector<std::string>{"m"}),
      NetNode::make("m", CALL("Z"), full ? std::vector<std::string>{"kl", "kd"}
                                         : std::vector<std::string>{"kl"})};
  if (full) sys.push_back(NetNode::make("kd", CALL("Dk_0"), {"m"}));
  inst.system = Network::make(std::move(sys), defs);
  inst.abstraction = Network::make({NetNode::make("m", CALL("Zh_1"), {"obs"}),
                                    NetNode::make("kl", CALL("Lh_1"), {"obs"})},
                                   defs);

  inst.wiring.protocol_nodes = {"m", "kl"};
  inst.wiring.attacker_nodes = {"a", "b"};
  inst.wiring.observed = {"m", "kl"};
  if (full) {
    inst.wiring.protocol_nodes.push_back("kd");
    inst.wiring.attacker_nodes.push_back("c");
    inst.wiring.observed.insert("kd");
  }

  // the paper supplies no knowledge sequence for LiSP; record the wired
  // system's own broadcasts per slot
  {
    TgndcBounds b;
    b.max_sigma = params.max_slots;
    Knowledge seed = Knowledge::of({});
    inst.knowledge = derive_knowledge_sequence(inst.system, inst.wiring, seed,
                                               ambient_atoms(kit, s + R + 1), b);
  }

  GapSpec gap;
  gap.what = "q_i -> auth_i";
  gap.gap = 2;
  gap.first.push_back(nullptr);
  gap.second.push_back(nullptr);
  for (int i = 1; i <= R; ++i) {
    gap.first.push_back(t.q(i));
    gap.second.push_back(t.auth(i));
  }
  inst.gaps.push_back(std::move(gap));
  inst.atoms = kit.atoms;
  inst.chains = kit.chains;
  inst.notes.push_back(
      "paper-internal discrepancy: the replay-attack narrative says the auth "
      "signal trails the InitKey reply by four sigma-actions, its exhibited "
      "trace contains three; the trace is adopted as ground truth");
  return inst;
}

}  // namespace

std::vector<std::string> protocol_names() {
  return {"mutesla-boot", "mutesla-auth", "leap", "lisp"};
}

std::vector<std::string> protocol_variants(const std::string& name) {
  if (name == "mutesla-boot" || name == "leap") return {"agreement", "integrity"};
  if (name == "mutesla-auth") return {"integrity"};
  if (name == "lisp") return {"integrity", "full"};
  throw ModelError("unknown protocol " + name);
}

ProtocolInstance build_protocol(const std::string& name, const std::string& variant,
                                const ProtocolParams& params) {
  validate_params(params);
  if (name == "mutesla-boot") return build_mutesla_boot(variant, params);
  if (name == "mutesla-auth") return build_mutesla_auth(variant, params);
  if (name == "leap") return build_leap(variant, params);
  if (name == "lisp") return build_lisp(variant, params);
  throw ModelError("unknown protocol " + name);
}

Network scripted_attacker(const std::string& name) {
  auto fwd = [](const std::string& x) {
    return RCV(x, SLP(OUT(V(x), NIL())), NIL());
  };
  if (name == "mutesla-boot" || name == "leap") {
    std::string peer = name == "leap" ? "r" : "bs";
    return Network::make({NetNode::make("a", fwd("x"), {"m", "b"}),
                          NetNode::make("b", SLP(fwd("y")), {peer, "a"})},
                         nullptr);
  }
  if (name == "lisp") {
    return Network::make({NetNode::make("a", SLP(SLP(fwd("x"))), {"m", "b"}),
                          NetNode::make("b", SLP(fwd("y")), {"kl", "a"})},
                         nullptr);
  }
  throw ModelError("no scripted attacker for " + name);
}

namespace {

Label obs1(TermPtr w) { return Label::obs(w, {"obs"}); }
Label SIG() { return Label::sigma(); }
Label TAU() { return Label::tau(); }

int gap_between(const Trace& t, const Label& a, const Label& b) {
  int i = -1, j = -1;
  for (int k = 0; k < static_cast<int>(t.steps.size()); ++k) {
    if (i < 0 && t.steps[k] == a) i = k;
    if (i >= 0 && j < 0 && k > i && t.steps[k] == b) j = k;
  }
  if (i < 0 || j < 0) throw ModelError("gap markers not found in trace");
  int n = 0;
  for (int k = i + 1; k < j; ++k)
    if (t.steps[k].kind == Label::Kind::Sigma) ++n;
  return n;
}

}  // namespace

AttackReport replay_attack(const std::string& name, const ProtocolParams& params) {
  AttackReport rep;
  std::string variant;
  std::string property;
  if (name == "mutesla-boot" || name == "leap") {
    variant = "agreement";
    property = "timed agreement";
  } else if (name == "lisp") {
    variant = "integrity";
    property = "timed integrity";
  } else {
    throw ModelError("no replay attack scripted for " + name);
  }
  ProtocolInstance inst = build_protocol(name, variant, params);

  AttackerWiring wiring = inst.wiring;
  wiring.observed.clear();
  for (const auto& n : wiring.protocol_nodes) wiring.observed.insert(n);
  Network wired = wire_observed(inst.system, wiring);
  rep.composition = compose(wired, scripted_attacker(name));

  Label first, second;
  if (name == "mutesla-boot") {
    Kit kit;
    BootTerms t(kit);
    rep.golden.steps = {obs1(t.p(1)), SIG(), TAU(),          SIG(), TAU(),
                        obs1(t.p(2)), SIG(), obs1(t.w(2, 1)), SIG(), obs1(t.end_(1))};
    first = obs1(t.p(1));
    second = obs1(t.end_(1));
  } else if (name == "leap") {
    Kit kit;
    LeapTerms t(kit);
    rep.golden.steps = {obs1(t.hello_(1)), SIG(), TAU(),        SIG(), TAU(),
                        obs1(t.hello_(2)), SIG(), obs1(t.q(1)), SIG(), obs1(t.end_(1))};
    first = obs1(t.hello_(1));
    second = obs1(t.end_(1));
  } else {
    Kit kit;
    LispTerms t(kit, params);
    rep.golden.steps = {obs1(t.rq()), SIG(), obs1(t.q(1)), SIG(), TAU(),
                        obs1(t.rq()), SIG(), TAU(),        SIG(), obs1(t.auth(1))};
    first = obs1(t.q(1));
    second = obs1(t.auth(1));
  }

  LtsCtx cctx(rep.composition.defs);
  if (run_trace(rep.composition, rep.golden, cctx).states.empty())
    throw ModelError("attack regression: the golden trace no longer replays on " + name);
  LtsCtx actx(inst.abstraction.defs);
  bool rejected = run_trace(inst.abstraction, rep.golden, actx).states.empty();

  rep.observed_gap = gap_between(rep.golden, first, second);
  rep.specified_gap = inst.gaps.at(0).gap;
  rep.instance = inst;

  rep.report.title = "attack " + name;
  std::ostringstream v;
  v << property << " broken: " << inst.gaps.at(0).what << " gap " << rep.observed_gap
    << " > specified " << rep.specified_gap;
  rep.report.violations.push_back(v.str());
  rep.report.verdict = Verdict::Fail;
  rep.report.notes.push_back("golden trace replays on the attacked system: yes");
  rep.report.notes.push_back(std::string("abstraction rejects the trace: ") +
                             (rejected ? "yes" : "NO"));
  if (!rejected)
    rep.report.violations.push_back("abstraction unexpectedly admits the attack trace");
  for (const auto& n : inst.notes) rep.report.notes.push_back(n);
  return rep;
}

std::vector<TgndcPart> decompose_per_node(const ProtocolInstance& inst) {
  std::vector<TgndcPart> parts;
  for (const auto& n : inst.system.nodes) {
    const NetNode* spec_node = inst.abstraction.find(n.name);
    if (!spec_node)
      throw ModelError("abstraction has no node " + n.name + "; cannot decompose");
    TgndcPart part;
    part.name = inst.name + "/" + inst.variant + ":" + n.name;
    part.system = Network::make({NetNode::make(n.name, n.proc, {})}, inst.system.defs);
    part.spec = Network::make(
        {NetNode::make(n.name, spec_node->proc, spec_node->neighbors)},
        inst.abstraction.defs);
    if (inst.wiring.observed.count(n.name)) part.observed.insert(n.name);
    parts.push_back(std::move(part));
  }
  return parts;
}

CheckReport check_sigma_gaps(const ProtocolInstance& inst, int rounds, int max_sigma) {
  CheckReport rep;
  rep.title = "sigma-gap suite " + inst.name + "/" + inst.variant;
  LtsCtx ctx(inst.abstraction.defs);
  StateGraph g = explore(inst.abstraction, max_sigma, ctx);
  if (!g.complete) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back("exploration incomplete");
    return rep;
  }
  // forward adjacency
  std::vector<std::vector<int>> out_edges(g.states.size());
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
    out_edges[g.edges[e].from].push_back(e);

  for (const auto& gap : inst.gaps) {
    int upto = std::min<int>(rounds, static_cast<int>(gap.first.size()) - 1);
    for (int i = 1; i <= upto; ++i) {
      Label first = obs1(gap.first[i]);
      Label second = obs1(gap.second[i]);
      std::set<int> seen_gaps;
      for (const auto& e : g.edges) {
        if (!(e.label == first)) continue;
        // sigma-counting BFS from the state right after the first marker
        std::set<std::pair<int, int>> visited;
        std::deque<std::pair<int, int>> work{{e.to, 0}};
        visited.insert({e.to, 0});
        while (!work.empty()) {
          auto [st, sc] = work.front();
          work.pop_front();
          for (int eid : out_edges[st]) {
            const auto& e2 = g.edges[eid];
            int sc2 = sc + (e2.label.kind == Label::Kind::Sigma ? 1 : 0);
            if (sc2 > max_sigma) continue;
            if (e2.label == second) seen_gaps.insert(sc);
            if (visited.insert({e2.to, sc2}).second) work.push_back({e2.to, sc2});
          }
        }
      }
      if (seen_gaps.empty()) {
        rep.violations.push_back("round " + std::to_string(i) + " (" + gap.what +
                                 "): pair never observed within the bound");
      } else {
        for (int gobs : seen_gaps)
          if (gobs != gap.gap)
            rep.violations.push_back("round " + std::to_string(i) + " (" + gap.what +
                                     "): observed gap " + std::to_string(gobs) +
                                     " != " + std::to_string(gap.gap));
      }
    }
    rep.notes.push_back(gap.what + ": expected gap " + std::to_string(gap.gap) +
                        " over " + std::to_string(rounds) + " rounds");
  }
  rep.verdict = rep.violations.empty() ? Verdict::Ok : Verdict::Fail;
  return rep;
}

}  // namespace atcws
