#pragma once

#include <unordered_map>
#include <vector>

#include "atcws/process.hpp"

namespace atcws {

// Labelled transition semantics. step() produces raw labels; observe()
// applies the top-level (Shh)/(Obs) rules: a broadcast that reaches no
// environment node becomes tau, otherwise the sender name is erased and
// the environment receiver set stays in the label.

struct Label {
  enum class Kind { Tau, Sigma, Bcast, Input, ObsBcast };

  Kind kind = Kind::Tau;
  std::string sender;                  // Bcast, Input
  TermPtr payload = nullptr;           // Bcast, Input, ObsBcast
  std::vector<std::string> receivers;  // Bcast/ObsBcast: env receivers, sorted

  static Label tau() { return {}; }
  static Label sigma() { return {Kind::Sigma, "", nullptr, {}}; }
  static Label bcast(std::string sender, TermPtr w, std::vector<std::string> recvs);
  static Label input(std::string sender, TermPtr w);
  static Label obs(TermPtr w, std::vector<std::string> recvs);

  bool operator==(const Label&) const = default;
  std::string text() const;  // trace-file line
};

bool label_less(const Label& a, const Label& b);

struct Trace {
  std::vector<Label> steps;
};

int sigma_count(const Trace& t);
std::string trace_to_text(const Trace& t);

struct InputCandidate {
  std::string sender;
  TermPtr payload = nullptr;
};
// indexed by sigma depth; missing slots mean "no environment inputs"
using SlotCandidates = std::vector<std::vector<InputCandidate>>;

// Resolution of a process to its action head, evaluating matching,
// deduction and recursion on the way ((Then)/(Else)/(DedTrue)/(DedFalse)/
// (Rec) derive the label from the resolved process).
struct Resolved {
  enum class Head { Nil, Bang, Rcv, Sum, Sleep };
  Head head = Head::Nil;
  TermPtr payload = nullptr;  // Bang
  ProcPtr cont = nullptr;     // Bang, Sleep
  std::string binder;         // Rcv
  ProcPtr body = nullptr;     // Rcv
  ProcPtr timeout = nullptr;  // Rcv, Sum
  ProcVec branches;           // Sum
};

struct LtsCtx {
  DefTablePtr defs;
  int fuel = 100000;  // resolution guard for ill-founded recursion
  std::unordered_map<ProcPtr, Resolved> memo;
  std::unordered_map<ProcPtr, ProcPtr> normal_memo;
  // Nodes whose internal-choice send branches fire in one step (the top
  // attacker's transition schema: broadcast any candidate and return, or
  // sigma into the next slot). Empty for ordinary models.
  std::set<std::string> direct_send;

  explicit LtsCtx(DefTablePtr d) : defs(std::move(d)) {}
};

const Resolved& resolve(ProcPtr p, LtsCtx& ctx);

// Head-normal form: matching, deduction and unfolding prefixes evaluated
// away. Transitions factor through the resolved process, so states are
// canonicalized this way during exploration (junk that fails every guard
// stops distinguishing states).
ProcPtr head_normal(ProcPtr p, LtsCtx& ctx);
Network normal_form(const Network& m, LtsCtx& ctx);

using Step = std::pair<Label, Network>;

// Exact successor set of the SOS rules under the closed-system input
// policy: inputs only from the supplied candidates, lossy reception by
// enumerating every receive/miss split, sigma enabled iff no node sits at
// a top-level broadcast. Deterministically ordered.
std::vector<Step> step(const Network& m, LtsCtx& ctx,
                       const std::vector<InputCandidate>& inputs = {});

Label observe(const Label& l);

// Canonical state key (nodes are interned and name-sorted).
std::string state_key(const Network& m);

struct WeakResult {
  std::vector<Network> states;
  bool truncated = false;  // tau closure hit the bound
};

// M ==alpha==> closure over observed labels; alpha = tau gives plain =>.
WeakResult weak_step(const Network& m, const Label& alpha, LtsCtx& ctx, int bound = 100000);

// Composed weak steps of Def 3.6; empty result means the trace is not
// executable from m.
WeakResult run_trace(const Network& m, const Trace& t, LtsCtx& ctx, int bound = 100000);

struct StateGraph {
  struct Edge {
    int from;
    Label label;
    int to;
  };
  std::vector<Network> states;
  std::vector<int> sigma_depth;
  std::vector<Edge> edges;
  int initial = 0;
  bool complete = true;

  std::string to_dot() const;
};

StateGraph explore(const Network& m, int max_sigma, LtsCtx& ctx,
                   const SlotCandidates& candidates = {}, std::size_t state_budget = 2000000);

}  // namespace atcws
