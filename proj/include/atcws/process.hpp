#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "atcws/report.hpp"
#include "atcws/term.hpp"

namespace atcws {

// Process and network syntax. Processes are hash-consed like terms;
// internal-choice branches are kept sorted, and network node lists are
// kept sorted by node name, so the commutative-monoid part of structural
// congruence is a plain pointer/field comparison.

struct Process;
using ProcPtr = const Process*;
using ProcVec = std::vector<ProcPtr>;

struct Process {
  enum class Kind { Nil, Bang, RcvTimeout, SumTimeout, Sleep, Match, Deduce, Call };

  Kind kind;
  TermPtr payload = nullptr;   // Bang
  ProcPtr cont = nullptr;      // Bang, Sleep
  std::string binder;          // RcvTimeout, Deduce
  ProcPtr body = nullptr;      // RcvTimeout
  ProcPtr timeout = nullptr;   // RcvTimeout, SumTimeout
  ProcVec branches;            // SumTimeout (sorted, non-empty)
  TermPtr left = nullptr;      // Match
  TermPtr right = nullptr;     // Match
  TermVec premises;            // Deduce
  std::string rule;            // Deduce
  ProcPtr then_p = nullptr;    // Match, Deduce
  ProcPtr else_p = nullptr;    // Match, Deduce
  std::string name;            // Call
  TermVec args;                // Call
  std::size_t hash = 0;

  static ProcPtr nil();
  static ProcPtr bang(TermPtr payload, ProcPtr cont);
  static ProcPtr recv(const std::string& binder, ProcPtr body, ProcPtr timeout);
  static ProcPtr sum(ProcVec branches, ProcPtr timeout);
  static ProcPtr sleep(ProcPtr cont);
  static ProcPtr match(TermPtr l, TermPtr r, ProcPtr then_p, ProcPtr else_p);
  static ProcPtr deduce(TermVec premises, const std::string& rule,
                        const std::string& binder, ProcPtr then_p, ProcPtr else_p);
  static ProcPtr call(const std::string& name, TermVec args);
};

// Structural total order (terms by canonical text); 0 on equality.
int proc_compare(ProcPtr a, ProcPtr b);

struct ProcessDef {
  std::string name;
  std::vector<std::string> params;
  ProcPtr body = nullptr;

  bool operator==(const ProcessDef&) const = default;
};

using DefTable = std::map<std::string, ProcessDef>;
using DefTablePtr = std::shared_ptr<const DefTable>;

struct NetNode {
  std::string name;
  ProcPtr proc = nullptr;
  std::vector<std::string> neighbors;  // sorted, unique, never contains name

  static NetNode make(const std::string& name, ProcPtr proc,
                      std::vector<std::string> neighbors);
};

struct Network {
  std::vector<NetNode> nodes;  // sorted by name
  DefTablePtr defs;

  static Network make(std::vector<NetNode> nodes, DefTablePtr defs);
  static Network empty();
  const NetNode* find(const std::string& name) const;
};

// Parallel composition; definition tables must agree on shared names.
Network compose(const Network& a, const Network& b);

bool network_equal(const Network& a, const Network& b);

// Capture-avoiding substitution of a message for a free variable;
// rebinding of the same name shadows.
TermPtr substitute_term(TermPtr t, const std::string& binder, TermPtr w);
ProcPtr substitute(ProcPtr p, const std::string& binder, TermPtr w);
ProcPtr substitute_all(ProcPtr p, const std::map<std::string, TermPtr>& env);

void free_vars(ProcPtr p, std::set<std::string>& out);

struct Topology {
  std::set<std::string> nds;
  std::map<std::string, std::set<std::string>> ngh;
  std::set<std::string> env;
};

Topology topology(const Network& m);
const std::set<std::string>& neighbors_of(const Topology& t, const std::string& node);

// Def 2.3: unique names, symmetric in-network neighbouring, connectivity.
// Out-of-network neighbour names (observers, attacker slots) are exempt
// from symmetry and connect nodes that share them; they are listed in the
// report notes.
CheckReport check_well_formed(const Network& m);

// Table 4 msg function: every message that syntactically appears in the
// network, unwinding each recursive definition once.
TermVec msg_of(const Network& m);
TermVec msg_of_process(ProcPtr p, const DefTable& defs);

// Prc_wt: finite sums (structural) and time-guarded recursion, checked as
// acyclicity of the unguarded-call graph over the definition table.
bool is_well_timed_syntax(const Network& m);

// Structural congruence restricted to monoid laws and bounded top-level
// definition unfolding.
bool struct_congruent(const Network& a, const Network& b, int unfold_bound = 8);

}  // namespace atcws
