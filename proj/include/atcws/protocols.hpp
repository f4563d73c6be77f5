#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "atcws/tgndc.hpp"

namespace atcws {

// Executable encodings of the bundled key-management protocols, their
// observable abstractions, knowledge sequences, scripted replay attackers
// and the replay-attack driver.

struct ProtocolParams {
  int chain_length = 8;  // n
  int buffer_size = 3;   // s (lisp)
  int receivers = 1;     // h (mutesla-auth)
  int rounds = 8;        // generated definition-family length
  int max_slots = 12;    // knowledge sequence length
};

struct GapSpec {
  std::string what;          // e.g. "p_i -> auth_i"
  std::vector<TermPtr> first;   // indexed by round, 1-based (index 0 unused)
  std::vector<TermPtr> second;  // ditto
  int gap = 2;
};

struct ProtocolInstance {
  std::string name;
  std::string variant;
  ProtocolParams params;
  Network system;
  Network abstraction;
  KnowledgeSequence knowledge;
  AttackerWiring wiring;  // the analysis wiring (attackers a, b, ...)
  std::vector<GapSpec> gaps;
  std::map<std::string, TermPtr> atoms;  // term scope for the DSL / traces
  std::set<std::string> chains;
  std::vector<std::string> notes;  // analysis caveats carried into reports
};

std::vector<std::string> protocol_names();
std::vector<std::string> protocol_variants(const std::string& name);

// Faithful transcription of the protocol tables with the named variant;
// abstractions per the rho definitions.
ProtocolInstance build_protocol(const std::string& name, const std::string& variant,
                                const ProtocolParams& params = {});

// The two-node store-and-forward attackers exhibited in the replay-attack
// proofs; name is one of mutesla-boot, leap, lisp.
Network scripted_attacker(const std::string& name);

struct AttackReport {
  CheckReport report;      // verdict Fail = attack reproduced, property broken
  Trace golden;            // the exhibited execution trace
  Network composition;     // wired system | scripted attacker
  ProtocolInstance instance;
  int observed_gap = 0;
  int specified_gap = 0;
};

AttackReport replay_attack(const std::string& name, const ProtocolParams& params = {});

// Exhaustive sigma-gap check of an abstraction: every first[i] emission is
// followed by second[i] after exactly gap sigmas, for rounds many i.
CheckReport check_sigma_gaps(const ProtocolInstance& inst, int rounds, int max_sigma);

// Per-node decomposition for the compositional criterion, mirroring the
// verification lemmas: each protocol node in isolation against the
// matching abstraction node.
std::vector<TgndcPart> decompose_per_node(const ProtocolInstance& inst);

}  // namespace atcws
