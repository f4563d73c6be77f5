#pragma once

#include <map>
#include <optional>
#include <set>

#include "atcws/deduce.hpp"
#include "atcws/equivalence.hpp"
#include "atcws/lts.hpp"

namespace atcws {

// The tGNDC security framework: attacker/observer wiring, knowledge
// sequences, top-attacker synthesis and the criterion check
// "wired system | top attacker <~ specification".

struct KnowledgeSequence {
  enum class Extension { Constant, Generated };

  std::vector<Knowledge> slots;  // monotone; index = sigma count
  Extension extension = Extension::Constant;

  static KnowledgeSequence of(std::vector<Knowledge> slots,
                              Extension ext = Extension::Constant);
  const Knowledge& at(int j) const;
  int size() const { return static_cast<int>(slots.size()); }
};

struct AttackerWiring {
  std::vector<std::string> protocol_nodes;  // the P, ordered
  std::vector<std::string> attacker_nodes;  // the A, positionally paired
  std::set<std::string> observed;           // O, subset of P

  void validate(const Network& m) const;
  std::string attacker_for(const std::string& protocol_node) const;
};

// Derives the wiring of Def 3.4: in-network links kept, each node gains
// its dedicated attacker, observed nodes additionally see obs.
Network wire_observed(const Network& m, const AttackerWiring& w);

// Receive shapes per node: patterns a message must have to pass the
// deduction/match chain that follows each receive binder. Used to keep
// the top attacker's per-slot alphabet small.
std::map<std::string, TermVec> harvest_shapes(const Network& m);

struct TopConfig {
  int candidate_depth = 2;
  // Saturation members (eavesdrop-replay power) are always all included;
  // shape-synthesised forgery probes beyond them are capped per attacker
  // per slot. Both verdicts are stated candidate-relative either way.
  std::size_t extras_cap = 16;
  std::size_t candidate_cap = 4096;  // hard total per attacker per slot
  int max_slots = 12;
};

struct TopAttacker {
  Network network;
  std::vector<std::size_t> candidates_per_slot;  // summed over attackers
  bool capped = false;
};

TopAttacker top_attacker(const AttackerWiring& w, const KnowledgeSequence& phi,
                         const std::map<std::string, TermVec>& shapes_by_target,
                         const TopConfig& cfg);

struct TgndcBounds {
  int max_sigma = 10;
  int deduction_depth = 4;
  TopConfig top;
  SimBounds sim;
  std::size_t state_budget = 2000000;
};

// Eavesdropping coverage: explores the wired system over every lossy
// schedule and demands that everything a protocol node broadcasts during
// slot j is already deducible from phi_j.
CheckReport check_stability(const Network& m, const AttackerWiring& w,
                            const KnowledgeSequence& phi, const TgndcBounds& bounds);

// Records the broadcasts of the wired system per slot and returns the
// induced monotone sequence (seed and ambient atoms included).
KnowledgeSequence derive_knowledge_sequence(const Network& m, const AttackerWiring& w,
                                            const Knowledge& seed, const TermVec& ambient,
                                            const TgndcBounds& bounds);

// "wired system | top attacker", the left side of the Theorem 3.12 check;
// shapes are harvested from the system's receive patterns.
struct CriterionSetup {
  Network composition;
  TopAttacker top;
  std::set<std::string> attackers;
};

CriterionSetup criterion_composition(const Network& system, const AttackerWiring& wiring,
                                     const KnowledgeSequence& phi, const TopConfig& cfg);

struct TgndcQuery {
  std::string name;
  Network system;
  Network spec;
  AttackerWiring wiring;
  KnowledgeSequence phi;
  TgndcBounds bounds;
  bool stability_established = false;  // set by the compositional driver
};

struct TgndcReport {
  Verdict verdict = Verdict::Inconclusive;
  bool refused = false;  // stability precondition unmet
  CheckReport stability;
  SimResult sim;
  std::optional<Trace> attack;
  std::vector<std::string> lines;

  std::string render() const;
};

TgndcReport check_tgndc(const TgndcQuery& q);

struct TgndcPart {
  std::string name;
  Network system;
  Network spec;
  std::set<std::string> observed;
};

// Theorem 3.13: disjoint per-part attackers, joint stability on the
// composition, per-part criterion checks; all parts holding yields the
// composed verdict for spec_1 | ... | spec_k.
TgndcReport check_tgndc_compositional(const std::vector<TgndcPart>& parts,
                                      const KnowledgeSequence& phi,
                                      const TgndcBounds& bounds);

}  // namespace atcws
