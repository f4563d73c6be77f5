#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "atcws/protocols.hpp"

namespace atcws {

// Textual model format (.atcws), query format (.q) and trace files.
//
//   atoms { node m; tag req; nonce n0m; key kBSm; other bot; }
//   chain kc 8;
//   def H(x) = out(pair(req,x)).sleep.H(x)
//   network Boot { node m [ A_1() ] nbr {bs}  node bs [ D_1() ] nbr {m} }
//   phi Phi1 { slot { pair(req,pair(m,n1)) } slot { ... } extend constant }
//   check tgndc Boot spec BootSpec observe {m} attackers {a,b} phi Phi1
//         bound 10 depth 2
//
// Identifiers of the form <chain>_<index> with a declared chain parse as
// chain keys; integers are atoms; bound variables shadow declarations.

struct QuerySpec {
  enum class Kind { Wf, Sim, Tgndc, Explore };
  Kind kind = Kind::Wf;
  std::string target;              // network name
  std::string spec;                // sim/tgndc
  std::string phi;                 // tgndc
  std::set<std::string> observe;   // tgndc
  std::vector<std::string> attackers;
  std::map<std::string, long> bounds;  // bound, depth, extras, budget

  long bound_or(const std::string& key, long fallback) const {
    auto it = bounds.find(key);
    return it == bounds.end() ? fallback : it->second;
  }
};

struct SourceModel {
  std::map<std::string, TermPtr> atoms;
  std::set<std::string> chains;
  DefTablePtr defs;
  std::vector<std::pair<std::string, Network>> networks;
  std::vector<std::pair<std::string, KnowledgeSequence>> phis;
  std::vector<QuerySpec> queries;

  const Network* network(const std::string& name) const;
  const KnowledgeSequence* phi(const std::string& name) const;
};

SourceModel parse(const std::string& text);
std::string emit(const SourceModel& model);

// Term scope for parsing terms and traces outside a full model.
struct TermScope {
  std::map<std::string, TermPtr> atoms;
  std::set<std::string> chains;
};

TermScope scope_of(const SourceModel& model);
TermScope scope_of(const ProtocolInstance& inst);

TermPtr parse_term(const std::string& text, const TermScope& scope);
Trace parse_trace(const std::string& text, const TermScope& scope);

// Bundled-corpus bridge: a protocol instance rendered as a source model
// (atoms, chain, definitions, system/spec networks, knowledge, query).
SourceModel source_of_instance(const ProtocolInstance& inst, int max_sigma = 10,
                               int candidate_depth = 2);

}  // namespace atcws
