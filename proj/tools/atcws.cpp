// Command-line driver: model checking, exploration, trace replay,
// time-property suites, simulation and tGNDC queries, replay attacks.
//
// Exit status: 0 verdict holds / ok, 1 verdict fails (witness attached),
// 2 inconclusive, 3 usage or parse error.

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "atcws/dsl.hpp"
#include "atcws/timeprops.hpp"

using namespace atcws;

namespace {

constexpr int kOk = 0, kFail = 1, kInconclusive = 2, kUsage = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << text;
}

int exit_of(Verdict v) {
  switch (v) {
    case Verdict::Ok: return kOk;
    case Verdict::Fail: return kFail;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kUsage;
}

struct Bounds {
  long max_sigma = 10;  // D18 desk scale
  long depth = 2;
  long extras = 16;
  long deduction_depth = 4;
  long state_budget = 2000000;
  long pair_budget = 2000000;
  long rounds = 8;
  long chain = 8;
  long buffer = 3;
  long receivers = 1;
  long count = 500;
  long seed = 1;

  void load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open config " + path);
    std::string key;
    while (in >> key) {
      if (key.empty() || key[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      std::string eq;
      long value = 0;
      in >> eq;
      if (eq == "=") in >> value;
      else value = std::stol(eq);
      set(key, value);
    }
  }
  void set(const std::string& key, long v) {
    if (key == "max-sigma") max_sigma = v;
    else if (key == "candidate-depth" || key == "depth") depth = v;
    else if (key == "extras-cap" || key == "extras") extras = v;
    else if (key == "deduction-depth") deduction_depth = v;
    else if (key == "state-budget" || key == "budget") state_budget = v;
    else if (key == "pair-budget") pair_budget = v;
    else if (key == "rounds") rounds = v;
    else if (key == "chain") chain = v;
    else if (key == "buffer") buffer = v;
    else if (key == "receivers") receivers = v;
    else if (key == "count") count = v;
    else if (key == "seed") seed = v;
    else throw ModelError("unknown config key " + key);
  }
  ProtocolParams params() const {
    ProtocolParams p;
    p.chain_length = static_cast<int>(chain);
    p.buffer_size = static_cast<int>(buffer);
    p.receivers = static_cast<int>(receivers);
    p.rounds = static_cast<int>(rounds);
    p.max_slots = static_cast<int>(max_sigma) + 2;
    return p;
  }
  TgndcBounds tgndc() const {
    TgndcBounds b;
    b.max_sigma = static_cast<int>(max_sigma);
    b.deduction_depth = static_cast<int>(deduction_depth);
    b.top.candidate_depth = static_cast<int>(depth);
    b.top.extras_cap = static_cast<std::size_t>(extras);
    b.top.max_slots = static_cast<int>(max_sigma) + 1;
    b.state_budget = static_cast<std::size_t>(state_budget);
    b.sim.max_sigma = static_cast<int>(max_sigma);
    b.sim.pair_budget = static_cast<std::size_t>(pair_budget);
    return b;
  }
};

ProtocolInstance build_named(const std::string& spec_str, const Bounds& bounds) {
  std::string name = spec_str, variant;
  auto slash = spec_str.find('/');
  if (slash != std::string::npos) {
    name = spec_str.substr(0, slash);
    variant = spec_str.substr(slash + 1);
  }
  if (variant.empty()) variant = protocol_variants(name).front();
  return build_protocol(name, variant, bounds.params());
}

const Network& named_network(const SourceModel& model, const std::string& name) {
  const Network* net = model.network(name);
  if (!net) throw ModelError("no network named " + name + " in the model");
  return *net;
}

AttackerWiring wiring_for(const Network& system, const QuerySpec& q) {
  AttackerWiring w;
  Topology t = topology(system);
  std::size_t i = 0;
  for (const auto& n : t.nds) {
    w.protocol_nodes.push_back(n);
    w.attacker_nodes.push_back(i < q.attackers.size() ? q.attackers[i] : "atk_" + n);
    ++i;
  }
  w.observed = q.observe;
  return w;
}

int run_tgndc_file(const std::string& path, const Bounds& bounds, int jobs) {
  SourceModel model = parse(slurp(path));
  std::vector<TgndcQuery> queries;
  for (const auto& q : model.queries) {
    if (q.kind != QuerySpec::Kind::Tgndc) continue;
    TgndcQuery tq;
    tq.name = q.target;
    tq.system = named_network(model, q.target);
    tq.spec = named_network(model, q.spec);
    const KnowledgeSequence* phi = model.phi(q.phi);
    if (!phi) throw ModelError("tgndc query needs a phi block");
    tq.phi = *phi;
    tq.wiring = wiring_for(tq.system, q);
    tq.bounds = bounds.tgndc();
    tq.bounds.max_sigma = static_cast<int>(q.bound_or("bound", bounds.max_sigma));
    tq.bounds.sim.max_sigma = tq.bounds.max_sigma;
    tq.bounds.top.candidate_depth = static_cast<int>(q.bound_or("depth", bounds.depth));
    tq.bounds.top.extras_cap =
        static_cast<std::size_t>(q.bound_or("extras", bounds.extras));
    tq.bounds.top.max_slots = tq.bounds.max_sigma + 1;
    queries.push_back(std::move(tq));
  }
  if (queries.empty()) throw ModelError("no tgndc queries in " + path);
  std::vector<TgndcReport> reports(queries.size());
  if (jobs > 1) {
    std::vector<std::future<TgndcReport>> futs;
    for (const auto& q : queries)
      futs.push_back(std::async(std::launch::async, [&q] { return check_tgndc(q); }));
    for (std::size_t i = 0; i < futs.size(); ++i) reports[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < queries.size(); ++i) reports[i] = check_tgndc(queries[i]);
  }
  int worst = kOk;
  for (const auto& rep : reports) {
    std::cout << rep.render();
    worst = std::max(worst, exit_of(rep.verdict));
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atcws: a symbolic verifier for a timed broadcast process calculus"};
  app.require_subcommand(1);

  Bounds bounds;
  std::string config_path;
  int jobs = 1;
  app.add_option("--config", config_path, "config file with bound defaults");
  app.add_option("--jobs", jobs, "run independent queries concurrently");

  auto add_bound_flags = [&](CLI::App* cmd) {
    cmd->add_option("--max-sigma", bounds.max_sigma, "sigma depth bound");
    cmd->add_option("--depth", bounds.depth, "candidate synthesis depth");
    cmd->add_option("--extras", bounds.extras, "shaped-candidate cap per slot");
    cmd->add_option("--state-budget", bounds.state_budget, "exploration state budget");
    cmd->add_option("--pair-budget", bounds.pair_budget, "simulation pair budget");
    cmd->add_option("--rounds", bounds.rounds, "protocol rounds generated");
    cmd->add_option("--receivers", bounds.receivers, "receiver count (mutesla-auth)");
    cmd->add_option("--buffer", bounds.buffer, "buffer size (lisp)");
    cmd->add_option("--seed", bounds.seed, "random seed");
    cmd->add_option("--count", bounds.count, "random network count");
  };

  // check-wf
  std::string wf_file, wf_net;
  CLI::App* wf = app.add_subcommand("check-wf", "well-formedness of a model file");
  wf->add_option("file", wf_file)->required();
  wf->add_option("network", wf_net, "network name (default: every network)");

  // explore
  std::string ex_file, ex_net, ex_protocol, ex_dot;
  CLI::App* ex = app.add_subcommand("explore", "bounded state-graph exploration");
  ex->add_option("file", ex_file, "model file (or use --protocol)");
  ex->add_option("network", ex_net, "network name");
  ex->add_option("--protocol", ex_protocol, "built-in instance name[/variant]");
  ex->add_option("--dot", ex_dot, "write the graph in DOT format");
  add_bound_flags(ex);

  // trace
  std::string tr_file, tr_model, tr_net, tr_protocol, tr_query;
  bool tr_attack = false, tr_spec = false;
  CLI::App* tr = app.add_subcommand("trace", "replay a trace file");
  tr->add_option("tracefile", tr_file)->required();
  tr->add_option("--model", tr_model, "model file");
  tr->add_option("--network", tr_net, "network name inside --model");
  tr->add_option("--protocol", tr_protocol, "built-in instance name[/variant]");
  tr->add_flag("--attack", tr_attack, "replay against the scripted-attack composition");
  tr->add_flag("--spec", tr_spec, "replay against the abstraction instead");
  tr->add_option("--query", tr_query, "replay against a tgndc query composition");
  add_bound_flags(tr);

  // time-props
  CLI::App* tp = app.add_subcommand("time-props", "random time-property suites");
  add_bound_flags(tp);

  // sim
  std::string sim_file, sim_impl, sim_spec;
  CLI::App* sim = app.add_subcommand("sim", "bounded weak simulation impl <~ spec");
  sim->add_option("file", sim_file)->required();
  sim->add_option("impl", sim_impl)->required();
  sim->add_option("spec", sim_spec)->required();
  add_bound_flags(sim);

  // tgndc
  std::string tq_file;
  CLI::App* tq = app.add_subcommand("tgndc", "run the tgndc queries of a .q file");
  tq->add_option("query", tq_file)->required();
  add_bound_flags(tq);

  // attack
  std::string atk_name, atk_trace_out;
  CLI::App* atk = app.add_subcommand("attack", "reproduce a replay attack");
  atk->add_option("protocol", atk_name)->required();
  atk->add_option("--trace-out", atk_trace_out, "write the golden trace");
  add_bound_flags(atk);

  // list-protocols
  app.add_subcommand("list-protocols", "bundled protocol instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) bounds.load_config(config_path);

    if (wf->parsed()) {
      SourceModel model = parse(slurp(wf_file));
      int worst = kOk;
      for (const auto& [name, net] : model.networks) {
        if (!wf_net.empty() && name != wf_net) continue;
        CheckReport rep = check_well_formed(net);
        std::cout << name << " " << rep.render();
        worst = std::max(worst, exit_of(rep.verdict));
      }
      return worst;
    }

    if (ex->parsed()) {
      Network net = Network::empty();
      if (!ex_protocol.empty()) {
        net = build_named(ex_protocol, bounds).system;
      } else if (!ex_file.empty()) {
        SourceModel model = parse(slurp(ex_file));
        net = ex_net.empty() ? model.networks.at(0).second : named_network(model, ex_net);
      } else {
        std::cerr << "explore needs a model file or --protocol\n";
        return kUsage;
      }
      LtsCtx ctx(net.defs);
      StateGraph g = explore(net, static_cast<int>(bounds.max_sigma), ctx, {},
                             static_cast<std::size_t>(bounds.state_budget));
      std::cout << "explore: states=" << g.states.size() << " edges=" << g.edges.size()
                << " sigma-bound=" << bounds.max_sigma
                << (g.complete ? "" : " (budget hit, incomplete)") << "\n";
      if (!ex_dot.empty()) write_file(ex_dot, g.to_dot());
      return g.complete ? kOk : kInconclusive;
    }

    if (tr->parsed()) {
      Network target = Network::empty();
      TermScope scope;
      std::set<std::string> direct;
      if (!tr_protocol.empty()) {
        ProtocolInstance inst = build_named(tr_protocol, bounds);
        scope = scope_of(inst);
        if (tr_attack) {
          AttackReport rep = replay_attack(inst.name, bounds.params());
          target = rep.composition;
        } else if (tr_spec) {
          target = inst.abstraction;
        } else {
          target = inst.system;
        }
      } else if (!tr_query.empty()) {
        SourceModel model = parse(slurp(tr_query));
        scope = scope_of(model);
        for (const auto& q : model.queries) {
          if (q.kind != QuerySpec::Kind::Tgndc) continue;
          const Network& sys = named_network(model, q.target);
          AttackerWiring w = wiring_for(sys, q);
          const KnowledgeSequence* phi = model.phi(q.phi);
          if (!phi) throw ModelError("tgndc query needs a phi block");
          TopConfig cfg = bounds.tgndc().top;
          CriterionSetup setup = criterion_composition(sys, w, *phi, cfg);
          target = setup.composition;
          direct = setup.attackers;
          break;
        }
        if (target.nodes.empty()) throw ModelError("no tgndc query in " + tr_query);
      } else if (!tr_model.empty()) {
        SourceModel model = parse(slurp(tr_model));
        scope = scope_of(model);
        target = tr_net.empty() ? model.networks.at(0).second : named_network(model, tr_net);
      } else {
        std::cerr << "trace needs --protocol, --model or --query\n";
        return kUsage;
      }
      Trace t = parse_trace(slurp(tr_file), scope);
      LtsCtx ctx(target.defs);
      ctx.direct_send = direct;
      WeakResult res = run_trace(target, t, ctx);
      std::cout << "trace: " << t.steps.size() << " labels, "
                << (res.states.empty() ? "not executable" : "executable") << "\n";
      return res.states.empty() ? kFail : kOk;
    }

    if (tp->parsed()) {
      CheckReport rep = run_time_property_suite(static_cast<int>(bounds.count),
                                                static_cast<unsigned long>(bounds.seed),
                                                static_cast<int>(bounds.max_sigma));
      std::cout << rep.render();
      return exit_of(rep.verdict);
    }

    if (sim->parsed()) {
      SourceModel model = parse(slurp(sim_file));
      SimBounds sb;
      sb.max_sigma = static_cast<int>(bounds.max_sigma);
      sb.pair_budget = static_cast<std::size_t>(bounds.pair_budget);
      SimResult res =
          simulates(named_network(model, sim_spec), named_network(model, sim_impl), sb);
      std::cout << "sim " << sim_impl << " <~ " << sim_spec << ": "
                << (res.holds() ? "holds (bounded)"
                                : res.verdict == Verdict::Fail ? "fails" : "inconclusive")
                << " pairs=" << res.explored_pairs
                << (res.bound_hit ? " sigma-bound-hit" : "") << "\n";
      if (res.counterexample) {
        std::cout << "counterexample:\n";
        for (const auto& l : res.counterexample->steps) std::cout << "  " << l.text() << "\n";
      }
      return exit_of(res.verdict);
    }

    if (tq->parsed()) return run_tgndc_file(tq_file, bounds, jobs);

    if (atk->parsed()) {
      if (atk_name == "mutesla-auth") {
        std::cout << "attack mutesla-auth: none — the authenticated-broadcast phase "
                     "satisfies timed integrity, and its timed agreement coincides "
                     "with it\n";
        return kOk;
      }
      AttackReport rep = replay_attack(atk_name, bounds.params());
      std::cout << rep.report.render();
      std::cout << "  trace:\n";
      for (const auto& l : rep.golden.steps) std::cout << "    " << l.text() << "\n";
      if (!atk_trace_out.empty()) write_file(atk_trace_out, trace_to_text(rep.golden));
      return exit_of(rep.report.verdict);
    }

    // list-protocols
    for (const auto& name : protocol_names()) {
      std::cout << name << ":";
      for (const auto& v : protocol_variants(name)) std::cout << " " << v;
      std::cout << "\n";
    }
    return kOk;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
