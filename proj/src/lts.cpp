#include "atcws/lts.hpp"

#include "atcws/deduce.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace atcws {

Label Label::bcast(std::string sender, TermPtr w, std::vector<std::string> recvs) {
  std::sort(recvs.begin(), recvs.end());
  return {Kind::Bcast, std::move(sender), w, std::move(recvs)};
}

Label Label::input(std::string sender, TermPtr w) {
  return {Kind::Input, std::move(sender), w, {}};
}

Label Label::obs(TermPtr w, std::vector<std::string> recvs) {
  std::sort(recvs.begin(), recvs.end());
  return {Kind::ObsBcast, "", w, std::move(recvs)};
}

std::string Label::text() const {
  switch (kind) {
    case Kind::Tau:
      return "tau";
    case Kind::Sigma:
      return "sigma";
    case Kind::Input:
      return "in " + sender + " " + to_string(payload);
    case Kind::ObsBcast:
    case Kind::Bcast: {
      std::string s = "out ";
      if (kind == Kind::Bcast) s += "[" + sender + "] ";
      s += to_string(payload);
      s += " > {";
      for (std::size_t i = 0; i < receivers.size(); ++i) {
        if (i) s += ',';
        s += receivers[i];
      }
      s += '}';
      return s;
    }
  }
  return "?";
}

bool label_less(const Label& a, const Label& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.sender != b.sender) return a.sender < b.sender;
  if (a.payload != b.payload) {
    if (!a.payload) return true;
    if (!b.payload) return false;
    return a.payload->text < b.payload->text;
  }
  return a.receivers < b.receivers;
}

int sigma_count(const Trace& t) {
  int n = 0;
  for (const auto& l : t.steps) n += l.kind == Label::Kind::Sigma ? 1 : 0;
  return n;
}

std::string trace_to_text(const Trace& t) {
  std::string s;
  for (const auto& l : t.steps) {
    s += l.text();
    s += '\n';
  }
  return s;
}

const Resolved& resolve(ProcPtr entry, LtsCtx& ctx) {
  auto it = ctx.memo.find(entry);
  if (it != ctx.memo.end()) return it->second;

  ProcPtr p = entry;
  int fuel = ctx.fuel;
  Resolved r;
  for (;;) {
    if (fuel-- <= 0) throw ModelError("process resolution diverges (unguarded recursion?)");
    switch (p->kind) {
      case Process::Kind::Nil:
        r.head = Resolved::Head::Nil;
        goto done;
      case Process::Kind::Bang:
        if (!p->payload->is_message())
          throw ModelError("broadcast of an open term " + to_string(p->payload));
        r.head = Resolved::Head::Bang;
        r.payload = p->payload;
        r.cont = p->cont;
        goto done;
      case Process::Kind::RcvTimeout:
        r.head = Resolved::Head::Rcv;
        r.binder = p->binder;
        r.body = p->body;
        r.timeout = p->timeout;
        goto done;
      case Process::Kind::SumTimeout:
        r.head = Resolved::Head::Sum;
        r.branches = p->branches;
        r.timeout = p->timeout;
        goto done;
      case Process::Kind::Sleep:
        r.head = Resolved::Head::Sleep;
        r.cont = p->cont;
        goto done;
      case Process::Kind::Match:
        if (!p->left->is_message() || !p->right->is_message())
          throw ModelError("matching on an open term");
        p = (p->left == p->right) ? p->then_p : p->else_p;
        break;
      case Process::Kind::Deduce: {
        const InferenceRule* rule = rule_by_name(p->rule);
        auto res = apply_rule(*rule, p->premises);
        p = res ? substitute(p->then_p, p->binder, *res) : p->else_p;
        break;
      }
      case Process::Kind::Call: {
        auto dit = ctx.defs->find(p->name);
        if (dit == ctx.defs->end())
          throw ModelError("call to undefined process " + p->name);
        const ProcessDef& d = dit->second;
        if (d.params.size() != p->args.size())
          throw ModelError("call to " + p->name + " with wrong arity");
        std::map<std::string, TermPtr> env;
        for (std::size_t i = 0; i < d.params.size(); ++i) {
          if (!p->args[i]->is_message())
            throw ModelError("call to " + p->name + " with an open argument");
          env[d.params[i]] = p->args[i];
        }
        p = substitute_all(d.body, env);
        break;
      }
    }
  }
done:
  return ctx.memo.emplace(entry, std::move(r)).first->second;
}

ProcPtr head_normal(ProcPtr p, LtsCtx& ctx) {
  auto it = ctx.normal_memo.find(p);
  if (it != ctx.normal_memo.end()) return it->second;
  const Resolved& r = resolve(p, ctx);
  ProcPtr n = nullptr;
  switch (r.head) {
    case Resolved::Head::Nil:
      n = Process::nil();
      break;
    case Resolved::Head::Bang:
      n = Process::bang(r.payload, r.cont);
      break;
    case Resolved::Head::Rcv:
      n = Process::recv(r.binder, r.body, r.timeout);
      break;
    case Resolved::Head::Sum:
      n = Process::sum(r.branches, r.timeout);
      break;
    case Resolved::Head::Sleep:
      n = Process::sleep(r.cont);
      break;
  }
  ctx.normal_memo.emplace(p, n);
  return n;
}

Network normal_form(const Network& m, LtsCtx& ctx) {
  std::vector<NetNode> nodes = m.nodes;
  for (auto& n : nodes) n.proc = head_normal(n.proc, ctx);
  return Network{std::move(nodes), m.defs};
}

std::string state_key(const Network& m) {
  std::string k;
  k.reserve(m.nodes.size() * 24);
  for (const auto& n : m.nodes) {
    k += n.name;
    k += '\x1f';
    char buf[20];
    std::snprintf(buf, sizeof buf, "%p", static_cast<const void*>(n.proc));
    k += buf;
    k += '\x1f';
    for (const auto& x : n.neighbors) {
      k += x;
      k += ',';
    }
    k += '\x1e';
  }
  return k;
}

namespace {

// every receive/miss split of the eligible receivers (rule (Rcv) vs the
// (RcvEnb) miss; lossy broadcast)
void receiver_splits(const Network& m, LtsCtx& ctx, const std::string& sender,
                     TermPtr w, int skip_index, std::vector<std::vector<NetNode>>& out) {
  std::vector<int> eligible;
  for (int j = 0; j < static_cast<int>(m.nodes.size()); ++j) {
    if (j == skip_index) continue;
    const NetNode& n = m.nodes[j];
    if (!std::binary_search(n.neighbors.begin(), n.neighbors.end(), sender)) continue;
    if (resolve(n.proc, ctx).head == Resolved::Head::Rcv) eligible.push_back(j);
  }
  const std::size_t combos = std::size_t{1} << eligible.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    std::vector<NetNode> nodes = m.nodes;
    for (std::size_t b = 0; b < eligible.size(); ++b) {
      if (!(mask & (std::size_t{1} << b))) continue;
      NetNode& n = nodes[eligible[b]];
      const Resolved& r = resolve(n.proc, ctx);
      n.proc = substitute(r.body, r.binder, w);
    }
    out.push_back(std::move(nodes));
  }
}

}  // namespace

std::vector<Step> step(const Network& m, LtsCtx& ctx,
                       const std::vector<InputCandidate>& inputs) {
  std::vector<Step> out;
  auto mk = [&](std::vector<NetNode> nodes) {
    return normal_form(Network{std::move(nodes), m.defs}, ctx);
  };
  std::vector<const Resolved*> heads;
  heads.reserve(m.nodes.size());
  for (const auto& n : m.nodes) heads.push_back(&resolve(n.proc, ctx));

  std::vector<std::string> nds;
  for (const auto& n : m.nodes) nds.push_back(n.name);
  std::sort(nds.begin(), nds.end());

  bool sender_present = false;

  for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
    const NetNode& n = m.nodes[i];
    const Resolved& r = *heads[i];
    switch (r.head) {
      case Resolved::Head::Bang: {
        sender_present = true;
        std::vector<std::string> env_recv;
        for (const auto& x : n.neighbors)
          if (!std::binary_search(nds.begin(), nds.end(), x)) env_recv.push_back(x);
        Label l = Label::bcast(n.name, r.payload, env_recv);
        std::vector<std::vector<NetNode>> splits;
        receiver_splits(m, ctx, n.name, r.payload, i, splits);
        for (auto& nodes : splits) {
          nodes[i].proc = r.cont;
          out.emplace_back(l, mk(std::move(nodes)));
        }
        break;
      }
      case Resolved::Head::Sum:
        if (ctx.direct_send.count(n.name)) {
          // top-attacker schema: the tau commit and the broadcast fuse
          for (ProcPtr b : r.branches) {
            const Resolved& br = resolve(b, ctx);
            if (br.head != Resolved::Head::Bang) {
              std::vector<NetNode> nodes = m.nodes;
              nodes[i].proc = b;
              out.emplace_back(Label::tau(), mk(std::move(nodes)));
              continue;
            }
            std::vector<std::string> env_recv;
            for (const auto& x : n.neighbors)
              if (!std::binary_search(nds.begin(), nds.end(), x)) env_recv.push_back(x);
            Label l = Label::bcast(n.name, br.payload, env_recv);
            std::vector<std::vector<NetNode>> splits;
            receiver_splits(m, ctx, n.name, br.payload, i, splits);
            for (auto& nodes : splits) {
              nodes[i].proc = br.cont;
              out.emplace_back(l, mk(std::move(nodes)));
            }
          }
          break;
        }
        for (ProcPtr b : r.branches) {
          std::vector<NetNode> nodes = m.nodes;
          nodes[i].proc = b;
          out.emplace_back(Label::tau(), mk(std::move(nodes)));
        }
        break;
      default:
        break;
    }
  }

  // environment inputs (rule (Rcv)/(RcvEnb) with an external sender)
  for (const auto& cand : inputs) {
    if (std::binary_search(nds.begin(), nds.end(), cand.sender)) continue;
    if (!cand.payload->is_message())
      throw ModelError("input candidate with an open term");
    Label l = Label::input(cand.sender, cand.payload);
    std::vector<std::vector<NetNode>> splits;
    receiver_splits(m, ctx, cand.sender, cand.payload, -1, splits);
    for (auto& nodes : splits) out.emplace_back(l, mk(std::move(nodes)));
  }

  // time passing: blocked by any pending broadcast (maximal progress)
  if (!sender_present) {
    std::vector<NetNode> nodes = m.nodes;
    for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
      const Resolved& r = *heads[i];
      switch (r.head) {
        case Resolved::Head::Nil:
          nodes[i].proc = Process::nil();
          break;
        case Resolved::Head::Rcv:
        case Resolved::Head::Sum:
          nodes[i].proc = r.timeout;
          break;
        case Resolved::Head::Sleep:
          nodes[i].proc = r.cont;
          break;
        case Resolved::Head::Bang:
          break;  // unreachable
      }
    }
    out.emplace_back(Label::sigma(), mk(std::move(nodes)));
  }

  std::stable_sort(out.begin(), out.end(), [](const Step& a, const Step& b) {
    if (!(a.first == b.first)) return label_less(a.first, b.first);
    return state_key(a.second) < state_key(b.second);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Step& a, const Step& b) {
                          return a.first == b.first &&
                                 state_key(a.second) == state_key(b.second);
                        }),
            out.end());
  return out;
}

Label observe(const Label& l) {
  if (l.kind != Label::Kind::Bcast) return l;
  if (l.receivers.empty()) return Label::tau();
  return Label::obs(l.payload, l.receivers);
}

namespace {

struct Frontier {
  std::vector<Network> states;
  std::unordered_set<std::string> keys;

  bool add(const Network& n) {
    if (!keys.insert(state_key(n)).second) return false;
    states.push_back(n);
    return true;
  }
};

// tau closure (reflexive-transitive over observed tau edges)
void close_tau(Frontier& f, LtsCtx& ctx, int bound, bool* truncated) {
  std::deque<Network> work(f.states.begin(), f.states.end());
  int steps = 0;
  while (!work.empty()) {
    if (steps++ > bound) {
      *truncated = true;
      return;
    }
    Network s = std::move(work.front());
    work.pop_front();
    for (const auto& [l, succ] : step(s, ctx)) {
      if (observe(l).kind != Label::Kind::Tau) continue;
      if (f.add(succ)) work.push_back(succ);
    }
  }
}

}  // namespace

WeakResult weak_step(const Network& m, const Label& alpha, LtsCtx& ctx, int bound) {
  WeakResult res;
  Frontier pre;
  pre.add(normal_form(m, ctx));
  close_tau(pre, ctx, bound, &res.truncated);
  if (alpha.kind == Label::Kind::Tau) {
    res.states = pre.states;
    return res;
  }
  Frontier post;
  for (const auto& s : pre.states) {
    std::vector<InputCandidate> inputs;
    if (alpha.kind == Label::Kind::Input) inputs.push_back({alpha.sender, alpha.payload});
    for (const auto& [l, succ] : step(s, ctx, inputs)) {
      if (observe(l) == alpha) post.add(succ);
    }
  }
  close_tau(post, ctx, bound, &res.truncated);
  res.states = post.states;
  return res;
}

WeakResult run_trace(const Network& m, const Trace& t, LtsCtx& ctx, int bound) {
  WeakResult cur;
  cur.states.push_back(normal_form(m, ctx));
  for (const auto& alpha : t.steps) {
    Frontier next;
    bool truncated = cur.truncated;
    for (const auto& s : cur.states) {
      WeakResult one = weak_step(s, alpha, ctx, bound);
      truncated = truncated || one.truncated;
      for (const auto& n : one.states) next.add(n);
    }
    cur.states = next.states;
    cur.truncated = truncated;
    if (cur.states.empty()) break;
  }
  return cur;
}

StateGraph explore(const Network& m, int max_sigma, LtsCtx& ctx,
                   const SlotCandidates& candidates, std::size_t state_budget) {
  StateGraph g;
  std::unordered_map<std::string, int> index;
  auto intern_state = [&](const Network& n, int depth) {
    auto [it, fresh] = index.emplace(state_key(n), static_cast<int>(g.states.size()));
    if (fresh) {
      g.states.push_back(n);
      g.sigma_depth.push_back(depth);
    }
    return it->second;
  };
  g.initial = intern_state(normal_form(m, ctx), 0);
  std::deque<int> work{g.initial};
  std::unordered_set<int> queued{g.initial};
  static const std::vector<InputCandidate> kNone;
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    queued.erase(id);
    if (g.states.size() > state_budget) {
      g.complete = false;
      break;
    }
    int depth = g.sigma_depth[id];
    const auto& slot_inputs =
        depth < static_cast<int>(candidates.size()) ? candidates[depth] : kNone;
    Network state = g.states[id];
    for (const auto& [l, succ] : step(state, ctx, slot_inputs)) {
      Label ol = observe(l);
      bool is_sigma = ol.kind == Label::Kind::Sigma;
      if (is_sigma && depth >= max_sigma) continue;
      int new_depth = depth + (is_sigma ? 1 : 0);
      std::size_t before = g.states.size();
      int to = intern_state(succ, new_depth);
      bool fresh = g.states.size() > before;
      bool improved = new_depth < g.sigma_depth[to];
      if (improved) g.sigma_depth[to] = new_depth;
      g.edges.push_back({id, ol, to});
      if ((fresh || improved) && queued.insert(to).second) work.push_back(to);
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const StateGraph::Edge& a, const StateGraph::Edge& b) {
    if (a.from != b.from) return a.from < b.from;
    if (!(a.label == b.label)) return label_less(a.label, b.label);
    return a.to < b.to;
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const StateGraph::Edge& a, const StateGraph::Edge& b) {
                              return a.from == b.from && a.label == b.label && a.to == b.to;
                            }),
                g.edges.end());
  return g;
}

std::string StateGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n";
  os << "  s" << initial << " [shape=doublecircle];\n";
  for (const auto& e : edges) {
    std::string lbl = e.label.text();
    std::string esc;
    for (char c : lbl) {
      if (c == '"' || c == '\\') esc += '\\';
      esc += c;
    }
    os << "  s" << e.from << " -> s" << e.to << " [label=\"" << esc << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace atcws
