#include "atcws/process.hpp"

#include "atcws/deduce.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace atcws {

std::string CheckReport::render() const {
  std::ostringstream os;
  os << title << ": " << (verdict == Verdict::Ok ? "ok" : verdict_name(verdict)) << "\n";
  for (const auto& v : violations) os << "  violation: " << v << "\n";
  for (const auto& n : notes) os << "  note: " << n << "\n";
  return os.str();
}

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t proc_hash(const Process& p) {
  std::size_t h = static_cast<std::size_t>(p.kind) * 1099511628211ULL;
  auto mixp = [&](const void* q) { h = hash_combine(h, std::hash<const void*>()(q)); };
  auto mixs = [&](const std::string& s) { h = hash_combine(h, std::hash<std::string>()(s)); };
  mixp(p.payload); mixp(p.cont); mixp(p.body); mixp(p.timeout);
  mixp(p.left); mixp(p.right); mixp(p.then_p); mixp(p.else_p);
  mixs(p.binder); mixs(p.rule); mixs(p.name);
  for (ProcPtr b : p.branches) mixp(b);
  for (TermPtr t : p.premises) mixp(t);
  for (TermPtr t : p.args) mixp(t);
  return h;
}

struct ProcHash {
  std::size_t operator()(const std::unique_ptr<Process>& p) const { return p->hash; }
};
struct ProcEq {
  bool operator()(const std::unique_ptr<Process>& a, const std::unique_ptr<Process>& b) const {
    return a->kind == b->kind && a->payload == b->payload && a->cont == b->cont &&
           a->binder == b->binder && a->body == b->body && a->timeout == b->timeout &&
           a->branches == b->branches && a->left == b->left && a->right == b->right &&
           a->premises == b->premises && a->rule == b->rule && a->then_p == b->then_p &&
           a->else_p == b->else_p && a->name == b->name && a->args == b->args;
  }
};

struct ProcPool {
  std::mutex mu;
  std::unordered_set<std::unique_ptr<Process>, ProcHash, ProcEq> set;
  ProcPtr intern(std::unique_ptr<Process> p) {
    p->hash = proc_hash(*p);
    std::lock_guard<std::mutex> lock(mu);
    auto it = set.find(p);
    if (it != set.end()) return it->get();
    return set.insert(std::move(p)).first->get();
  }
};

ProcPool& pool() {
  static ProcPool* p = new ProcPool();
  return *p;
}

int vec_compare(const TermVec& a, const TermVec& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] == b[i]) continue;
    return a[i]->text < b[i]->text ? -1 : 1;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

int term_compare3(TermPtr a, TermPtr b) {
  if (a == b) return 0;
  return a->text < b->text ? -1 : 1;
}

}  // namespace

int proc_compare(ProcPtr a, ProcPtr b) {
  if (a == b) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  auto cmp = [](int c) { return c; };
  int c;
  switch (a->kind) {
    case Process::Kind::Nil:
      return 0;
    case Process::Kind::Bang:
      if ((c = term_compare3(a->payload, b->payload))) return cmp(c);
      return proc_compare(a->cont, b->cont);
    case Process::Kind::RcvTimeout:
      if (a->binder != b->binder) return a->binder < b->binder ? -1 : 1;
      if ((c = proc_compare(a->body, b->body))) return c;
      return proc_compare(a->timeout, b->timeout);
    case Process::Kind::SumTimeout: {
      for (std::size_t i = 0; i < a->branches.size() && i < b->branches.size(); ++i)
        if ((c = proc_compare(a->branches[i], b->branches[i]))) return c;
      if (a->branches.size() != b->branches.size())
        return a->branches.size() < b->branches.size() ? -1 : 1;
      return proc_compare(a->timeout, b->timeout);
    }
    case Process::Kind::Sleep:
      return proc_compare(a->cont, b->cont);
    case Process::Kind::Match:
      if ((c = term_compare3(a->left, b->left))) return c;
      if ((c = term_compare3(a->right, b->right))) return c;
      if ((c = proc_compare(a->then_p, b->then_p))) return c;
      return proc_compare(a->else_p, b->else_p);
    case Process::Kind::Deduce:
      if (a->rule != b->rule) return a->rule < b->rule ? -1 : 1;
      if (a->binder != b->binder) return a->binder < b->binder ? -1 : 1;
      if ((c = vec_compare(a->premises, b->premises))) return c;
      if ((c = proc_compare(a->then_p, b->then_p))) return c;
      return proc_compare(a->else_p, b->else_p);
    case Process::Kind::Call:
      if (a->name != b->name) return a->name < b->name ? -1 : 1;
      return vec_compare(a->args, b->args);
  }
  return 0;
}

ProcPtr Process::nil() {
  auto p = std::make_unique<Process>();
  p->kind = Kind::Nil;
  return pool().intern(std::move(p));
}

ProcPtr Process::bang(TermPtr payload, ProcPtr cont) {
  auto p = std::make_unique<Process>();
  p->kind = Kind::Bang;
  p->payload = payload;
  p->cont = cont;
  return pool().intern(std::move(p));
}

ProcPtr Process::recv(const std::string& binder, ProcPtr body, ProcPtr timeout) {
  auto p = std::make_unique<Process>();
  p->kind = Kind::RcvTimeout;
  p->binder = binder;
  p->body = body;
  p->timeout = timeout;
  return pool().intern(std::move(p));
}

ProcPtr Process::sum(ProcVec branches, ProcPtr timeout) {
  if (branches.empty()) throw ModelError("internal choice needs at least one branch");
  std::sort(branches.begin(), branches.end(),
            [](ProcPtr x, ProcPtr y) { return proc_compare(x, y) < 0; });
  auto p = std::make_unique<Process>();
  p->kind = Kind::SumTimeout;
  p->branches = std::move(branches);
  p->timeout = timeout;
  return pool().intern(std::move(p));
}

ProcPtr Process::sleep(ProcPtr cont) {
  auto p = std::make_unique<Process>();
  p->kind = Kind::Sleep;
  p->cont = cont;
  return pool().intern(std::move(p));
}

ProcPtr Process::match(TermPtr l, TermPtr r, ProcPtr then_p, ProcPtr else_p) {
  auto p = std::make_unique<Process>();
  p->kind = Kind::Match;
  p->left = l;
  p->right = r;
  p->then_p = then_p;
  p->else_p = else_p;
  return pool().intern(std::move(p));
}

ProcPtr Process::deduce(TermVec premises, const std::string& rule,
                        const std::string& binder, ProcPtr then_p, ProcPtr else_p) {
  if (!rule_by_name(rule)) throw ModelError("unknown deduction rule " + rule);
  auto p = std::make_unique<Process>();
  p->kind = Kind::Deduce;
  p->premises = std::move(premises);
  p->rule = rule;
  p->binder = binder;
  p->then_p = then_p;
  p->else_p = else_p;
  return pool().intern(std::move(p));
}

ProcPtr Process::call(const std::string& name, TermVec args) {
  auto p = std::make_unique<Process>();
  p->kind = Kind::Call;
  p->name = name;
  p->args = std::move(args);
  return pool().intern(std::move(p));
}

NetNode NetNode::make(const std::string& name, ProcPtr proc,
                      std::vector<std::string> neighbors) {
  std::sort(neighbors.begin(), neighbors.end());
  neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
  for (const auto& n : neighbors)
    if (n == name) throw ModelError("node " + name + " lists itself as a neighbour");
  return NetNode{name, proc, std::move(neighbors)};
}

Network Network::make(std::vector<NetNode> nodes, DefTablePtr defs) {
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const NetNode& a, const NetNode& b) { return a.name < b.name; });
  if (!defs) defs = std::make_shared<DefTable>();
  return Network{std::move(nodes), std::move(defs)};
}

Network Network::empty() { return make({}, nullptr); }

const NetNode* Network::find(const std::string& name) const {
  for (const auto& n : nodes)
    if (n.name == name) return &n;
  return nullptr;
}

Network compose(const Network& a, const Network& b) {
  auto defs = std::make_shared<DefTable>(*a.defs);
  for (const auto& [name, def] : *b.defs) {
    auto it = defs->find(name);
    if (it == defs->end()) {
      (*defs)[name] = def;
    } else if (it->second.params != def.params || it->second.body != def.body) {
      throw ModelError("conflicting definitions for " + name + " in composition");
    }
  }
  std::vector<NetNode> nodes = a.nodes;
  nodes.insert(nodes.end(), b.nodes.begin(), b.nodes.end());
  return Network::make(std::move(nodes), std::move(defs));
}

bool network_equal(const Network& a, const Network& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const NetNode& x = a.nodes[i];
    const NetNode& y = b.nodes[i];
    if (x.name != y.name || x.proc != y.proc || x.neighbors != y.neighbors) return false;
  }
  return *a.defs == *b.defs || a.defs == b.defs;
}

TermPtr substitute_term(TermPtr t, const std::string& binder, TermPtr w) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == binder ? w : t;
    case Term::Kind::App: {
      TermVec args;
      args.reserve(t->args.size());
      bool changed = false;
      for (TermPtr a : t->args) {
        TermPtr s = substitute_term(a, binder, w);
        changed = changed || s != a;
        args.push_back(s);
      }
      return changed ? Term::app(t->ctor, std::move(args)) : t;
    }
    default:
      return t;
  }
}

ProcPtr substitute(ProcPtr p, const std::string& binder, TermPtr w) {
  auto st = [&](TermPtr t) { return substitute_term(t, binder, w); };
  auto sp = [&](ProcPtr q) { return substitute(q, binder, w); };
  switch (p->kind) {
    case Process::Kind::Nil:
      return p;
    case Process::Kind::Bang:
      return Process::bang(st(p->payload), sp(p->cont));
    case Process::Kind::RcvTimeout:
      return Process::recv(p->binder, p->binder == binder ? p->body : sp(p->body),
                           sp(p->timeout));
    case Process::Kind::SumTimeout: {
      ProcVec br;
      br.reserve(p->branches.size());
      for (ProcPtr b : p->branches) br.push_back(sp(b));
      return Process::sum(std::move(br), sp(p->timeout));
    }
    case Process::Kind::Sleep:
      return Process::sleep(sp(p->cont));
    case Process::Kind::Match:
      return Process::match(st(p->left), st(p->right), sp(p->then_p), sp(p->else_p));
    case Process::Kind::Deduce: {
      TermVec prem;
      prem.reserve(p->premises.size());
      for (TermPtr t : p->premises) prem.push_back(st(t));
      return Process::deduce(std::move(prem), p->rule, p->binder,
                             p->binder == binder ? p->then_p : sp(p->then_p),
                             sp(p->else_p));
    }
    case Process::Kind::Call: {
      TermVec args;
      args.reserve(p->args.size());
      for (TermPtr t : p->args) args.push_back(st(t));
      return Process::call(p->name, std::move(args));
    }
  }
  return p;
}

ProcPtr substitute_all(ProcPtr p, const std::map<std::string, TermPtr>& env) {
  ProcPtr out = p;
  // sequential application is safe: substituted messages are closed
  for (const auto& [x, w] : env) out = substitute(out, x, w);
  return out;
}

void free_vars(ProcPtr p, std::set<std::string>& out) {
  std::function<void(TermPtr, const std::set<std::string>&)> ft =
      [&](TermPtr t, const std::set<std::string>& bound) {
        if (t->kind == Term::Kind::Var) {
          if (!bound.count(t->name)) out.insert(t->name);
        } else if (t->kind == Term::Kind::App) {
          for (TermPtr a : t->args) ft(a, bound);
        }
      };
  std::function<void(ProcPtr, std::set<std::string>)> fp = [&](ProcPtr q,
                                                               std::set<std::string> bound) {
    switch (q->kind) {
      case Process::Kind::Nil:
        return;
      case Process::Kind::Bang:
        ft(q->payload, bound);
        fp(q->cont, bound);
        return;
      case Process::Kind::RcvTimeout: {
        auto inner = bound;
        inner.insert(q->binder);
        fp(q->body, inner);
        fp(q->timeout, bound);
        return;
      }
      case Process::Kind::SumTimeout:
        for (ProcPtr b : q->branches) fp(b, bound);
        fp(q->timeout, bound);
        return;
      case Process::Kind::Sleep:
        fp(q->cont, bound);
        return;
      case Process::Kind::Match:
        ft(q->left, bound);
        ft(q->right, bound);
        fp(q->then_p, bound);
        fp(q->else_p, bound);
        return;
      case Process::Kind::Deduce: {
        for (TermPtr t : q->premises) ft(t, bound);
        auto inner = bound;
        inner.insert(q->binder);
        fp(q->then_p, inner);
        fp(q->else_p, bound);
        return;
      }
      case Process::Kind::Call:
        for (TermPtr t : q->args) ft(t, bound);
        return;
    }
  };
  fp(p, {});
}

Topology topology(const Network& m) {
  Topology t;
  for (const auto& n : m.nodes) {
    t.nds.insert(n.name);
    t.ngh[n.name] = std::set<std::string>(n.neighbors.begin(), n.neighbors.end());
  }
  for (const auto& [node, nbrs] : t.ngh)
    for (const auto& x : nbrs)
      if (!t.nds.count(x)) t.env.insert(x);
  return t;
}

const std::set<std::string>& neighbors_of(const Topology& t, const std::string& node) {
  auto it = t.ngh.find(node);
  if (it == t.ngh.end()) throw ModelError("unknown node " + node);
  return it->second;
}

CheckReport check_well_formed(const Network& m) {
  CheckReport rep;
  rep.title = "well-formedness";
  Topology t = topology(m);

  for (std::size_t i = 1; i < m.nodes.size(); ++i)
    if (m.nodes[i].name == m.nodes[i - 1].name)
      rep.violations.push_back("duplicate node name " + m.nodes[i].name);

  for (const auto& n : m.nodes)
    for (const auto& x : n.neighbors)
      if (t.nds.count(x)) {
        const auto& back = t.ngh[x];
        if (!back.count(n.name))
          rep.violations.push_back("asymmetric neighbouring: " + x + " in nu(" + n.name +
                                   ") but " + n.name + " not in nu(" + x + ")");
      } else {
        rep.notes.push_back("out-of-network neighbour " + x + " at node " + n.name);
      }

  // connectivity over symmetric in-network links plus shared environment
  // neighbours (the paper's abstractions are linked only through obs);
  // nodes with no links at all are silent clocks and stay exempt
  std::vector<const NetNode*> linked;
  for (const auto& n : m.nodes) {
    if (n.neighbors.empty())
      rep.notes.push_back("isolated node " + n.name + " (empty neighbour set)");
    else
      linked.push_back(&n);
  }
  if (linked.size() > 1) {
    std::map<std::string, std::string> parent;
    for (const NetNode* n : linked) parent[n->name] = n->name;
    std::function<std::string(const std::string&)> find = [&](const std::string& x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    auto unite = [&](const std::string& a, const std::string& b) {
      parent[find(a)] = find(b);
    };
    for (const NetNode* n : linked)
      for (const auto& x : n->neighbors)
        if (t.nds.count(x) && t.ngh[x].count(n->name) && parent.count(x))
          unite(n->name, x);
    for (const NetNode* a : linked)
      for (const NetNode* b : linked)
        if (a != b)
          for (const auto& x : a->neighbors)
            if (!t.nds.count(x) &&
                std::binary_search(b->neighbors.begin(), b->neighbors.end(), x))
              unite(a->name, b->name);
    std::set<std::string> roots;
    for (const NetNode* n : linked) roots.insert(find(n->name));
    if (roots.size() > 1) {
      std::string wit;
      for (const auto& r : roots) wit += (wit.empty() ? "" : " / ") + r;
      rep.violations.push_back("network is disconnected: components rooted at " + wit);
    }
  }

  rep.verdict = rep.violations.empty() ? Verdict::Ok : Verdict::Fail;
  return rep;
}

namespace {

void get_terms(TermPtr u, TermVec& out) {
  switch (u->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Atom:
    case Term::Kind::ChainKey:
      out.push_back(u);
      return;
    case Term::Kind::App:
      if (u->ground) {
        out.push_back(u);
        for (TermPtr a : u->args) out.push_back(a);
      } else {
        for (TermPtr a : u->args) get_terms(a, out);
      }
      return;
  }
}

// Each definition body contributes a fixed message set wherever it is
// unwound (call arguments are collected at the call site, Table 4 does
// not substitute them), so one global visit per definition computes the
// same union as the per-path S index and avoids re-walking shared
// references.
void msg_rec(ProcPtr p, const DefTable& defs, std::set<std::string>& s, TermVec& out) {
  switch (p->kind) {
    case Process::Kind::Nil:
      return;
    case Process::Kind::Bang:
      get_terms(p->payload, out);
      msg_rec(p->cont, defs, s, out);
      return;
    case Process::Kind::RcvTimeout:
      msg_rec(p->body, defs, s, out);
      msg_rec(p->timeout, defs, s, out);
      return;
    case Process::Kind::SumTimeout:
      for (ProcPtr b : p->branches) msg_rec(b, defs, s, out);
      msg_rec(p->timeout, defs, s, out);
      return;
    case Process::Kind::Sleep:
      msg_rec(p->cont, defs, s, out);
      return;
    case Process::Kind::Match:
      get_terms(p->left, out);
      get_terms(p->right, out);
      msg_rec(p->then_p, defs, s, out);
      msg_rec(p->else_p, defs, s, out);
      return;
    case Process::Kind::Deduce:
      for (TermPtr t : p->premises) get_terms(t, out);
      msg_rec(p->then_p, defs, s, out);
      msg_rec(p->else_p, defs, s, out);
      return;
    case Process::Kind::Call: {
      for (TermPtr t : p->args) get_terms(t, out);
      if (s.count(p->name)) return;
      auto it = defs.find(p->name);
      if (it == defs.end()) throw ModelError("call to undefined process " + p->name);
      s.insert(p->name);
      msg_rec(it->second.body, defs, s, out);
      return;
    }
  }
}

}  // namespace

TermVec msg_of_process(ProcPtr p, const DefTable& defs) {
  TermVec out;
  std::set<std::string> seen;
  msg_rec(p, defs, seen, out);
  std::sort(out.begin(), out.end(), term_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TermVec msg_of(const Network& m) {
  TermVec out;
  std::set<std::string> seen;
  for (const auto& n : m.nodes) msg_rec(n.proc, *m.defs, seen, out);
  std::sort(out.begin(), out.end(), term_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Unguarded call occurrences: not below a sigma prefix and not in a
// timeout position. A cycle of such occurrences could fire unboundedly
// many instantaneous actions inside one time slot.
void unguarded_calls(ProcPtr p, bool guarded, std::set<std::string>& out) {
  switch (p->kind) {
    case Process::Kind::Nil:
      return;
    case Process::Kind::Bang:
      unguarded_calls(p->cont, guarded, out);
      return;
    case Process::Kind::RcvTimeout:
      unguarded_calls(p->body, guarded, out);
      unguarded_calls(p->timeout, true, out);
      return;
    case Process::Kind::SumTimeout:
      for (ProcPtr b : p->branches) unguarded_calls(b, guarded, out);
      unguarded_calls(p->timeout, true, out);
      return;
    case Process::Kind::Sleep:
      unguarded_calls(p->cont, true, out);
      return;
    case Process::Kind::Match:
      unguarded_calls(p->then_p, guarded, out);
      unguarded_calls(p->else_p, guarded, out);
      return;
    case Process::Kind::Deduce:
      unguarded_calls(p->then_p, guarded, out);
      unguarded_calls(p->else_p, guarded, out);
      return;
    case Process::Kind::Call:
      if (!guarded) out.insert(p->name);
      return;
  }
}

void reachable_defs(ProcPtr p, const DefTable& defs, std::set<std::string>& seen) {
  std::function<void(ProcPtr)> walk = [&](ProcPtr q) {
    switch (q->kind) {
      case Process::Kind::Call: {
        if (seen.count(q->name)) return;
        auto it = defs.find(q->name);
        if (it == defs.end()) return;
        seen.insert(q->name);
        walk(it->second.body);
        return;
      }
      case Process::Kind::Bang:
      case Process::Kind::Sleep:
        walk(q->cont);
        return;
      case Process::Kind::RcvTimeout:
        walk(q->body);
        walk(q->timeout);
        return;
      case Process::Kind::SumTimeout:
        for (ProcPtr b : q->branches) walk(b);
        walk(q->timeout);
        return;
      case Process::Kind::Match:
      case Process::Kind::Deduce:
        walk(q->then_p);
        walk(q->else_p);
        return;
      case Process::Kind::Nil:
        return;
    }
  };
  walk(p);
}

}  // namespace

bool is_well_timed_syntax(const Network& m) {
  std::set<std::string> used;
  for (const auto& n : m.nodes) reachable_defs(n.proc, *m.defs, used);

  std::map<std::string, std::set<std::string>> edges;
  for (const auto& name : used) {
    auto it = m.defs->find(name);
    if (it == m.defs->end()) continue;
    unguarded_calls(it->second.body, false, edges[name]);
  }
  // cycle detection over the unguarded-call graph
  std::map<std::string, int> mark;  // 0 unvisited, 1 on stack, 2 done
  std::function<bool(const std::string&)> dfs = [&](const std::string& v) -> bool {
    int& s = mark[v];
    if (s == 1) return false;
    if (s == 2) return true;
    s = 1;
    for (const auto& w : edges[v])
      if (used.count(w) && !dfs(w)) return false;
    s = 2;
    return true;
  };
  for (const auto& name : used)
    if (!dfs(name)) return false;
  return true;
}

namespace {

ProcPtr unfold_top(ProcPtr p, const DefTable& defs, int bound) {
  while (p->kind == Process::Kind::Call && bound-- > 0) {
    auto it = defs.find(p->name);
    if (it == defs.end()) return p;
    const ProcessDef& d = it->second;
    if (d.params.size() != p->args.size())
      throw ModelError("call to " + p->name + " with wrong arity");
    std::map<std::string, TermPtr> env;
    for (std::size_t i = 0; i < d.params.size(); ++i) env[d.params[i]] = p->args[i];
    p = substitute_all(d.body, env);
  }
  return p;
}

}  // namespace

bool struct_congruent(const Network& a, const Network& b, int unfold_bound) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const NetNode& x = a.nodes[i];
    const NetNode& y = b.nodes[i];
    if (x.name != y.name || x.neighbors != y.neighbors) return false;
    if (x.proc == y.proc) continue;
    if (unfold_top(x.proc, *a.defs, unfold_bound) !=
        unfold_top(y.proc, *b.defs, unfold_bound))
      return false;
  }
  return true;
}

}  // namespace atcws
