#include "atcws/dsl.hpp"

#include <algorithm>
#include <sstream>

namespace atcws {

const Network* SourceModel::network(const std::string& name) const {
  for (const auto& [n, net] : networks)
    if (n == name) return &net;
  return nullptr;
}

const KnowledgeSequence* SourceModel::phi(const std::string& name) const {
  for (const auto& [n, p] : phis)
    if (n == name) return &p;
  return nullptr;
}

namespace {

// ---- lexing -----------------------------------------------------------------

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0, col = 0;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;
  Token tok;

  explicit Lexer(const std::string& s) : src(s) { advance(); }

  void bump(char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void advance() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {  // line comment
        while (pos < src.size() && src[pos] != '\n') bump(src[pos]);
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump(c);
        continue;
      }
      break;
    }
    tok = Token{};
    tok.line = line;
    tok.col = col;
    if (pos >= src.size()) {
      tok.kind = Token::Kind::End;
      return;
    }
    char c = src[pos];
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos < src.size() &&
             (isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
        s += src[pos];
        bump(src[pos]);
      }
      tok.kind = Token::Kind::Ident;
      tok.text = std::move(s);
      return;
    }
    if (isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos + 1 < src.size() && isdigit(static_cast<unsigned char>(src[pos + 1])))) {
      std::string s;
      if (c == '-') {
        s += c;
        bump(c);
      }
      while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos]))) {
        s += src[pos];
        bump(src[pos]);
      }
      tok.kind = Token::Kind::Int;
      tok.text = std::move(s);
      return;
    }
    tok.kind = Token::Kind::Punct;
    tok.text = std::string(1, c);
    bump(c);
  }
};

struct Parser {
  Lexer lx;
  std::map<std::string, TermPtr> atoms;
  std::set<std::string> chains;
  DefTable defs;
  SourceModel model;

  explicit Parser(const std::string& text) : lx(text) {}

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(lx.tok.line, lx.tok.col, what);
  }

  bool at_ident(const char* s) {
    return lx.tok.kind == Token::Kind::Ident && lx.tok.text == s;
  }
  bool at_punct(char c) {
    return lx.tok.kind == Token::Kind::Punct && lx.tok.text[0] == c;
  }
  void expect_punct(char c) {
    if (!at_punct(c)) fail(std::string("expected '") + c + "'");
    lx.advance();
  }
  void expect_kw(const char* s) {
    if (!at_ident(s)) fail(std::string("expected '") + s + "'");
    lx.advance();
  }
  std::string ident() {
    if (lx.tok.kind != Token::Kind::Ident) fail("expected an identifier");
    std::string s = lx.tok.text;
    lx.advance();
    return s;
  }
  long integer() {
    if (lx.tok.kind != Token::Kind::Int) fail("expected an integer");
    long v = std::stol(lx.tok.text);
    lx.advance();
    return v;
  }
  void maybe_semi() {
    if (at_punct(';')) lx.advance();
  }

  // identifier in a term position
  TermPtr resolve(const std::string& name, const std::set<std::string>& bound) {
    if (bound.count(name)) return Term::var(name);
    auto it = atoms.find(name);
    if (it != atoms.end()) return it->second;
    // chain key: <chain>_<digits> with a declared chain id
    auto us = name.rfind('_');
    if (us != std::string::npos && us + 1 < name.size()) {
      std::string base = name.substr(0, us);
      std::string idx = name.substr(us + 1);
      if (chains.count(base) &&
          std::all_of(idx.begin(), idx.end(),
                      [](char c) { return isdigit(static_cast<unsigned char>(c)); }))
        return Term::chain_key(base, std::stol(idx));
    }
    fail("unresolved identifier " + name);
  }

  TermPtr parse_term(const std::set<std::string>& bound) {
    if (lx.tok.kind == Token::Kind::Int) return Term::integer(integer());
    std::string name = ident();
    if (!at_punct('(')) return resolve(name, bound);
    Ctor c;
    if (!ctor_from_name(name, &c)) fail("unknown constructor " + name);
    lx.advance();
    TermVec args;
    if (!at_punct(')')) {
      args.push_back(parse_term(bound));
      while (at_punct(',')) {
        lx.advance();
        args.push_back(parse_term(bound));
      }
    }
    expect_punct(')');
    return Term::app(c, std::move(args));
  }

  ProcPtr parse_proc(std::set<std::string> bound) {
    if (at_ident("nil")) {
      lx.advance();
      return Process::nil();
    }
    if (at_ident("out")) {
      lx.advance();
      expect_punct('(');
      TermPtr w = parse_term(bound);
      expect_punct(')');
      expect_punct('.');
      return Process::bang(w, parse_proc(bound));
    }
    if (at_ident("in")) {
      lx.advance();
      expect_punct('(');
      std::string x = ident();
      expect_punct(')');
      expect_punct('.');
      auto inner = bound;
      inner.insert(x);
      ProcPtr body = parse_proc(inner);
      expect_kw("timeout");
      return Process::recv(x, body, parse_proc(bound));
    }
    if (at_ident("choice")) {
      lx.advance();
      expect_punct('{');
      ProcVec branches;
      for (;;) {
        expect_kw("tau");
        expect_punct('.');
        branches.push_back(parse_proc(bound));
        if (at_punct('|')) {
          lx.advance();
          continue;
        }
        break;
      }
      expect_punct('}');
      expect_kw("timeout");
      return Process::sum(std::move(branches), parse_proc(bound));
    }
    if (at_ident("sleep")) {
      lx.advance();
      expect_punct('.');
      return Process::sleep(parse_proc(bound));
    }
    if (at_ident("if")) {
      lx.advance();
      TermPtr l = parse_term(bound);
      expect_punct('=');
      TermPtr r = parse_term(bound);
      expect_kw("then");
      ProcPtr t = parse_proc(bound);
      expect_kw("else");
      return Process::match(l, r, t, parse_proc(bound));
    }
    if (at_ident("let")) {
      lx.advance();
      std::string x = ident();
      expect_punct('=');
      std::string rule = ident();
      if (!rule_by_name(rule)) fail("unknown deduction rule " + rule);
      expect_punct('(');
      TermVec prem;
      if (!at_punct(')')) {
        prem.push_back(parse_term(bound));
        while (at_punct(',')) {
          lx.advance();
          prem.push_back(parse_term(bound));
        }
      }
      expect_punct(')');
      expect_kw("in");
      auto inner = bound;
      inner.insert(x);
      ProcPtr t = parse_proc(inner);
      expect_kw("else");
      return Process::deduce(std::move(prem), rule, x, t, parse_proc(bound));
    }
    // call
    std::string name = ident();
    TermVec args;
    if (at_punct('(')) {
      lx.advance();
      if (!at_punct(')')) {
        args.push_back(parse_term(bound));
        while (at_punct(',')) {
          lx.advance();
          args.push_back(parse_term(bound));
        }
      }
      expect_punct(')');
    }
    return Process::call(name, std::move(args));
  }

  void parse_atoms() {
    expect_punct('{');
    while (!at_punct('}')) {
      std::string kind = ident();
      AtomKind k;
      if (kind == "node") k = AtomKind::NodeName;
      else if (kind == "tag") k = AtomKind::Tag;
      else if (kind == "nonce") k = AtomKind::Nonce;
      else if (kind == "key") k = AtomKind::BaseKey;
      else if (kind == "other") k = AtomKind::Other;
      else fail("unknown atom kind " + kind);
      for (;;) {
        std::string name = ident();
        atoms[name] = Term::atom(name, k);
        if (at_punct(',')) {
          lx.advance();
          continue;
        }
        break;
      }
      maybe_semi();
    }
    lx.advance();
  }

  void parse_network() {
    std::string name = ident();
    expect_punct('{');
    std::vector<NetNode> nodes;
    while (at_ident("node")) {
      lx.advance();
      std::string nn = ident();
      expect_punct('[');
      ProcPtr p = parse_proc({});
      expect_punct(']');
      expect_kw("nbr");
      expect_punct('{');
      std::vector<std::string> nbrs;
      while (!at_punct('}')) {
        nbrs.push_back(ident());
        if (at_punct(',')) lx.advance();
      }
      lx.advance();
      nodes.push_back(NetNode::make(nn, p, std::move(nbrs)));
    }
    expect_punct('}');
    model.networks.emplace_back(name, Network::make(std::move(nodes), nullptr));
  }

  void parse_phi() {
    std::string name = ident();
    expect_punct('{');
    std::vector<Knowledge> slots;
    Knowledge acc = Knowledge::of({});
    auto ext = KnowledgeSequence::Extension::Constant;
    while (!at_punct('}')) {
      if (at_ident("slot")) {
        lx.advance();
        expect_punct('{');
        TermVec gens;
        while (!at_punct('}')) {
          gens.push_back(parse_term({}));
          if (at_punct(',')) lx.advance();
        }
        lx.advance();
        acc = acc.union_with(Knowledge::of(std::move(gens)));
        slots.push_back(acc);
        continue;
      }
      if (at_ident("extend")) {
        lx.advance();
        std::string e = ident();
        if (e == "constant") ext = KnowledgeSequence::Extension::Constant;
        else if (e == "generated") ext = KnowledgeSequence::Extension::Generated;
        else fail("unknown extension " + e);
        maybe_semi();
        continue;
      }
      fail("expected 'slot' or 'extend'");
    }
    lx.advance();
    if (slots.empty()) fail("phi needs at least one slot");
    model.phis.emplace_back(name, KnowledgeSequence::of(std::move(slots), ext));
  }

  void parse_query() {
    QuerySpec q;
    std::string kind = ident();
    if (kind == "wf") q.kind = QuerySpec::Kind::Wf;
    else if (kind == "sim") q.kind = QuerySpec::Kind::Sim;
    else if (kind == "tgndc") q.kind = QuerySpec::Kind::Tgndc;
    else if (kind == "explore") q.kind = QuerySpec::Kind::Explore;
    else fail("unknown check kind " + kind);
    q.target = ident();
    for (;;) {
      if (at_ident("spec")) {
        lx.advance();
        q.spec = ident();
        continue;
      }
      if (at_ident("observe")) {
        lx.advance();
        expect_punct('{');
        while (!at_punct('}')) {
          q.observe.insert(ident());
          if (at_punct(',')) lx.advance();
        }
        lx.advance();
        continue;
      }
      if (at_ident("attackers")) {
        lx.advance();
        expect_punct('{');
        while (!at_punct('}')) {
          q.attackers.push_back(ident());
          if (at_punct(',')) lx.advance();
        }
        lx.advance();
        continue;
      }
      if (at_ident("phi")) {
        lx.advance();
        q.phi = ident();
        continue;
      }
      if (at_ident("bound") || at_ident("depth") || at_ident("extras") ||
          at_ident("budget")) {
        std::string key = ident();
        q.bounds[key] = integer();
        continue;
      }
      break;
    }
    maybe_semi();
    model.queries.push_back(std::move(q));
  }

  void validate_calls(ProcPtr p) {
    switch (p->kind) {
      case Process::Kind::Call: {
        auto it = defs.find(p->name);
        if (it == defs.end())
          throw ParseError(0, 0, "unresolved process name " + p->name);
        if (it->second.params.size() != p->args.size())
          throw ParseError(0, 0, "call to " + p->name + " with wrong arity");
        return;
      }
      case Process::Kind::Bang:
      case Process::Kind::Sleep:
        validate_calls(p->cont);
        return;
      case Process::Kind::RcvTimeout:
        validate_calls(p->body);
        validate_calls(p->timeout);
        return;
      case Process::Kind::SumTimeout:
        for (ProcPtr b : p->branches) validate_calls(b);
        validate_calls(p->timeout);
        return;
      case Process::Kind::Match:
      case Process::Kind::Deduce:
        validate_calls(p->then_p);
        validate_calls(p->else_p);
        return;
      case Process::Kind::Nil:
        return;
    }
  }

  SourceModel run() {
    while (lx.tok.kind != Token::Kind::End) {
      if (at_ident("atoms")) {
        lx.advance();
        parse_atoms();
      } else if (at_ident("chain")) {
        lx.advance();
        chains.insert(ident());
        maybe_semi();
      } else if (at_ident("def")) {
        lx.advance();
        std::string name = ident();
        std::vector<std::string> params;
        expect_punct('(');
        if (!at_punct(')')) {
          params.push_back(ident());
          while (at_punct(',')) {
            lx.advance();
            params.push_back(ident());
          }
        }
        expect_punct(')');
        expect_punct('=');
        std::set<std::string> bound(params.begin(), params.end());
        ProcPtr body = parse_proc(bound);
        if (defs.count(name)) fail("duplicate definition " + name);
        defs[name] = ProcessDef{name, std::move(params), body};
      } else if (at_ident("network")) {
        lx.advance();
        parse_network();
      } else if (at_ident("phi")) {
        lx.advance();
        parse_phi();
      } else if (at_ident("check")) {
        lx.advance();
        parse_query();
      } else {
        fail("expected a top-level declaration");
      }
    }
    model.atoms = atoms;
    model.chains = chains;
    model.defs = std::make_shared<DefTable>(defs);
    for (auto& [name, net] : model.networks) {
      net = Network::make(net.nodes, model.defs);
      for (const auto& n : net.nodes) validate_calls(n.proc);
    }
    for (const auto& [dn, def] : *model.defs) {
      validate_calls(def.body);
      std::set<std::string> fv;
      free_vars(def.body, fv);
      for (const auto& v : fv)
        if (std::find(def.params.begin(), def.params.end(), v) == def.params.end())
          throw ParseError(0, 0, "unbound variable " + v + " in definition " + dn);
    }
    for (const auto& q : model.queries) {
      if (!model.network(q.target))
        throw ParseError(0, 0, "query names unknown network " + q.target);
      if (!q.spec.empty() && !model.network(q.spec))
        throw ParseError(0, 0, "query names unknown network " + q.spec);
      if (!q.phi.empty() && !model.phi(q.phi))
        throw ParseError(0, 0, "query names unknown phi " + q.phi);
    }
    return std::move(model);
  }
};

// ---- emission -----------------------------------------------------------------

void indent(std::ostringstream& os, int n) {
  for (int i = 0; i < n; ++i) os << ' ';
}

void emit_proc(std::ostringstream& os, ProcPtr p, int ind) {
  switch (p->kind) {
    case Process::Kind::Nil:
      os << "nil";
      return;
    case Process::Kind::Bang:
      os << "out(" << to_string(p->payload) << ").";
      emit_proc(os, p->cont, ind);
      return;
    case Process::Kind::Sleep:
      os << "sleep.";
      emit_proc(os, p->cont, ind);
      return;
    case Process::Kind::RcvTimeout:
      os << "in(" << p->binder << ").\n";
      indent(os, ind + 2);
      emit_proc(os, p->body, ind + 2);
      os << "\n";
      indent(os, ind);
      os << "timeout ";
      emit_proc(os, p->timeout, ind);
      return;
    case Process::Kind::SumTimeout: {
      os << "choice {\n";
      for (std::size_t i = 0; i < p->branches.size(); ++i) {
        indent(os, ind + 2);
        if (i) os << "| ";
        os << "tau. ";
        emit_proc(os, p->branches[i], ind + 4);
        os << "\n";
      }
      indent(os, ind);
      os << "} timeout ";
      emit_proc(os, p->timeout, ind);
      return;
    }
    case Process::Kind::Match:
      os << "if " << to_string(p->left) << " = " << to_string(p->right) << " then\n";
      indent(os, ind + 2);
      emit_proc(os, p->then_p, ind + 2);
      os << "\n";
      indent(os, ind);
      os << "else ";
      emit_proc(os, p->else_p, ind);
      return;
    case Process::Kind::Deduce: {
      os << "let " << p->binder << " = " << p->rule << "(";
      for (std::size_t i = 0; i < p->premises.size(); ++i) {
        if (i) os << ",";
        os << to_string(p->premises[i]);
      }
      os << ") in\n";
      indent(os, ind + 2);
      emit_proc(os, p->then_p, ind + 2);
      os << "\n";
      indent(os, ind);
      os << "else ";
      emit_proc(os, p->else_p, ind);
      return;
    }
    case Process::Kind::Call: {
      os << p->name << "(";
      for (std::size_t i = 0; i < p->args.size(); ++i) {
        if (i) os << ",";
        os << to_string(p->args[i]);
      }
      os << ")";
      return;
    }
  }
}

const char* kind_name(AtomKind k) {
  switch (k) {
    case AtomKind::NodeName: return "node";
    case AtomKind::Tag: return "tag";
    case AtomKind::Nonce: return "nonce";
    case AtomKind::BaseKey: return "key";
    case AtomKind::Other: return "other";
  }
  return "other";
}

}  // namespace

SourceModel parse(const std::string& text) { return Parser(text).run(); }

std::string emit(const SourceModel& model) {
  std::ostringstream os;
  if (!model.atoms.empty()) {
    os << "atoms {\n";
    for (const auto& [name, t] : model.atoms)
      os << "  " << kind_name(t->atom_kind) << " " << name << ";\n";
    os << "}\n";
  }
  for (const auto& c : model.chains) os << "chain " << c << ";\n";
  if (model.defs) {
    for (const auto& [name, def] : *model.defs) {
      os << "\ndef " << name << "(";
      for (std::size_t i = 0; i < def.params.size(); ++i) {
        if (i) os << ",";
        os << def.params[i];
      }
      os << ") =\n  ";
      emit_proc(os, def.body, 2);
      os << "\n";
    }
  }
  for (const auto& [name, net] : model.networks) {
    os << "\nnetwork " << name << " {\n";
    for (const auto& n : net.nodes) {
      os << "  node " << n.name << " [\n    ";
      emit_proc(os, n.proc, 4);
      os << "\n  ] nbr {";
      for (std::size_t i = 0; i < n.neighbors.size(); ++i) {
        if (i) os << ",";
        os << n.neighbors[i];
      }
      os << "}\n";
    }
    os << "}\n";
  }
  for (const auto& [name, phi] : model.phis) {
    os << "\nphi " << name << " {\n";
    for (int j = 0; j < phi.size(); ++j) {
      os << "  slot {";
      const TermVec& cur = phi.slots[j].gens;
      bool first = true;
      for (TermPtr t : cur) {
        if (j > 0 && phi.slots[j - 1].contains(t)) continue;  // delta only
        os << (first ? " " : ", ") << to_string(t);
        first = false;
      }
      os << " }\n";
    }
    os << "  extend "
       << (phi.extension == KnowledgeSequence::Extension::Constant ? "constant" : "generated")
       << ";\n}\n";
  }
  for (const auto& q : model.queries) {
    os << "\ncheck ";
    switch (q.kind) {
      case QuerySpec::Kind::Wf: os << "wf"; break;
      case QuerySpec::Kind::Sim: os << "sim"; break;
      case QuerySpec::Kind::Tgndc: os << "tgndc"; break;
      case QuerySpec::Kind::Explore: os << "explore"; break;
    }
    os << " " << q.target;
    if (!q.spec.empty()) os << " spec " << q.spec;
    if (!q.observe.empty()) {
      os << " observe {";
      bool first = true;
      for (const auto& o : q.observe) {
        if (!first) os << ",";
        os << o;
        first = false;
      }
      os << "}";
    }
    if (!q.attackers.empty()) {
      os << " attackers {";
      for (std::size_t i = 0; i < q.attackers.size(); ++i) {
        if (i) os << ",";
        os << q.attackers[i];
      }
      os << "}";
    }
    if (!q.phi.empty()) os << " phi " << q.phi;
    for (const auto& [k, v] : q.bounds) os << " " << k << " " << v;
    os << "\n";
  }
  return os.str();
}

TermScope scope_of(const SourceModel& model) { return {model.atoms, model.chains}; }

TermScope scope_of(const ProtocolInstance& inst) { return {inst.atoms, inst.chains}; }

TermPtr parse_term(const std::string& text, const TermScope& scope) {
  Parser p(text);
  p.atoms = scope.atoms;
  p.chains = scope.chains;
  TermPtr t = p.parse_term({});
  if (p.lx.tok.kind != Token::Kind::End)
    throw ParseError(p.lx.tok.line, p.lx.tok.col, "trailing input after term");
  return t;
}

Trace parse_trace(const std::string& text, const TermScope& scope) {
  Trace out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    std::string body = line.substr(start);
    if (body[0] == '#') continue;
    if (body == "tau") {
      out.steps.push_back(Label::tau());
      continue;
    }
    if (body == "sigma") {
      out.steps.push_back(Label::sigma());
      continue;
    }
    if (body.rfind("out ", 0) == 0) {
      auto gt = body.rfind('>');
      if (gt == std::string::npos) throw ParseError(lineno, 1, "missing '>' in out line");
      TermPtr w = parse_term(body.substr(4, gt - 4), scope);
      std::string recv = body.substr(gt + 1);
      std::vector<std::string> names;
      std::string cur;
      for (char c : recv) {
        if (isalnum(static_cast<unsigned char>(c)) || c == '_') {
          cur += c;
        } else if (!cur.empty()) {
          names.push_back(cur);
          cur.clear();
        }
      }
      if (!cur.empty()) names.push_back(cur);
      if (names.empty()) throw ParseError(lineno, 1, "empty receiver set in out line");
      out.steps.push_back(Label::obs(w, std::move(names)));
      continue;
    }
    if (body.rfind("in ", 0) == 0) {
      std::istringstream ls(body.substr(3));
      std::string sender;
      ls >> sender;
      std::string rest;
      std::getline(ls, rest);
      out.steps.push_back(Label::input(sender, parse_term(rest, scope)));
      continue;
    }
    throw ParseError(lineno, 1, "unrecognized trace line: " + body);
  }
  return out;
}

SourceModel source_of_instance(const ProtocolInstance& inst, int max_sigma,
                               int candidate_depth) {
  SourceModel model;
  model.atoms = inst.atoms;
  model.chains = inst.chains;
  model.defs = inst.system.defs;
  std::string base = inst.name + "_" + inst.variant;
  std::replace(base.begin(), base.end(), '-', '_');
  model.networks.emplace_back(base, inst.system);
  model.networks.emplace_back(base + "_spec", inst.abstraction);
  model.phis.emplace_back(base + "_phi", inst.knowledge);

  QuerySpec wf;
  wf.kind = QuerySpec::Kind::Wf;
  wf.target = base;
  model.queries.push_back(wf);

  if (inst.variant == "integrity") {
    QuerySpec q;
    q.kind = QuerySpec::Kind::Tgndc;
    q.target = base;
    q.spec = base + "_spec";
    q.phi = base + "_phi";
    q.observe = inst.wiring.observed;
    q.attackers = inst.wiring.attacker_nodes;
    q.bounds["bound"] = max_sigma;
    q.bounds["depth"] = candidate_depth;
    model.queries.push_back(std::move(q));
  }
  return model;
}

}  // namespace atcws
