#include "atcws/term.hpp"

#include <memory>
#include <mutex>
#include <unordered_set>

namespace atcws {

int ctor_arity(Ctor c) {
  switch (c) {
    case Ctor::Hash:
    case Ctor::F:
      return 1;
    default:
      return 2;
  }
}

const char* ctor_name(Ctor c) {
  switch (c) {
    case Ctor::Pair: return "pair";
    case Ctor::Mac:  return "mac";
    case Ctor::Prf:  return "prf";
    case Ctor::Hash: return "hash";
    case Ctor::Enc:  return "enc";
    case Ctor::Dec:  return "dec";
    case Ctor::F:    return "F";
  }
  return "?";
}

bool ctor_from_name(const std::string& s, Ctor* out) {
  static const std::pair<const char*, Ctor> table[] = {
      {"pair", Ctor::Pair}, {"mac", Ctor::Mac}, {"prf", Ctor::Prf},
      {"hash", Ctor::Hash}, {"enc", Ctor::Enc}, {"dec", Ctor::Dec},
      {"F", Ctor::F},
  };
  for (const auto& [name, c] : table) {
    if (s == name) {
      *out = c;
      return true;
    }
  }
  return false;
}

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

struct TermHash {
  std::size_t operator()(const std::unique_ptr<Term>& t) const { return t->hash; }
};

struct TermEq {
  bool operator()(const std::unique_ptr<Term>& a, const std::unique_ptr<Term>& b) const {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Term::Kind::Atom:
        return a->name == b->name && a->atom_kind == b->atom_kind;
      case Term::Kind::ChainKey:
        return a->name == b->name && a->chain_index == b->chain_index;
      case Term::Kind::Var:
        return a->name == b->name;
      case Term::Kind::App:
        return a->ctor == b->ctor && a->args == b->args;
    }
    return false;
  }
};

struct TermPool {
  std::mutex mu;
  std::unordered_set<std::unique_ptr<Term>, TermHash, TermEq> set;

  TermPtr intern(std::unique_ptr<Term> t) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = set.find(t);
    if (it != set.end()) return it->get();
    return set.insert(std::move(t)).first->get();
  }
};

TermPool& pool() {
  static TermPool* p = new TermPool();
  return *p;
}

std::size_t term_hash(const Term& t) {
  std::size_t h = static_cast<std::size_t>(t.kind) * 1099511628211ULL;
  switch (t.kind) {
    case Term::Kind::Atom:
      h = hash_combine(h, std::hash<std::string>()(t.name));
      h = hash_combine(h, static_cast<std::size_t>(t.atom_kind));
      break;
    case Term::Kind::ChainKey:
      h = hash_combine(h, std::hash<std::string>()(t.name));
      h = hash_combine(h, static_cast<std::size_t>(t.chain_index));
      break;
    case Term::Kind::Var:
      h = hash_combine(h, std::hash<std::string>()(t.name) * 31);
      break;
    case Term::Kind::App:
      h = hash_combine(h, static_cast<std::size_t>(t.ctor));
      for (TermPtr a : t.args) h = hash_combine(h, a->hash);
      break;
  }
  return h;
}

std::string render(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Atom:
    case Term::Kind::Var:
      return t.name;
    case Term::Kind::ChainKey:
      return t.name + "_" + std::to_string(t.chain_index);
    case Term::Kind::App: {
      std::string s = ctor_name(t.ctor);
      s += '(';
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ',';
        s += t.args[i]->text;
      }
      s += ')';
      return s;
    }
  }
  return "?";
}

TermPtr finish(std::unique_ptr<Term> t) {
  t->hash = term_hash(*t);
  t->text = render(*t);
  return pool().intern(std::move(t));
}

}  // namespace

TermPtr Term::atom(const std::string& name, AtomKind k) {
  auto t = std::make_unique<Term>();
  t->kind = Kind::Atom;
  t->name = name;
  t->atom_kind = k;
  return finish(std::move(t));
}

TermPtr Term::integer(long v) { return atom(std::to_string(v), AtomKind::Other); }

TermPtr Term::chain_key(const std::string& chain, long index) {
  if (index < 0) throw ModelError("chain key index must be >= 0: " + chain);
  auto t = std::make_unique<Term>();
  t->kind = Kind::ChainKey;
  t->name = chain;
  t->chain_index = index;
  return finish(std::move(t));
}

TermPtr Term::var(const std::string& name) {
  auto t = std::make_unique<Term>();
  t->kind = Kind::Var;
  t->name = name;
  t->ground = false;
  return finish(std::move(t));
}

TermPtr Term::app(Ctor c, TermVec args) {
  if (static_cast<int>(args.size()) != ctor_arity(c))
    throw ModelError(std::string("arity mismatch for constructor ") + ctor_name(c));
  // normal-form rewrites on already-normal arguments
  if (c == Ctor::F && args[0]->kind == Kind::ChainKey && args[0]->chain_index > 0)
    return chain_key(args[0]->name, args[0]->chain_index - 1);
  if (c == Ctor::Dec && args[1]->kind == Kind::App && args[1]->ctor == Ctor::Enc &&
      args[1]->args[0] == args[0])
    return args[1]->args[1];
  auto t = std::make_unique<Term>();
  t->kind = Kind::App;
  t->ctor = c;
  t->args = std::move(args);
  for (TermPtr a : t->args) t->ground = t->ground && a->ground;
  return finish(std::move(t));
}

TermPtr normalize(TermPtr t) {
  if (t->kind != Term::Kind::App) return t;
  TermVec args;
  args.reserve(t->args.size());
  bool changed = false;
  for (TermPtr a : t->args) {
    TermPtr n = normalize(a);
    changed = changed || n != a;
    args.push_back(n);
  }
  if (!changed) {
    // re-apply the top-level rewrites in case t was built raw
    TermPtr r = Term::app(t->ctor, args);
    return r;
  }
  return Term::app(t->ctor, std::move(args));
}

void subterms(TermPtr t, TermVec& out) {
  for (TermPtr s : out)
    if (s == t) return;
  out.push_back(t);
  if (t->kind == Term::Kind::App)
    for (TermPtr a : t->args) subterms(a, out);
}

}  // namespace atcws
