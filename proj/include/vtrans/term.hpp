#pragma once

// Terms over a signature with variables, names and binding constructs.
//
// Three kinds of leaves/nodes exist:
//   - Variable: an identifier starting with an uppercase letter. Variables
//     are the only things a Substitution replaces.
//   - Name: any other identifier that is not a declared constant. Names are
//     atoms (pi-calculus channels); they can be bound but never substituted.
//   - Construct: an operator applied to arguments, optionally binding one
//     identifier per declared binder slot.
//
// A binder whose identifier starts with an uppercase letter binds variables,
// otherwise it binds names. Alpha-conversion renames both kinds.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vtrans/error.hpp"

namespace vtrans {

inline bool is_variable_id(const std::string& id) {
  return !id.empty() && id[0] >= 'A' && id[0] <= 'Z';
}

/// One construct of a signature. `scopes[i]` lists the binder slots whose
/// bound identifier scopes over argument i. `name_args[i]` marks argument
/// positions that hold names rather than terms (used only for enumeration).
struct ConstructDecl {
  std::string name;
  std::size_t arity = 0;
  std::vector<std::string> slots;
  std::vector<std::vector<std::size_t>> scopes;
  std::vector<bool> name_args;

  bool has_binders() const { return !slots.empty(); }
};

class Signature {
 public:
  Signature() = default;
  explicit Signature(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<ConstructDecl>& constructs() const { return constructs_; }

  /// Declares a construct. `binders[i]` lists the slot identifiers scoping
  /// over argument i; slots are numbered in order of first appearance.
  void add(const std::string& cname, std::size_t arity,
           const std::vector<std::vector<std::string>>& binders = {},
           const std::vector<std::size_t>& name_positions = {}) {
    if (cname.empty()) throw StructuralError("construct with empty name");
    if (index_.count(cname))
      throw StructuralError("duplicate construct '" + cname + "' in signature '" + name_ + "'");
    if (!binders.empty() && binders.size() != arity)
      throw StructuralError("binding profile of '" + cname + "' has " +
                            std::to_string(binders.size()) + " entries, expected " +
                            std::to_string(arity));
    ConstructDecl d;
    d.name = cname;
    d.arity = arity;
    d.scopes.resize(arity);
    d.name_args.assign(arity, false);
    for (std::size_t i = 0; i < binders.size(); ++i) {
      for (const auto& slot : binders[i]) {
        auto it = std::find(d.slots.begin(), d.slots.end(), slot);
        std::size_t k = static_cast<std::size_t>(it - d.slots.begin());
        if (it == d.slots.end()) d.slots.push_back(slot);
        if (std::find(d.scopes[i].begin(), d.scopes[i].end(), k) != d.scopes[i].end())
          throw StructuralError("slot '" + slot + "' listed twice for one argument of '" + cname + "'");
        d.scopes[i].push_back(k);
      }
    }
    for (std::size_t p : name_positions) {
      if (p >= arity) throw StructuralError("name position out of range in '" + cname + "'");
      d.name_args[p] = true;
    }
    index_[cname] = constructs_.size();
    constructs_.push_back(std::move(d));
  }

  const ConstructDecl* find(const std::string& cname) const {
    auto it = index_.find(cname);
    return it == index_.end() ? nullptr : &constructs_[it->second];
  }

  bool has_binders() const {
    return std::any_of(constructs_.begin(), constructs_.end(),
                       [](const ConstructDecl& c) { return c.has_binders(); });
  }

 private:
  std::string name_;
  std::vector<ConstructDecl> constructs_;
  std::map<std::string, std::size_t> index_;
};

class Term {
 public:
  enum class Kind { Variable, Name, Construct };

  Term() : Term(variable("X")) {}

  static Term variable(std::string id) {
    if (!is_variable_id(id)) throw StructuralError("variable '" + id + "' must start with an uppercase letter");
    return Term(std::make_shared<Node>(Node{Kind::Variable, std::move(id), {}, {}, {}}));
  }
  static Term name(std::string id) {
    if (id.empty() || is_variable_id(id)) throw StructuralError("name '" + id + "' must not start with an uppercase letter");
    return Term(std::make_shared<Node>(Node{Kind::Name, std::move(id), {}, {}, {}}));
  }
  /// Low-level constructor; `scopes` follows ConstructDecl::scopes.
  static Term construct(std::string op, std::vector<std::string> binders, std::vector<Term> args,
                        std::vector<std::vector<std::size_t>> scopes) {
    if (scopes.size() != args.size()) scopes.resize(args.size());
    for (const auto& sc : scopes)
      for (std::size_t k : sc)
        if (k >= binders.size()) throw StructuralError("scope refers to undeclared binder slot in '" + op + "'");
    return Term(std::make_shared<Node>(
        Node{Kind::Construct, std::move(op), std::move(binders), std::move(args), std::move(scopes)}));
  }
  /// Checked constructor against a signature.
  static Term make(const Signature& sig, const std::string& op, std::vector<Term> args,
                   std::vector<std::string> binders = {}) {
    const ConstructDecl* d = sig.find(op);
    if (!d) throw StructuralError("unknown construct '" + op + "' in signature '" + sig.name() + "'");
    if (args.size() != d->arity)
      throw StructuralError("construct '" + op + "' expects " + std::to_string(d->arity) + " arguments, got " +
                            std::to_string(args.size()));
    if (binders.size() != d->slots.size())
      throw StructuralError("construct '" + op + "' expects " + std::to_string(d->slots.size()) +
                            " bound identifiers, got " + std::to_string(binders.size()));
    for (const auto& b : binders)
      if (b.empty()) throw StructuralError("empty bound identifier in '" + op + "'");
    return construct(op, std::move(binders), std::move(args), d->scopes);
  }

  Kind kind() const { return node_->kind; }
  bool is_variable() const { return node_->kind == Kind::Variable; }
  bool is_name() const { return node_->kind == Kind::Name; }
  bool is_construct() const { return node_->kind == Kind::Construct; }
  /// Identifier of a variable or name; operator of a construct.
  const std::string& id() const { return node_->id; }
  const std::vector<std::string>& binders() const { return node_->binders; }
  const std::vector<Term>& args() const { return node_->args; }
  const std::vector<std::vector<std::size_t>>& scopes() const { return node_->scopes; }

  /// Syntactic identity (no alpha-conversion).
  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.id() != b.id() || a.binders() != b.binders() ||
        a.args().size() != b.args().size() || a.scopes() != b.scopes())
      return false;
    for (std::size_t i = 0; i < a.args().size(); ++i)
      if (!(a.args()[i] == b.args()[i])) return false;
    return true;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node {
    Kind kind;
    std::string id;
    std::vector<std::string> binders;
    std::vector<Term> args;
    std::vector<std::vector<std::size_t>> scopes;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

using Substitution = std::map<std::string, Term>;

// ---------------------------------------------------------------------------
// Printing and parsing.

inline void print_term(std::ostream& os, const Term& t) {
  os << t.id();
  if (!t.is_construct()) return;
  if (!t.binders().empty()) {
    os << '[';
    for (std::size_t i = 0; i < t.binders().size(); ++i) os << (i ? ";" : "") << t.binders()[i];
    os << ']';
  }
  if (!t.args().empty() || !t.binders().empty()) {
    os << '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) os << ',';
      print_term(os, t.args()[i]);
    }
    os << ')';
  }
}

inline std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  print_term(os, t);
  return os;
}

inline std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s) {
    out += (first ? "" : ", ") + k + " -> " + to_string(v);
    first = false;
  }
  return out + "}";
}

namespace detail {

class TermParser {
 public:
  TermParser(const Signature& sig, const std::string& text) : sig_(sig), text_(text) {}

  Term parse() {
    Term t = term();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == ';' ||
           std::isspace(static_cast<unsigned char>(c));
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw StructuralError("term syntax error at position " + std::to_string(pos_) + ": " + msg + " in '" +
                          text_ + "'");
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_delim(text_[pos_])) ++pos_;
    if (start == pos_) fail("identifier expected");
    return text_.substr(start, pos_ - start);
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "' expected");
  }

  Term term() {
    std::string id = ident();
    const ConstructDecl* d = sig_.find(id);
    if (!d) {
      skip_ws();
      if (pos_ < text_.size() && (text_[pos_] == '(' || text_[pos_] == '['))
        fail("unknown construct '" + id + "'");
      return is_variable_id(id) ? Term::variable(id) : Term::name(id);
    }
    std::vector<std::string> binders;
    if (accept('[')) {
      if (!accept(']')) {
        binders.push_back(ident());
        while (accept(';')) binders.push_back(ident());
        expect(']');
      }
    }
    std::vector<Term> args;
    if (accept('(')) {
      if (!accept(')')) {
        args.push_back(term());
        while (accept(',')) args.push_back(term());
        expect(')');
      }
    }
    try {
      return Term::make(sig_, id, std::move(args), std::move(binders));
    } catch (const StructuralError& e) {
      fail(e.what());
    }
  }

  const Signature& sig_;
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses prefix notation `f[x;y](t1,...,tn)` against a signature.
inline Term parse_term(const Signature& sig, const std::string& text) {
  return detail::TermParser(sig, text).parse();
}

// ---------------------------------------------------------------------------
// Free identifiers.

namespace detail {

inline void collect_free(const Term& t, std::multiset<std::string>& bound, std::set<std::string>& vars,
                         std::set<std::string>& names) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      if (!bound.count(t.id())) vars.insert(t.id());
      return;
    case Term::Kind::Name:
      if (!bound.count(t.id())) names.insert(t.id());
      return;
    case Term::Kind::Construct:
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        for (std::size_t k : t.scopes()[i]) bound.insert(t.binders()[k]);
        collect_free(t.args()[i], bound, vars, names);
        for (std::size_t k : t.scopes()[i]) bound.erase(bound.find(t.binders()[k]));
      }
      return;
  }
}

inline void collect_all_ids(const Term& t, std::set<std::string>& out) {
  out.insert(t.id());
  for (const auto& b : t.binders()) out.insert(b);
  for (const auto& a : t.args()) collect_all_ids(a, out);
}

}  // namespace detail

inline std::set<std::string> free_vars(const Term& t) {
  std::multiset<std::string> bound;
  std::set<std::string> vars, names;
  detail::collect_free(t, bound, vars, names);
  return vars;
}

inline std::set<std::string> free_names(const Term& t) {
  std::multiset<std::string> bound;
  std::set<std::string> vars, names;
  detail::collect_free(t, bound, vars, names);
  return names;
}

/// Every identifier occurring anywhere in t (operators included).
inline std::set<std::string> all_ids(const Term& t) {
  std::set<std::string> out;
  detail::collect_all_ids(t, out);
  return out;
}

/// Free variables and free names together.
inline std::set<std::string> free_ids(const Term& t) {
  std::multiset<std::string> bound;
  std::set<std::string> vars, names;
  detail::collect_free(t, bound, vars, names);
  vars.insert(names.begin(), names.end());
  return vars;
}

/// First identifier of the form base, base1, base2, ... (or base' style for
/// bases ending in a digit) that is not in `avoid`. Keeps the variable/name
/// classification of `base`.
inline std::string fresh_id(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  std::string stem = base;
  while (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back()))) stem.pop_back();
  if (stem.empty()) stem = base + "_";
  for (std::size_t i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Renaming and substitution.

/// Renames free occurrences of identifier `from` (variable or name) to `to`.
/// The caller guarantees `to` does not occur in t, so no capture can arise.
inline Term rename_free(const Term& t, const std::string& from, const std::string& to) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      return t.id() == from ? Term::variable(to) : t;
    case Term::Kind::Name:
      return t.id() == from ? Term::name(to) : t;
    case Term::Kind::Construct: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        bool shadowed = false;
        for (std::size_t k : t.scopes()[i])
          if (t.binders()[k] == from) shadowed = true;
        args.push_back(shadowed ? t.args()[i] : rename_free(t.args()[i], from, to));
      }
      return Term::construct(t.id(), t.binders(), std::move(args), t.scopes());
    }
  }
  return t;
}

namespace detail {

inline Term substitute_impl(const Term& t, const Substitution& sigma, const std::set<std::string>& range_free,
                            std::set<std::string>& avoid) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = sigma.find(t.id());
      return it == sigma.end() ? t : it->second;
    }
    case Term::Kind::Name:
      return t;
    case Term::Kind::Construct:
      break;
  }
  std::vector<std::string> binders = t.binders();
  std::vector<Term> args = t.args();
  // Rename any binder that would capture a free identifier of the range
  // inside an argument where substitution actually happens.
  for (std::size_t k = 0; k < binders.size(); ++k) {
    if (!range_free.count(binders[k])) continue;
    bool needed = false;
    for (std::size_t i = 0; i < args.size() && !needed; ++i) {
      const auto& sc = t.scopes()[i];
      if (std::find(sc.begin(), sc.end(), k) == sc.end()) continue;
      for (const auto& x : free_vars(args[i])) {
        bool rebound = false;
        for (std::size_t j : sc)
          if (binders[j] == x) rebound = true;
        if (!rebound && sigma.count(x)) {
          needed = true;
          break;
        }
      }
    }
    if (!needed) continue;
    std::string fresh = fresh_id(binders[k], avoid);
    avoid.insert(fresh);
    for (std::size_t i = 0; i < args.size(); ++i) {
      const auto& sc = t.scopes()[i];
      if (std::find(sc.begin(), sc.end(), k) == sc.end()) continue;
      // An inner slot of the same construct with the same identifier would
      // shadow; in that case the occurrence belongs to the other slot.
      bool shadowed = false;
      for (std::size_t j : sc)
        if (j != k && binders[j] == binders[k] && j > k) shadowed = true;
      if (!shadowed) args[i] = rename_free(args[i], binders[k], fresh);
    }
    binders[k] = fresh;
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    Substitution inner;
    const Substitution* use = &sigma;
    bool drops = false;
    for (std::size_t j : t.scopes()[i])
      if (sigma.count(binders[j])) drops = true;
    if (drops) {
      inner = sigma;
      for (std::size_t j : t.scopes()[i]) inner.erase(binders[j]);
      use = &inner;
    }
    args[i] = substitute_impl(args[i], *use, range_free, avoid);
  }
  return Term::construct(t.id(), std::move(binders), std::move(args), t.scopes());
}

}  // namespace detail

/// Capture-avoiding simultaneous substitution E[sigma].
inline Term substitute(const Term& t, const Substitution& sigma) {
  if (sigma.empty()) return t;
  std::set<std::string> range_free;
  std::set<std::string> avoid = all_ids(t);
  for (const auto& [x, u] : sigma) {
    auto f = free_ids(u);
    range_free.insert(f.begin(), f.end());
    auto a = all_ids(u);
    avoid.insert(a.begin(), a.end());
    avoid.insert(x);
  }
  return detail::substitute_impl(t, sigma, range_free, avoid);
}

/// Plain replacement of free variables, deliberately allowing capture. Used
/// when instantiating translation images whose binders are meant to bind
/// identifiers of the plugged-in arguments.
inline Term substitute_raw(const Term& t, const Substitution& sigma) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = sigma.find(t.id());
      return it == sigma.end() ? t : it->second;
    }
    case Term::Kind::Name:
      return t;
    case Term::Kind::Construct: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        bool drops = false;
        for (std::size_t j : t.scopes()[i])
          if (sigma.count(t.binders()[j])) drops = true;
        if (!drops) {
          args.push_back(substitute_raw(t.args()[i], sigma));
        } else {
          Substitution inner = sigma;
          for (std::size_t j : t.scopes()[i]) inner.erase(t.binders()[j]);
          args.push_back(substitute_raw(t.args()[i], inner));
        }
      }
      return Term::construct(t.id(), t.binders(), std::move(args), t.scopes());
    }
  }
  return t;
}

/// (xi . sigma)(X) = sigma(X)[xi], with domain dom(sigma).
inline Substitution compose_subst(const Substitution& xi, const Substitution& sigma) {
  Substitution out;
  for (const auto& [x, u] : sigma) out.emplace(x, substitute(u, xi));
  return out;
}

// ---------------------------------------------------------------------------
// Alpha-equivalence via canonical binder numbering.

namespace detail {

inline void canonical_impl(const Term& t, std::map<std::string, std::vector<std::size_t>>& env,
                           std::size_t depth, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Name: {
      auto it = env.find(t.id());
      if (it != env.end() && !it->second.empty()) {
        out += (t.is_variable() ? "#V" : "#n") + std::to_string(it->second.back());
      } else {
        out += t.id();
      }
      return;
    }
    case Term::Kind::Construct:
      break;
  }
  out += t.id();
  out += '[';
  for (std::size_t k = 0; k < t.binders().size(); ++k) {
    out += (is_variable_id(t.binders()[k]) ? "V" : "n");
    out += ';';
  }
  out += "](";
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out += ',';
    // Slot k of this node gets level depth + k.
    for (std::size_t k : t.scopes()[i]) env[t.binders()[k]].push_back(depth + k);
    out += '{';
    for (std::size_t k : t.scopes()[i]) out += std::to_string(k) + ' ';
    out += '}';
    canonical_impl(t.args()[i], env, depth + t.binders().size(), out);
    for (std::size_t k : t.scopes()[i]) env[t.binders()[k]].pop_back();
  }
  out += ')';
}

}  // namespace detail

/// A string that is equal for two terms iff they are alpha-equivalent.
inline std::string alpha_key(const Term& t) {
  std::map<std::string, std::vector<std::size_t>> env;
  std::string out;
  detail::canonical_impl(t, env, 0, out);
  return out;
}

inline bool alpha_eq(const Term& a, const Term& b) { return alpha_key(a) == alpha_key(b); }

/// Standard alpha-representative: bound identifiers renamed in traversal
/// order to `_v0, _v1, ...` (variable binders use `V_0, V_1, ...`).
inline Term alpha_canonical(const Term& t) {
  std::size_t counter = 0;
  auto rec = [&](auto&& self, const Term& u) -> Term {
    if (!u.is_construct()) return u;
    std::vector<std::string> binders = u.binders();
    std::vector<Term> args = u.args();
    for (std::size_t k = 0; k < binders.size(); ++k) {
      std::string fresh = (is_variable_id(binders[k]) ? "V_" : "_v") + std::to_string(counter++);
      for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& sc = u.scopes()[i];
        if (std::find(sc.begin(), sc.end(), k) == sc.end()) continue;
        bool later = false;
        for (std::size_t j : sc)
          if (j > k && binders[j] == u.binders()[k]) later = true;
        if (!later) args[i] = rename_free(args[i], u.binders()[k], fresh);
      }
      binders[k] = fresh;
    }
    for (auto& a : args) a = self(self, a);
    return Term::construct(u.id(), std::move(binders), std::move(args), u.scopes());
  };
  return rec(rec, t);
}

/// Renames every bound identifier to a fresh one (distinct from all
/// identifiers in t and `avoid`). Produces an alpha-variant.
inline Term alpha_variant(const Term& t, std::set<std::string> avoid = {}) {
  auto ids = all_ids(t);
  avoid.insert(ids.begin(), ids.end());
  auto rec = [&](auto&& self, const Term& u) -> Term {
    if (!u.is_construct()) return u;
    std::vector<std::string> binders = u.binders();
    std::vector<Term> args = u.args();
    for (std::size_t k = 0; k < binders.size(); ++k) {
      std::string fresh = fresh_id(binders[k] + "1", avoid);
      avoid.insert(fresh);
      for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& sc = u.scopes()[i];
        if (std::find(sc.begin(), sc.end(), k) == sc.end()) continue;
        bool later = false;
        for (std::size_t j : sc)
          if (j > k && binders[j] == u.binders()[k]) later = true;
        if (!later) args[i] = rename_free(args[i], u.binders()[k], fresh);
      }
      binders[k] = fresh;
    }
    for (auto& a : args) a = self(self, a);
    return Term::construct(u.id(), std::move(binders), std::move(args), u.scopes());
  };
  return rec(rec, t);
}

// ---------------------------------------------------------------------------
// Prefix matching and head decomposition.

namespace detail {

struct MatchEnv {
  std::map<std::string, std::vector<std::size_t>> e, f;
};

inline std::optional<std::size_t> lookup(const std::map<std::string, std::vector<std::size_t>>& env,
                                         const std::string& id) {
  auto it = env.find(id);
  if (it == env.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

inline bool match_impl(const Term& e, const Term& f, MatchEnv& env, std::size_t depth, Substitution& sigma) {
  if (e.is_variable() || e.is_name()) {
    auto le = lookup(env.e, e.id());
    if (le) {
      if (f.kind() != e.kind()) return false;
      auto lf = lookup(env.f, f.id());
      return lf && *lf == *le;
    }
    if (e.is_name()) {
      return f.is_name() && f.id() == e.id() && !lookup(env.f, f.id());
    }
    // Free variable of e: f must not mention anything bound in f's context.
    for (const auto& id : free_ids(f))
      if (lookup(env.f, id)) return false;
    auto it = sigma.find(e.id());
    if (it == sigma.end()) {
      sigma.emplace(e.id(), f);
      return true;
    }
    return alpha_eq(it->second, f);
  }
  if (!f.is_construct() || f.id() != e.id() || f.args().size() != e.args().size() ||
      f.binders().size() != e.binders().size() || f.scopes() != e.scopes())
    return false;
  for (std::size_t k = 0; k < e.binders().size(); ++k)
    if (is_variable_id(e.binders()[k]) != is_variable_id(f.binders()[k])) return false;
  for (std::size_t i = 0; i < e.args().size(); ++i) {
    for (std::size_t k : e.scopes()[i]) {
      env.e[e.binders()[k]].push_back(depth + k);
      env.f[f.binders()[k]].push_back(depth + k);
    }
    bool ok = match_impl(e.args()[i], f.args()[i], env, depth + e.binders().size(), sigma);
    for (std::size_t k : e.scopes()[i]) {
      env.e[e.binders()[k]].pop_back();
      env.f[f.binders()[k]].pop_back();
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

/// Finds sigma with dom(sigma) = fv(e) and f =alpha e[sigma], if any.
inline std::optional<Substitution> match_prefix(const Term& e, const Term& f) {
  detail::MatchEnv env;
  Substitution sigma;
  if (!detail::match_impl(e, f, env, 0, sigma)) return std::nullopt;
  return sigma;
}

inline bool is_prefix(const Term& e, const Term& f) { return match_prefix(e, f).has_value(); }

struct HeadDecomposition {
  Term head;
  Substitution sigma;
};

/// Standard decomposition: keeps the top construct and every subterm that
/// mentions an identifier bound above it; each other maximal subterm becomes
/// a fresh variable X1, X2, ... in leftmost-outermost order. Name leaves stay
/// in the head because names are not expressions.
inline HeadDecomposition head_decompose(const Term& t) {
  if (!t.is_construct()) throw UsageError("head_decompose: '" + to_string(t) + "' is not a construct");
  std::set<std::string> avoid = all_ids(t);
  std::size_t counter = 0;
  Substitution sigma;
  auto next_var = [&]() {
    for (;;) {
      std::string cand = "X" + std::to_string(++counter);
      if (!avoid.count(cand)) return cand;
    }
  };
  auto mentions = [](const Term& u, const std::multiset<std::string>& bound) {
    for (const auto& id : free_ids(u))
      if (bound.count(id)) return true;
    return false;
  };
  auto rec = [&](auto&& self, const Term& u, std::multiset<std::string>& bound) -> Term {
    std::vector<Term> args;
    for (std::size_t i = 0; i < u.args().size(); ++i) {
      const Term& a = u.args()[i];
      for (std::size_t k : u.scopes()[i]) bound.insert(u.binders()[k]);
      if (a.is_name() || (a.is_variable() && bound.count(a.id()))) {
        args.push_back(a);
      } else if (a.is_construct() && mentions(a, bound)) {
        args.push_back(self(self, a, bound));
      } else {
        std::string x = next_var();
        sigma.emplace(x, a);
        args.push_back(Term::variable(x));
      }
      for (std::size_t k : u.scopes()[i]) bound.erase(bound.find(u.binders()[k]));
    }
    return Term::construct(u.id(), u.binders(), std::move(args), u.scopes());
  };
  std::multiset<std::string> bound;
  Term head = rec(rec, t, bound);
  return {head, sigma};
}

}  // namespace vtrans
