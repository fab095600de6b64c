#pragma once

// Syntax of the pi-calculus fragment without matching, tau-prefix and
// choice, extended with process variables and external barb constants.
//
// Concrete grammar (| is lowest precedence and left-associative):
//   P ::= 0 | x!y | x!y.P | x(y).P | P | P | new x,y.P | !P | X | @w | (P)
// Names starting with '_' are reserved for generated names and are only
// accepted when the parser is told so.

#include <cctype>
#include <cstddef>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vtrans/error.hpp"

namespace vtrans {

class PiTerm {
 public:
  enum class Kind { Nil, Out, In, Par, Res, Repl, Var, ExtBarb };

  PiTerm() : PiTerm(nil()) {}

  static PiTerm nil() {
    static const PiTerm z(std::make_shared<Node>(Node{Kind::Nil, {}, {}, {}}));
    return z;
  }
  static PiTerm out(std::string subject, std::string object, PiTerm cont = nil()) {
    return PiTerm(std::make_shared<Node>(Node{Kind::Out, std::move(subject), std::move(object), {std::move(cont)}}));
  }
  static PiTerm in(std::string subject, std::string bound, PiTerm cont) {
    return PiTerm(std::make_shared<Node>(Node{Kind::In, std::move(subject), std::move(bound), {std::move(cont)}}));
  }
  static PiTerm par(PiTerm l, PiTerm r) {
    return PiTerm(std::make_shared<Node>(Node{Kind::Par, {}, {}, {std::move(l), std::move(r)}}));
  }
  static PiTerm res(std::string bound, PiTerm body) {
    return PiTerm(std::make_shared<Node>(Node{Kind::Res, std::move(bound), {}, {std::move(body)}}));
  }
  static PiTerm repl(PiTerm body) { return PiTerm(std::make_shared<Node>(Node{Kind::Repl, {}, {}, {std::move(body)}})); }
  static PiTerm var(std::string id) { return PiTerm(std::make_shared<Node>(Node{Kind::Var, std::move(id), {}, {}})); }
  static PiTerm ext(std::string id) { return PiTerm(std::make_shared<Node>(Node{Kind::ExtBarb, std::move(id), {}, {}})); }

  /// Parallel composition of a list, left-nested; 0 for the empty list.
  static PiTerm par_all(const std::vector<PiTerm>& ps) {
    if (ps.empty()) return nil();
    PiTerm acc = ps[0];
    for (std::size_t i = 1; i < ps.size(); ++i) acc = par(acc, ps[i]);
    return acc;
  }

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }

  // Out: subject/object; In: subject/bound; Res: bound; Var, ExtBarb: id.
  const std::string& subject() const { return node_->a; }
  const std::string& object() const { return node_->b; }
  const std::string& bound() const { return node_->kind == Kind::In ? node_->b : node_->a; }
  const std::string& id() const { return node_->a; }

  const PiTerm& cont() const { return node_->kids.at(0); }  // Out, In, Res, Repl
  const PiTerm& body() const { return node_->kids.at(0); }
  const PiTerm& left() const { return node_->kids.at(0); }
  const PiTerm& right() const { return node_->kids.at(1); }

  friend bool operator==(const PiTerm& x, const PiTerm& y) {
    if (x.node_ == y.node_) return true;
    const Node& a = *x.node_;
    const Node& b = *y.node_;
    return a.kind == b.kind && a.a == b.a && a.b == b.b && a.kids == b.kids;
  }

 private:
  struct Node {
    Kind kind;
    std::string a, b;
    std::vector<PiTerm> kids;
  };
  explicit PiTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Printing.

namespace detail {

inline void print_pi(std::string& out, const PiTerm& p, bool operand);

inline void print_pi_prefix(std::string& out, const PiTerm& p) { print_pi(out, p, true); }

inline void print_pi(std::string& out, const PiTerm& p, bool operand) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Nil: out += "0"; return;
    case K::Var: out += p.id(); return;
    case K::ExtBarb: out += "@" + p.id(); return;
    case K::Out:
      out += p.subject() + "!" + p.object();
      if (!p.cont().is(K::Nil)) {
        out += ".";
        print_pi_prefix(out, p.cont());
      }
      return;
    case K::In:
      out += p.subject() + "(" + p.bound() + ").";
      print_pi_prefix(out, p.cont());
      return;
    case K::Res: {
      out += "new " + p.bound();
      const PiTerm* b = &p.body();
      while (b->is(K::Res)) {
        out += "," + b->bound();
        b = &b->body();
      }
      out += ".";
      print_pi_prefix(out, *b);
      return;
    }
    case K::Repl:
      out += "!";
      print_pi_prefix(out, p.body());
      return;
    case K::Par:
      if (operand) out += "(";
      print_pi(out, p.left(), false);
      out += " | ";
      print_pi(out, p.right(), true);
      if (operand) out += ")";
      return;
  }
}

}  // namespace detail

inline std::string print_pi(const PiTerm& p) {
  std::string out;
  detail::print_pi(out, p, false);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const PiTerm& p) { return os << print_pi(p); }

// ---------------------------------------------------------------------------
// Parsing.

struct PiParseOptions {
  bool allow_reserved = false;  // accept names starting with '_'
};

namespace detail {

class PiParser {
 public:
  PiParser(const std::string& text, PiParseOptions opts) : s_(text), opts_(opts) {}

  PiTerm parse() {
    PiTerm p = parse_par();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("pi syntax error at column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected an identifier");
    return s_.substr(start, pos_ - start);
  }

  std::string name() {
    std::size_t at = (skip(), pos_);
    std::string n = ident();
    check_name(n, at);
    return n;
  }

  void check_name(const std::string& n, std::size_t at) {
    bool ok = std::islower(static_cast<unsigned char>(n[0])) || (opts_.allow_reserved && n[0] == '_');
    if (!ok || n == "new") {
      pos_ = at;
      if (n[0] == '_') fail("name '" + n + "' is in the reserved namespace");
      fail("'" + n + "' is not a valid name");
    }
  }

  PiTerm parse_par() {
    PiTerm acc = parse_prefix();
    while (peek('|')) {
      ++pos_;
      acc = PiTerm::par(acc, parse_prefix());
    }
    return acc;
  }

  PiTerm parse_prefix() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      PiTerm p = parse_par();
      expect(')');
      return p;
    }
    if (c == '!') {
      ++pos_;
      return PiTerm::repl(parse_prefix());
    }
    if (c == '@') {
      ++pos_;
      return PiTerm::ext(name());
    }
    if (c == '0' && (pos_ + 1 == s_.size() || !ident_char(s_[pos_ + 1]))) {
      ++pos_;
      return PiTerm::nil();
    }
    std::size_t at = pos_;
    std::string id = ident();
    if (id == "new") {
      std::vector<std::string> bound{name()};
      while (peek(',')) {
        ++pos_;
        bound.push_back(name());
      }
      expect('.');
      PiTerm body = parse_prefix();
      for (auto it = bound.rbegin(); it != bound.rend(); ++it) body = PiTerm::res(*it, body);
      return body;
    }
    if (std::isupper(static_cast<unsigned char>(id[0]))) return PiTerm::var(id);
    check_name(id, at);
    if (peek('!')) {
      ++pos_;
      std::string obj = name();
      if (peek('.')) {
        ++pos_;
        return PiTerm::out(id, obj, parse_prefix());
      }
      return PiTerm::out(id, obj);
    }
    if (peek('(')) {
      ++pos_;
      std::string y = name();
      expect(')');
      expect('.');
      return PiTerm::in(id, y, parse_prefix());
    }
    fail("expected '!' or '(' after name '" + id + "'");
  }

  const std::string& s_;
  PiParseOptions opts_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PiTerm parse_pi(const std::string& text, PiParseOptions opts = {}) {
  return detail::PiParser(text, opts).parse();
}

// ---------------------------------------------------------------------------
// Names, variables and substitution.

/// n(P): every name occurring in P, free or bound. External barb ids are
/// not names.
inline std::set<std::string> pi_names(const PiTerm& p) {
  std::set<std::string> out;
  auto rec = [&](auto&& self, const PiTerm& q) -> void {
    using K = PiTerm::Kind;
    switch (q.kind()) {
      case K::Out: out.insert(q.subject()); out.insert(q.object()); self(self, q.cont()); break;
      case K::In: out.insert(q.subject()); out.insert(q.bound()); self(self, q.cont()); break;
      case K::Res: out.insert(q.bound()); self(self, q.body()); break;
      case K::Par: self(self, q.left()); self(self, q.right()); break;
      case K::Repl: self(self, q.body()); break;
      default: break;
    }
  };
  rec(rec, p);
  return out;
}

inline std::set<std::string> pi_free_names(const PiTerm& p) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Out: {
      auto s = pi_free_names(p.cont());
      s.insert(p.subject());
      s.insert(p.object());
      return s;
    }
    case K::In: {
      auto s = pi_free_names(p.cont());
      s.erase(p.bound());
      s.insert(p.subject());
      return s;
    }
    case K::Res: {
      auto s = pi_free_names(p.body());
      s.erase(p.bound());
      return s;
    }
    case K::Par: {
      auto s = pi_free_names(p.left());
      auto r = pi_free_names(p.right());
      s.insert(r.begin(), r.end());
      return s;
    }
    case K::Repl: return pi_free_names(p.body());
    default: return {};
  }
}

inline std::set<std::string> pi_vars(const PiTerm& p) {
  std::set<std::string> out;
  auto rec = [&](auto&& self, const PiTerm& q) -> void {
    using K = PiTerm::Kind;
    switch (q.kind()) {
      case K::Var: out.insert(q.id()); break;
      case K::Out: case K::In: case K::Res: case K::Repl: self(self, q.body()); break;
      case K::Par: self(self, q.left()); self(self, q.right()); break;
      default: break;
    }
  };
  rec(rec, p);
  return out;
}

inline std::set<std::string> pi_ext_barbs(const PiTerm& p) {
  std::set<std::string> out;
  auto rec = [&](auto&& self, const PiTerm& q) -> void {
    using K = PiTerm::Kind;
    switch (q.kind()) {
      case K::ExtBarb: out.insert(q.id()); break;
      case K::Out: case K::In: case K::Res: case K::Repl: self(self, q.body()); break;
      case K::Par: self(self, q.left()); self(self, q.right()); break;
      default: break;
    }
  };
  rec(rec, p);
  return out;
}

/// Membership in the asynchronous sublanguage: every output has continuation 0.
inline bool is_async(const PiTerm& p) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Out: return p.cont().is(K::Nil);
    case K::In: case K::Res: case K::Repl: return is_async(p.body());
    case K::Par: return is_async(p.left()) && is_async(p.right());
    default: return true;
  }
}

inline std::string fresh_pi_name(const std::string& base, const std::set<std::string>& avoid) {
  for (std::size_t i = 0;; ++i) {
    std::string n = base + std::to_string(i);
    if (!avoid.count(n)) return n;
  }
}

/// P{to/from}: replaces free occurrences of the name `from`, renaming
/// binders that would capture `to`.
inline PiTerm subst_name(const PiTerm& p, const std::string& from, const std::string& to) {
  using K = PiTerm::Kind;
  if (from == to) return p;
  auto sw = [&](const std::string& n) { return n == from ? to : n; };
  switch (p.kind()) {
    case K::Out: return PiTerm::out(sw(p.subject()), sw(p.object()), subst_name(p.cont(), from, to));
    case K::Par: return PiTerm::par(subst_name(p.left(), from, to), subst_name(p.right(), from, to));
    case K::Repl: return PiTerm::repl(subst_name(p.body(), from, to));
    case K::In:
    case K::Res: {
      std::string b = p.bound();
      PiTerm body = p.body();
      if (b != from) {
        if (b == to && pi_free_names(body).count(from)) {
          auto avoid = pi_names(body);
          avoid.insert({from, to});
          std::string nb = fresh_pi_name(b, avoid);
          body = subst_name(body, b, nb);
          b = nb;
        }
        body = subst_name(body, from, to);
      }
      return p.is(K::In) ? PiTerm::in(sw(p.subject()), b, body) : PiTerm::res(b, body);
    }
    default: return p;
  }
}

/// Replaces the process variable X by `q` without capturing free names of q.
inline PiTerm subst_var(const PiTerm& p, const std::string& x, const PiTerm& q) {
  using K = PiTerm::Kind;
  const auto fq = pi_free_names(q);
  auto rec = [&](auto&& self, const PiTerm& u) -> PiTerm {
    switch (u.kind()) {
      case K::Var: return u.id() == x ? q : u;
      case K::Out: return PiTerm::out(u.subject(), u.object(), self(self, u.cont()));
      case K::Par: return PiTerm::par(self(self, u.left()), self(self, u.right()));
      case K::Repl: return PiTerm::repl(self(self, u.body()));
      case K::In:
      case K::Res: {
        PiTerm body = u.body();
        std::string b = u.bound();
        if (fq.count(b) && pi_vars(body).count(x)) {
          auto avoid = pi_names(body);
          avoid.insert(fq.begin(), fq.end());
          std::string nb = fresh_pi_name(b, avoid);
          body = subst_name(body, b, nb);
          b = nb;
        }
        body = self(self, body);
        return u.is(K::In) ? PiTerm::in(u.subject(), b, body) : PiTerm::res(b, body);
      }
      default: return u;
    }
  };
  return rec(rec, p);
}

/// Renames every binder to `prefix` followed by its nesting depth among
/// binders, starting at `depth`. Two terms are alpha-equivalent iff their
/// canonical forms are identical, provided no free name carries the prefix.
inline PiTerm pi_canonical_bound(const PiTerm& p, const std::string& prefix = "#", std::size_t depth = 0) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Out: return PiTerm::out(p.subject(), p.object(), pi_canonical_bound(p.cont(), prefix, depth));
    case K::Par:
      return PiTerm::par(pi_canonical_bound(p.left(), prefix, depth), pi_canonical_bound(p.right(), prefix, depth));
    case K::Repl: return PiTerm::repl(pi_canonical_bound(p.body(), prefix, depth));
    case K::In:
    case K::Res: {
      std::string nb = prefix + std::to_string(depth);
      PiTerm body = pi_canonical_bound(subst_name(p.body(), p.bound(), nb), prefix, depth + 1);
      return p.is(K::In) ? PiTerm::in(p.subject(), nb, body) : PiTerm::res(nb, body);
    }
    default: return p;
  }
}

inline bool pi_alpha_eq(const PiTerm& a, const PiTerm& b) {
  return pi_canonical_bound(a) == pi_canonical_bound(b);
}

}  // namespace vtrans
