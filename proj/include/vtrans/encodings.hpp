#pragma once

// Boudol's translation of synchronous pi into asynchronous pi, context
// probes, spot checks of an encoding against its source, pulled-back
// equivalences and full-abstraction checks on supplied pairs.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vtrans/bisim.hpp"
#include "vtrans/error.hpp"
#include "vtrans/finite.hpp"
#include "vtrans/pi.hpp"
#include "vtrans/pi_semantics.hpp"
#include "vtrans/term.hpp"
#include "vtrans/translation.hpp"

namespace vtrans {

// ---------------------------------------------------------------------------
// Pi processes as generic terms.

/// Signature of the pi fragment: 0, out(x,z,P), in[y](x,P), par(P,Q),
/// new[z](P), rep(P). Name arguments are marked so enumeration fills them
/// from the name pool.
inline std::shared_ptr<Signature> pi_signature(const std::string& name = "pi") {
  auto sig = std::make_shared<Signature>(name);
  sig->add("0", 0);
  sig->add("out", 3, {}, {0, 1});
  sig->add("in", 2, {{}, {"y"}}, {0});
  sig->add("par", 2);
  sig->add("new", 1, {{"z"}});
  sig->add("rep", 1);
  return sig;
}

inline Term pi_to_term(const Signature& sig, const PiTerm& p) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Nil: return Term::make(sig, "0", {});
    case K::Var: return Term::variable(p.id());
    case K::Out:
      return Term::make(sig, "out", {Term::name(p.subject()), Term::name(p.object()), pi_to_term(sig, p.cont())});
    case K::In: return Term::make(sig, "in", {Term::name(p.subject()), pi_to_term(sig, p.cont())}, {p.bound()});
    case K::Par: return Term::make(sig, "par", {pi_to_term(sig, p.left()), pi_to_term(sig, p.right())});
    case K::Res: return Term::make(sig, "new", {pi_to_term(sig, p.body())}, {p.bound()});
    case K::Repl: return Term::make(sig, "rep", {pi_to_term(sig, p.body())});
    case K::ExtBarb: break;
  }
  throw UsageError("external barb @" + p.id() + " has no counterpart in the term signature");
}

inline PiTerm pi_from_term(const Term& t) {
  if (t.is_variable()) return PiTerm::var(t.id());
  if (!t.is_construct()) throw StructuralError("name '" + t.id() + "' where a process was expected");
  const auto& a = t.args();
  auto nm = [&](std::size_t i) {
    if (!a.at(i).is_name()) throw StructuralError("expected a name in " + to_string(t));
    return a[i].id();
  };
  const std::string& op = t.id();
  if (op == "0" && a.empty()) return PiTerm::nil();
  if (op == "out" && a.size() == 3) return PiTerm::out(nm(0), nm(1), pi_from_term(a[2]));
  if (op == "in" && a.size() == 2 && t.binders().size() == 1) return PiTerm::in(nm(0), t.binders()[0], pi_from_term(a[1]));
  if (op == "par" && a.size() == 2) return PiTerm::par(pi_from_term(a[0]), pi_from_term(a[1]));
  if (op == "new" && a.size() == 1 && t.binders().size() == 1) return PiTerm::res(t.binders()[0], pi_from_term(a[0]));
  if (op == "rep" && a.size() == 1) return PiTerm::repl(pi_from_term(a[0]));
  throw StructuralError("not a pi process: " + to_string(t));
}

// ---------------------------------------------------------------------------
// Boudol's translation.

/// Head map of Boudol's translation from the pi signature to a copy of it
/// named "api". Binders u and v are auxiliary and renamed apart on use.
inline HeadMap boudol_heads() {
  auto src = pi_signature("pi");
  auto tgt = pi_signature("api");
  std::map<std::string, Term> images;
  auto img = [&](const std::string& op, const std::string& text) { images.emplace(op, parse_term(*tgt, text)); };
  img("0", "0");
  img("out", "new[u](par(out(X1,u,0),in[v](u,par(out(v,X2,0),X3))))");
  img("in", "in[u](X1,new[v](par(out(u,v,0),in[y](v,X2))))");
  img("par", "par(X1,X2)");
  img("new", "new[z](X1)");
  img("rep", "rep(X1)");
  return HeadMap(src, tgt, std::move(images));
}

/// Direct translation with deterministic fresh names _b0, _b1, ... taken
/// in pre-order, skipping any name already in n(P).
inline PiTerm boudol_translate(const PiTerm& p) {
  const auto used = pi_names(p);
  std::size_t counter = 0;
  std::vector<std::string> aux;
  auto fresh = [&]() {
    std::string n;
    do n = "_b" + std::to_string(counter++);
    while (used.count(n));
    aux.push_back(n);
    return n;
  };
  auto rec = [&](auto&& self, const PiTerm& q) -> PiTerm {
    using K = PiTerm::Kind;
    switch (q.kind()) {
      case K::Out: {
        std::string u = fresh(), v = fresh();
        return PiTerm::res(u, PiTerm::par(PiTerm::out(q.subject(), u),
                                          PiTerm::in(u, v, PiTerm::par(PiTerm::out(v, q.object()), self(self, q.cont())))));
      }
      case K::In: {
        std::string u = fresh(), v = fresh();
        return PiTerm::in(q.subject(), u,
                          PiTerm::res(v, PiTerm::par(PiTerm::out(u, v), PiTerm::in(v, q.bound(), self(self, q.cont())))));
      }
      case K::Par: {
        PiTerm l = self(self, q.left());  // left first: fresh names follow reading order
        return PiTerm::par(l, self(self, q.right()));
      }
      case K::Res: return PiTerm::res(q.bound(), self(self, q.body()));
      case K::Repl: return PiTerm::repl(self(self, q.body()));
      default: return q;
    }
  };
  PiTerm out = rec(rec, p);
  for (const auto& n : aux)
    if (used.count(n)) throw Error("internal: auxiliary name " + n + " occurs in the source process");
  return out;
}

/// boudol_translate as a function on generic terms over pi_signature().
inline TermFn boudol_term_fn() {
  auto tgt = pi_signature("api");
  return [tgt](const Term& t) { return pi_to_term(*tgt, boudol_translate(pi_from_term(t))); };
}

// ---------------------------------------------------------------------------
// Context probes.

/// C[P]: substitutes the closed process P for the single process variable
/// of the context, renaming context binders that would capture names of P.
inline PiTerm plug(const PiTerm& context, const PiTerm& p) {
  auto vs = pi_vars(context);
  if (vs.size() != 1)
    throw UsageError("context must contain exactly one process variable, found " + std::to_string(vs.size()));
  if (!pi_vars(p).empty()) throw UsageError("plugged process must be closed, but has variable " + *pi_vars(p).begin());
  return subst_var(context, *vs.begin(), p);
}

// ---------------------------------------------------------------------------
// Spot checks.

using PiEncoding = std::function<PiTerm(const PiTerm&)>;
using PiOracle = std::function<BisimVerdict(const PiTerm&, const PiTerm&)>;

struct EncodingCheck {
  PiTerm source, image;
  BisimVerdict verdict;
};

struct EncodingReport {
  BisimKind kind = BisimKind::Weak;
  std::vector<EncodingCheck> checks;
  std::size_t bisimilar = 0, not_bisimilar = 0, inconclusive = 0;
};

inline EncodingReport check_encoding_pairs(const PiEncoding& enc, const std::vector<PiTerm>& sources, BisimKind kind,
                                           std::size_t budget, const BarbOptions& opts = {}) {
  EncodingReport rep;
  rep.kind = kind;
  for (const auto& p : sources) {
    if (!pi_vars(p).empty()) throw UsageError("source process " + print_pi(p) + " is not closed");
    PiTerm img = enc(p);
    auto v = bisim(p, img, kind, budget, opts);
    switch (v.status) {
      case BisimVerdict::Status::Bisimilar: ++rep.bisimilar; break;
      case BisimVerdict::Status::NotBisimilar: ++rep.not_bisimilar; break;
      case BisimVerdict::Status::Inconclusive: ++rep.inconclusive; break;
    }
    rep.checks.push_back({p, img, v});
  }
  return rep;
}

inline std::string format_encoding_report(const EncodingReport& rep) {
  std::ostringstream os;
  for (const auto& c : rep.checks) {
    os << "P    = " << print_pi(c.source) << "\n"
       << "T(P) = " << print_pi(c.image) << "\n"
       << to_string(rep.kind) << ": " << format_verdict(c.verdict) << "\n";
  }
  os << "summary: " << rep.bisimilar << " bisimilar, " << rep.not_bisimilar << " not bisimilar, " << rep.inconclusive
     << " inconclusive\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Pulled-back equivalence.

/// For closed source processes p, q: the target oracle applied to
/// enc(p)[theta] and enc(q)[theta]. Variables the encoding introduces are
/// closed by theta.
inline PiOracle pullback_equiv(PiEncoding enc, std::map<std::string, PiTerm> theta, PiOracle target) {
  for (const auto& [x, t] : theta)
    if (!pi_vars(t).empty()) throw UsageError("theta(" + x + ") is not closed");
  return [enc = std::move(enc), theta = std::move(theta), target = std::move(target)](const PiTerm& p,
                                                                                     const PiTerm& q) {
    auto close = [&](const PiTerm& s) {
      if (!pi_vars(s).empty()) throw UsageError("pullback needs closed source processes, got " + print_pi(s));
      PiTerm t = enc(s);
      for (const auto& [x, u] : theta) t = subst_var(t, x, u);
      if (!pi_vars(t).empty()) throw UsageError("translation of " + print_pi(s) + " has a variable not closed by theta");
      return t;
    };
    return target(close(p), close(q));
  };
}

/// Precondition of pulling back over a finite language: the language must
/// be interpreted in its own closed terms, i.e. only constants, each
/// denoting itself. Returns the violation, if any.
inline std::optional<std::string> closed_term_violation(const FiniteLanguage& l) {
  std::set<std::string> consts;
  for (const auto& d : l.signature().constructs()) {
    if (d.arity > 0)
      return "language " + l.name() + " has operator " + d.name + " of arity " + std::to_string(d.arity) +
             ", so its closed terms are infinite but its values are finite";
    consts.insert(d.name);
  }
  std::set<std::string> values(l.values().begin(), l.values().end());
  auto show = [](const std::set<std::string>& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& x : s) {
      out += (first ? "" : ",") + x;
      first = false;
    }
    return out + "}";
  };
  if (consts != values)
    return "language " + l.name() + " is not a closed-term language: values " + show(values) +
           " differ from closed terms " + show(consts);
  for (const auto& c : consts)
    if (l.values()[l.apply(c, {})] != c)
      return "language " + l.name() + " is not a closed-term language: " + c + " denotes " +
             l.values()[l.apply(c, {})];
  return std::nullopt;
}

struct FinitePullback {
  std::optional<std::string> violation;
  std::vector<std::vector<std::string>> classes;  // source constants grouped
};

/// p ~_T q iff the meanings of T(p) and T(q) are related by sim.
inline FinitePullback finite_pullback(const HeadMap& t, const FiniteLanguage& source, const FiniteLanguage& target,
                                      const Relation& sim) {
  FinitePullback out;
  out.violation = closed_term_violation(source);
  if (out.violation) return out;
  std::vector<std::size_t> meaning;
  for (const auto& v : source.values()) {
    Term img = t.translate(Term::make(source.signature(), v, {}));
    if (!free_vars(img).empty())
      throw UsageError("translation of " + v + " is open; pulling back needs closed images");
    meaning.push_back(sim.index(target.qualified(denote(target, img, {}))));
  }
  std::vector<bool> done(source.size(), false);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (done[i]) continue;
    std::vector<std::string> cls;
    for (std::size_t j = i; j < source.size(); ++j)
      if (!done[j] && sim.related(meaning[i], meaning[j]) && sim.related(meaning[j], meaning[i])) {
        done[j] = true;
        cls.push_back(source.values()[j]);
      }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full abstraction on supplied pairs.

struct FullAbstractionEntry {
  PiTerm p, q;
  BisimVerdict source, target;
  enum class Status { Pass, Fail, Inconclusive } status = Status::Inconclusive;
};

struct FullAbstractionReport {
  std::vector<FullAbstractionEntry> entries;
  std::size_t passed = 0, failed = 0, inconclusive = 0;
  bool holds() const { return failed == 0 && inconclusive == 0; }
};

/// Checks p ~S q <=> T(p) ~T T(q) on each pair.
inline FullAbstractionReport full_abstraction_check(const PiEncoding& enc, const PiOracle& source_oracle,
                                                    const PiOracle& target_oracle,
                                                    const std::vector<std::pair<PiTerm, PiTerm>>& pairs) {
  using S = BisimVerdict::Status;
  FullAbstractionReport rep;
  for (const auto& [p, q] : pairs) {
    FullAbstractionEntry e{p, q, source_oracle(p, q), target_oracle(enc(p), enc(q)), {}};
    if (e.source.status == S::Inconclusive || e.target.status == S::Inconclusive) {
      e.status = FullAbstractionEntry::Status::Inconclusive;
      ++rep.inconclusive;
    } else if (e.source.bisimilar() == e.target.bisimilar()) {
      e.status = FullAbstractionEntry::Status::Pass;
      ++rep.passed;
    } else {
      e.status = FullAbstractionEntry::Status::Fail;
      ++rep.failed;
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

inline std::string format_full_abstraction(const FullAbstractionReport& rep) {
  using S = FullAbstractionEntry::Status;
  std::ostringstream os;
  for (const auto& e : rep.entries) {
    os << print_pi(e.p) << " ;; " << print_pi(e.q) << "\n"
       << "  source: " << to_string(e.source.status) << "\n"
       << "  target: " << to_string(e.target.status) << "\n";
    if (e.status == S::Pass) {
      os << "  pass\n";
    } else if (e.status == S::Inconclusive) {
      os << "  inconclusive\n";
    } else {
      os << "  COUNTEREXAMPLE: " << (e.source.bisimilar() ? "equivalence not preserved" : "equivalence not reflected")
         << "\n";
    }
  }
  os << "summary: " << rep.passed << " pass, " << rep.failed << " fail, " << rep.inconclusive << " inconclusive\n";
  return os.str();
}

/// Reads a pair-list file: one pair per line separated by " ;; ", blank
/// lines and lines starting with '#' ignored.
inline std::vector<std::pair<PiTerm, PiTerm>> parse_pair_list(const std::string& text, PiParseOptions opts = {}) {
  std::vector<std::pair<PiTerm, PiTerm>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto sep = line.find(" ;; ");
    if (sep == std::string::npos) throw InputError("line " + std::to_string(lineno) + ": missing ' ;; ' separator");
    try {
      out.emplace_back(parse_pi(line.substr(0, sep), opts), parse_pi(line.substr(sep + 4), opts));
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vtrans
