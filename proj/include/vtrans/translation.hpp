#pragma once

// Translations given by head maps, their compositional completion, and
// bounded exhaustive checks over enumerated source terms.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vtrans/error.hpp"
#include "vtrans/term.hpp"

namespace vtrans {

using TermFn = std::function<Term(const Term&)>;

/// Placeholder variable standing for argument i (1-based) in a head image.
inline std::string placeholder(std::size_t i) { return "X" + std::to_string(i); }

/// A source construct f applied to its placeholders X1..Xn, with binder
/// slots named after the declared slot identifiers.
inline Term construct_head(const ConstructDecl& d) {
  std::vector<Term> args;
  for (std::size_t i = 0; i < d.arity; ++i) args.push_back(Term::variable(placeholder(i + 1)));
  return Term::construct(d.name, d.slots, std::move(args), d.scopes);
}

/// Maps every source construct to an open target term over X1..Xn (extra
/// free variables allowed). Binders in an image named after a source slot
/// stand for that slot's bound identifier; all other binders are auxiliary
/// and get renamed apart when the image is instantiated.
class HeadMap {
 public:
  HeadMap(std::shared_ptr<const Signature> source, std::shared_ptr<const Signature> target,
          std::map<std::string, Term> images)
      : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
    validate();
  }

  const Signature& source() const { return *source_; }
  const Signature& target() const { return *target_; }
  std::shared_ptr<const Signature> source_ptr() const { return source_; }
  std::shared_ptr<const Signature> target_ptr() const { return target_; }
  const std::map<std::string, Term>& images() const { return images_; }
  const Term& image(const std::string& op) const {
    auto it = images_.find(op);
    if (it == images_.end()) throw ConfigError("no head image for construct '" + op + "'");
    return it->second;
  }

  /// The compositional translation T induced by the head map.
  Term operator()(const Term& t) const { return translate(t); }

  Term translate(const Term& t) const {
    if (!t.is_construct()) return t;
    const ConstructDecl* d = source_->find(t.id());
    if (!d) throw StructuralError("construct '" + t.id() + "' not in source signature '" + source_->name() + "'");
    std::vector<Term> translated;
    translated.reserve(t.args().size());
    for (const auto& a : t.args()) translated.push_back(translate(a));
    return instantiate(*d, image(t.id()), t.binders(), translated, t);
  }

 private:
  void validate() const {
    for (const auto& d : source_->constructs()) {
      auto it = images_.find(d.name);
      if (it == images_.end())
        throw ConfigError("translation " + source_->name() + " -> " + target_->name() +
                          ": missing head image for construct '" + d.name + "'");
      check_image(d, it->second);
    }
    for (const auto& [op, img] : images_)
      if (!source_->find(op))
        throw ConfigError("head image given for unknown source construct '" + op + "'");
  }

  // Each placeholder Xi must sit under exactly the slot binders that scope
  // argument i in the source, so instantiation captures what it should.
  void check_image(const ConstructDecl& d, const Term& img) const {
    std::vector<std::string> enclosing;
    auto rec = [&](auto&& self, const Term& u) -> void {
      if (u.is_variable()) {
        for (std::size_t i = 0; i < d.arity; ++i) {
          if (u.id() != placeholder(i + 1)) continue;
          std::set<std::string> want, have;
          for (std::size_t k : d.scopes[i]) want.insert(d.slots[k]);
          for (const auto& b : enclosing)
            if (std::find(d.slots.begin(), d.slots.end(), b) != d.slots.end()) have.insert(b);
          if (want != have)
            throw ConfigError("image of '" + d.name + "': placeholder " + u.id() +
                              " is not under exactly the binders scoping argument " + std::to_string(i + 1));
        }
        return;
      }
      if (!u.is_construct()) return;
      if (!target_->find(u.id()))
        throw ConfigError("image of '" + d.name + "' uses construct '" + u.id() + "' unknown to target '" +
                          target_->name() + "'");
      for (std::size_t i = 0; i < u.args().size(); ++i) {
        for (std::size_t k : u.scopes()[i]) enclosing.push_back(u.binders()[k]);
        self(self, u.args()[i]);
        for (std::size_t k = 0; k < u.scopes()[i].size(); ++k) enclosing.pop_back();
      }
    };
    rec(rec, img);
  }

  Term instantiate(const ConstructDecl& d, const Term& img, const std::vector<std::string>& actual,
                   const std::vector<Term>& translated, const Term& source_term) const {
    std::set<std::string> avoid = all_ids(source_term);
    for (const auto& u : translated) {
      auto ids = all_ids(u);
      avoid.insert(ids.begin(), ids.end());
    }
    auto img_ids = all_ids(img);
    avoid.insert(img_ids.begin(), img_ids.end());
    // Rename auxiliary binders apart, then slot binders to the actual ones.
    auto rec = [&](auto&& self, const Term& u) -> Term {
      if (!u.is_construct()) return u;
      std::vector<std::string> binders = u.binders();
      std::vector<Term> args = u.args();
      for (std::size_t k = 0; k < binders.size(); ++k) {
        auto slot = std::find(d.slots.begin(), d.slots.end(), binders[k]);
        std::string to;
        if (slot != d.slots.end()) {
          to = actual[static_cast<std::size_t>(slot - d.slots.begin())];
        } else {
          to = fresh_id(binders[k], avoid);
          avoid.insert(to);
        }
        if (to == binders[k]) continue;
        for (std::size_t i = 0; i < args.size(); ++i) {
          const auto& sc = u.scopes()[i];
          if (std::find(sc.begin(), sc.end(), k) != sc.end()) args[i] = rename_bound_occ(args[i], binders[k], to);
        }
        binders[k] = to;
      }
      for (auto& a : args) a = self(self, a);
      return Term::construct(u.id(), std::move(binders), std::move(args), u.scopes());
    };
    // Placeholders first move out of the way of the actual binder names.
    Term base = img;
    Substitution sigma;
    for (std::size_t i = 0; i < translated.size(); ++i) {
      std::string hole = fresh_id("H", avoid);
      avoid.insert(hole);
      base = rename_free(base, placeholder(i + 1), hole);
      sigma.emplace(hole, translated[i]);
    }
    Term renamed = rec(rec, base);
    return substitute_raw(renamed, sigma);
  }

  // Renames free occurrences of `from` inside an image fragment. Placeholders
  // are untouched (they are variables of a different identifier).
  static Term rename_bound_occ(const Term& t, const std::string& from, const std::string& to) {
    return rename_free(t, from, to);
  }

  std::shared_ptr<const Signature> source_;
  std::shared_ptr<const Signature> target_;
  std::map<std::string, Term> images_;
};

/// Wraps a head map as a total translation function.
inline TermFn complete_compositional(const HeadMap& heads) {
  return [heads](const Term& t) { return heads.translate(t); };
}

/// Identity head map on a signature.
inline HeadMap identity_heads(std::shared_ptr<const Signature> sig) {
  std::map<std::string, Term> images;
  for (const auto& d : sig->constructs()) images.emplace(d.name, construct_head(d));
  return HeadMap(sig, sig, std::move(images));
}

/// Pointwise composition T2 . T1 of two head maps; again a head map.
inline HeadMap compose_translations(const HeadMap& first, const HeadMap& second) {
  if (first.target().name() != second.source().name())
    throw ConfigError("cannot compose: target of first translation is '" + first.target().name() +
                      "' but source of second is '" + second.source().name() + "'");
  std::map<std::string, Term> images;
  for (const auto& [op, img] : first.images()) images.emplace(op, second.translate(img));
  return HeadMap(first.source_ptr(), second.target_ptr(), std::move(images));
}

inline TermFn compose_fns(TermFn first, TermFn second) {
  return [first = std::move(first), second = std::move(second)](const Term& t) { return second(first(t)); };
}

/// A translation given extensionally on finitely many source terms. Keys
/// mention free variables X, Y, Z; a query is looked up after renaming its
/// free variables in order of first occurrence, and the answer is renamed
/// back. Terms outside the table raise UsageError.
class TableTranslation {
 public:
  explicit TableTranslation(std::vector<std::pair<Term, Term>> entries) {
    for (auto& [k, v] : entries) table_.emplace(to_string(k), std::move(v));
  }

  Term operator()(const Term& t) const {
    static const char* canon[] = {"X", "Y", "Z"};
    std::vector<std::string> order;
    auto rec = [&](auto&& self, const Term& u) -> void {
      if (u.is_variable()) {
        if (std::find(order.begin(), order.end(), u.id()) == order.end()) order.push_back(u.id());
        return;
      }
      for (const auto& a : u.args()) self(self, a);
    };
    rec(rec, t);
    if (order.size() > 3) throw UsageError("translation table: too many variables in " + to_string(t));
    Substitution to_canon, from_canon;
    for (std::size_t i = 0; i < order.size(); ++i) {
      to_canon.emplace(order[i], Term::variable(canon[i]));
      from_canon.emplace(canon[i], Term::variable(order[i]));
    }
    auto it = table_.find(to_string(substitute(t, to_canon)));
    if (it == table_.end()) throw UsageError("translation table has no entry for " + to_string(t));
    return substitute(it->second, from_canon);
  }

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, Term> table_;
};

// ---------------------------------------------------------------------------
// Enumeration of terms to a depth bound.

struct TermPools {
  std::vector<std::string> vars{"X"};
  std::vector<std::string> names{"x", "y"};
  /// Identifiers offered for variable binder slots.
  std::vector<std::string> var_binders{"X", "Y"};
};

/// Depth of leaves is 1; name arguments do not add depth.
inline std::size_t term_depth(const Term& t) {
  if (!t.is_construct()) return 1;
  std::size_t m = 0;
  for (const auto& a : t.args())
    if (!a.is_name()) m = std::max(m, term_depth(a));
  return m + 1;
}

/// All terms of depth <= `depth`, ordered by depth, then construct order,
/// then argument order. Variables precede constants at depth 1.
inline std::vector<Term> enumerate_terms(const Signature& sig, std::size_t depth, const TermPools& pools,
                                         std::size_t cap = 200000) {
  std::vector<Term> all;
  std::vector<std::size_t> level_end;  // all[0, level_end[d-1]) has depth <= d
  if (depth == 0) return all;
  for (const auto& v : pools.vars) all.push_back(Term::variable(v));
  for (const auto& d : sig.constructs())
    if (d.arity == 0 && !d.has_binders()) all.push_back(Term::construct(d.name, {}, {}, d.scopes));
  level_end.push_back(all.size());
  for (std::size_t lvl = 2; lvl <= depth; ++lvl) {
    const std::size_t prev = level_end.back();
    const std::size_t prev_prev = level_end.size() >= 2 ? level_end[level_end.size() - 2] : 0;
    for (const auto& d : sig.constructs()) {
      if (d.arity == 0 && !d.has_binders()) continue;
      // Binder choices.
      std::vector<std::vector<std::string>> binder_choices(1);
      for (const auto& slot : d.slots) {
        const auto& pool = is_variable_id(slot) ? pools.var_binders : pools.names;
        std::vector<std::vector<std::string>> next;
        for (const auto& partial : binder_choices)
          for (const auto& id : pool) {
            auto p = partial;
            p.push_back(id);
            next.push_back(std::move(p));
          }
        binder_choices = std::move(next);
      }
      // Argument choices: term args from all[0, prev); at least one from the
      // previous level [prev_prev, prev) so the depth is exactly lvl.
      std::vector<std::size_t> term_positions;
      for (std::size_t i = 0; i < d.arity; ++i)
        if (!d.name_args[i]) term_positions.push_back(i);
      if (term_positions.empty() && lvl != 2) continue;
      std::vector<std::size_t> name_positions;
      for (std::size_t i = 0; i < d.arity; ++i)
        if (d.name_args[i]) name_positions.push_back(i);
      for (const auto& binders : binder_choices) {
        std::vector<std::size_t> ti(term_positions.size(), 0);
        for (;;) {
          bool exact = term_positions.empty();
          for (std::size_t k : ti)
            if (k >= prev_prev) exact = true;
          if (exact) {
            std::vector<std::size_t> ni(name_positions.size(), 0);
            for (;;) {
              std::vector<Term> args(d.arity, Term::variable("X"));
              for (std::size_t j = 0; j < term_positions.size(); ++j) args[term_positions[j]] = all[ti[j]];
              for (std::size_t j = 0; j < name_positions.size(); ++j)
                args[name_positions[j]] = Term::name(pools.names[ni[j]]);
              all.push_back(Term::construct(d.name, binders, std::move(args), d.scopes));
              if (all.size() > cap) throw UsageError("term enumeration exceeds cap of " + std::to_string(cap));
              std::size_t j = 0;
              while (j < ni.size() && ++ni[j] == pools.names.size()) ni[j++] = 0;
              if (j == ni.size()) break;
            }
          }
          std::size_t j = 0;
          while (j < ti.size() && ++ti[j] == prev) ti[j++] = 0;
          if (j == ti.size()) break;
        }
      }
    }
    level_end.push_back(all.size());
  }
  return all;
}

// ---------------------------------------------------------------------------
// Compositionality and fvr checks.

struct CompositionalityVerdict {
  enum class Status { HoldsToDepth, Fails };
  Status status = Status::HoldsToDepth;
  std::size_t depth = 0;
  std::size_t terms_checked = 0;
  std::size_t cases_checked = 0;
  /// Failing clause (1, 2 or 3) and witness.
  int clause = 0;
  std::optional<Term> witness_term;
  Substitution witness_sigma;
  std::optional<Term> lhs, rhs;

  bool holds() const { return status == Status::HoldsToDepth; }
};

struct CompositionalityOptions {
  TermPools pools;
  /// Variables allowed in the substitution pool (range terms).
  std::vector<std::string> subst_vars{"X", "Y"};
  /// Substitution range terms go up to this depth (default: depth - 1, min 1).
  std::optional<std::size_t> subst_depth;
};

/// Exhaustively tests the three compositionality clauses on every source
/// term to `depth`, with substitutions drawn from the pool of terms of depth
/// `subst_depth` over `subst_vars`.
inline CompositionalityVerdict check_compositional(const TermFn& t, const Signature& source, std::size_t depth,
                                                   const CompositionalityOptions& opt = {}) {
  if (depth < 1) throw UsageError("check_compositional: depth must be >= 1");
  CompositionalityVerdict v;
  v.depth = depth;
  auto fail = [&](int clause, const Term& e, Substitution s, Term lhs, Term rhs) {
    v.status = CompositionalityVerdict::Status::Fails;
    v.clause = clause;
    v.witness_term = e;
    v.witness_sigma = std::move(s);
    v.lhs = std::move(lhs);
    v.rhs = std::move(rhs);
    return v;
  };
  std::set<std::string> all_vars(opt.pools.vars.begin(), opt.pools.vars.end());
  all_vars.insert(opt.subst_vars.begin(), opt.subst_vars.end());
  for (const auto& x : all_vars) {
    Term xv = Term::variable(x);
    Term tx = t(xv);
    ++v.cases_checked;
    if (tx != xv) return fail(3, xv, {}, tx, xv);
  }
  auto terms = enumerate_terms(source, depth, opt.pools);
  TermPools sp = opt.pools;
  sp.vars = opt.subst_vars;
  std::size_t sd = opt.subst_depth.value_or(depth > 1 ? depth - 1 : 1);
  auto pool = enumerate_terms(source, sd, sp);
  std::vector<Term> pool_t;
  pool_t.reserve(pool.size());
  for (const auto& p : pool) pool_t.push_back(t(p));
  for (const auto& e : terms) {
    ++v.terms_checked;
    Term te = t(e);
    // Clause 2 on a fully renamed alpha-variant.
    Term ev = alpha_variant(e);
    Term tev = t(ev);
    ++v.cases_checked;
    if (!alpha_eq(te, tev)) return fail(2, e, {}, te, tev);
    // Clause 1 on every substitution fv(e) -> pool.
    const auto fv_set = free_vars(e);
    std::vector<std::string> fv(fv_set.begin(), fv_set.end());
    if (fv.empty()) {
      continue;
    }
    std::vector<std::size_t> idx(fv.size(), 0);
    for (;;) {
      Substitution sigma, tsigma;
      for (std::size_t j = 0; j < fv.size(); ++j) {
        sigma.emplace(fv[j], pool[idx[j]]);
        tsigma.emplace(fv[j], pool_t[idx[j]]);
      }
      Term lhs = t(substitute(e, sigma));
      Term rhs = substitute(te, tsigma);
      ++v.cases_checked;
      if (!alpha_eq(lhs, rhs)) return fail(1, e, sigma, lhs, rhs);
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == pool.size()) idx[j++] = 0;
      if (j == idx.size()) break;
    }
  }
  return v;
}

struct FvrVerdict {
  bool holds = true;
  std::size_t depth = 0;
  std::size_t terms_checked = 0;
  std::optional<Term> witness;
  std::optional<Term> image;
  std::set<std::string> introduced;
};

/// fv(T(E)) is a subset of fv(E) for every E to `depth`.
inline FvrVerdict is_fvr(const TermFn& t, const Signature& source, std::size_t depth, const TermPools& pools = {}) {
  if (depth < 1) throw UsageError("is_fvr: depth must be >= 1");
  FvrVerdict v;
  v.depth = depth;
  for (const auto& e : enumerate_terms(source, depth, pools)) {
    ++v.terms_checked;
    Term te = t(e);
    auto src = free_vars(e);
    std::set<std::string> extra;
    for (const auto& x : free_vars(te))
      if (!src.count(x)) extra.insert(x);
    if (!extra.empty()) {
      v.holds = false;
      v.witness = e;
      v.image = te;
      v.introduced = std::move(extra);
      return v;
    }
  }
  return v;
}

}  // namespace vtrans
