#pragma once

// Finite interpreted languages, relations on qualified values, and the
// exhaustive decision procedures for correctness, validity, preservation
// and congruence properties of translations between them.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vtrans/error.hpp"
#include "vtrans/term.hpp"
#include "vtrans/translation.hpp"

namespace vtrans {

/// Calls fn on every tuple in {0..k-1}^n in lexicographic order (first
/// position most significant). Stops early when fn returns false.
template <class Fn>
bool for_each_tuple(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> t(n, 0);
  if (n > 0 && k == 0) return true;
  for (;;) {
    if (!fn(static_cast<const std::vector<std::size_t>&>(t))) return false;
    std::size_t j = n;
    while (j > 0 && ++t[j - 1] == k) t[--j] = 0;
    if (j == 0) return true;
  }
}

class FiniteLanguage {
 public:
  FiniteLanguage(std::string name, std::vector<std::string> values)
      : sig_(std::make_shared<Signature>(name)), name_(std::move(name)), values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i].empty()) throw InputError("language '" + name_ + "': empty value name");
      if (!index_.emplace(values_[i], i).second)
        throw InputError("language '" + name_ + "': duplicate value '" + values_[i] + "'");
    }
  }

  /// `table` is indexed in mixed radix over the argument values, first
  /// argument most significant; constants have a single entry.
  void add_operator(const std::string& op, std::size_t arity, std::vector<std::size_t> table) {
    std::size_t expect = 1;
    for (std::size_t i = 0; i < arity; ++i) expect *= values_.size();
    if (table.size() != expect)
      throw InputError("operator '" + op + "' of '" + name_ + "': table has " + std::to_string(table.size()) +
                       " entries, expected " + std::to_string(expect));
    for (std::size_t r : table)
      if (r >= values_.size()) throw InputError("operator '" + op + "' of '" + name_ + "': result out of range");
    sig_->add(op, arity);
    tables_.emplace(op, std::move(table));
  }

  const std::string& name() const { return name_; }
  const Signature& signature() const { return *sig_; }
  std::shared_ptr<const Signature> signature_ptr() const { return sig_; }
  const std::vector<std::string>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::optional<std::size_t> find_value(const std::string& v) const {
    auto it = index_.find(v);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t value_index(const std::string& v) const {
    auto i = find_value(v);
    if (!i) throw InputError("value '" + v + "' not in language '" + name_ + "'");
    return *i;
  }
  std::string qualified(std::size_t i) const { return name_ + "." + values_[i]; }

  std::size_t apply(const std::string& op, const std::vector<std::size_t>& args) const {
    auto it = tables_.find(op);
    if (it == tables_.end()) throw StructuralError("operator '" + op + "' not in language '" + name_ + "'");
    std::size_t idx = 0;
    for (std::size_t a : args) idx = idx * values_.size() + a;
    return it->second.at(idx);
  }

 private:
  std::shared_ptr<Signature> sig_;
  std::string name_;
  std::vector<std::string> values_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::size_t>> tables_;
};

using Valuation = std::map<std::string, std::size_t>;

inline std::size_t denote(const FiniteLanguage& lang, const Term& t, const Valuation& rho) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      auto it = rho.find(t.id());
      if (it == rho.end()) throw ValuationError("no value for variable " + t.id());
      return it->second;
    }
    case Term::Kind::Name:
      throw StructuralError("names have no meaning in finite language '" + lang.name() + "'");
    case Term::Kind::Construct:
      break;
  }
  std::vector<std::size_t> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(denote(lang, a, rho));
  return lang.apply(t.id(), args);
}

/// [[sigma]](rho): rho updated on dom(sigma) with the meanings of the range.
inline Valuation denote_subst(const FiniteLanguage& lang, const Substitution& sigma, const Valuation& rho) {
  Valuation out = rho;
  for (const auto& [x, u] : sigma) out[x] = denote(lang, u, rho);
  return out;
}

inline std::string format_valuation(const FiniteLanguage& lang, const Valuation& v) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, i] : v) {
    out += (first ? "" : ", ") + x + "=" + lang.values()[i];
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Relations.

enum class RelationKind { Equivalence, Preorder };

class Relation {
 public:
  Relation() = default;
  Relation(std::string name, RelationKind kind, std::vector<std::string> carrier)
      : name_(std::move(name)), kind_(kind), carrier_(std::move(carrier)) {
    for (std::size_t i = 0; i < carrier_.size(); ++i)
      if (!index_.emplace(carrier_[i], i).second) throw InputError("duplicate carrier element '" + carrier_[i] + "'");
    m_.assign(carrier_.size(), std::vector<char>(carrier_.size(), 0));
    for (std::size_t i = 0; i < carrier_.size(); ++i) m_[i][i] = 1;
  }

  const std::string& name() const { return name_; }
  RelationKind kind() const { return kind_; }
  const std::vector<std::string>& carrier() const { return carrier_; }
  std::size_t size() const { return carrier_.size(); }

  std::optional<std::size_t> find(const std::string& v) const {
    auto it = index_.find(v);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index(const std::string& v) const {
    auto i = find(v);
    if (!i) throw InputError("'" + v + "' is not in the carrier of relation '" + name_ + "'");
    return *i;
  }

  bool related(std::size_t a, std::size_t b) const { return m_[a][b] != 0; }
  bool related(const std::string& a, const std::string& b) const { return related(index(a), index(b)); }

  void add(std::size_t a, std::size_t b) { m_[a][b] = 1; }

  /// Reflexive-transitive closure, symmetric too for equivalences.
  void close() {
    const std::size_t n = size();
    if (kind_ == RelationKind::Equivalence)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (m_[i][j]) m_[j][i] = 1;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (m_[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (m_[k][j]) m_[i][j] = 1;
  }

  /// Equivalence classes in order of their least member.
  std::vector<std::vector<std::size_t>> classes() const {
    std::vector<std::vector<std::size_t>> out;
    std::vector<char> seen(size(), 0);
    for (std::size_t i = 0; i < size(); ++i) {
      if (seen[i]) continue;
      std::vector<std::size_t> cls;
      for (std::size_t j = i; j < size(); ++j)
        if (!seen[j] && related(i, j) && related(j, i)) {
          seen[j] = 1;
          cls.push_back(j);
        }
      out.push_back(std::move(cls));
    }
    return out;
  }

  bool is_equivalence() const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (!related(i, i)) return false;
      for (std::size_t j = 0; j < size(); ++j) {
        if (related(i, j) != related(j, i)) return false;
        if (!related(i, j)) continue;
        for (std::size_t k = 0; k < size(); ++k)
          if (related(j, k) && !related(i, k)) return false;
      }
    }
    return true;
  }

  /// Pairs over carrier names, in carrier order.
  std::vector<std::pair<std::string, std::string>> pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (related(i, j)) out.emplace_back(carrier_[i], carrier_[j]);
    return out;
  }

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.carrier_ == b.carrier_ && a.m_ == b.m_;
  }

 private:
  std::string name_;
  RelationKind kind_ = RelationKind::Equivalence;
  std::vector<std::string> carrier_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<char>> m_;
};

inline Relation close_relation(const std::string& name, RelationKind kind, const std::vector<std::string>& carrier,
                               const std::vector<std::pair<std::string, std::string>>& generators) {
  Relation r(name, kind, carrier);
  for (const auto& [a, b] : generators) r.add(r.index(a), r.index(b));
  r.close();
  return r;
}

/// "{a,b} {c}" over the given display names.
inline std::string format_partition(const std::vector<std::vector<std::size_t>>& classes,
                                    const std::vector<std::string>& display) {
  std::string out;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out += c ? " {" : "{";
    for (std::size_t k = 0; k < classes[c].size(); ++k) out += (k ? "," : "") + display[classes[c][k]];
    out += "}";
  }
  return out;
}

/// Position of each language value in the relation's carrier.
inline std::vector<std::size_t> embed(const FiniteLanguage& lang, const Relation& rel) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lang.size(); ++i) {
    auto k = rel.find(lang.qualified(i));
    if (!k)
      throw InputError("relation '" + rel.name() + "' does not cover value '" + lang.qualified(i) + "'");
    out.push_back(*k);
  }
  return out;
}

/// The relation restricted to one language, carried by its unqualified values.
inline Relation restrict_to(const FiniteLanguage& lang, const Relation& rel) {
  auto e = embed(lang, rel);
  Relation r(rel.name(), rel.kind(), lang.values());
  for (std::size_t i = 0; i < lang.size(); ++i)
    for (std::size_t j = 0; j < lang.size(); ++j)
      if (rel.related(e[i], e[j])) r.add(i, j);
  return r;
}

// ---------------------------------------------------------------------------
// Congruence.

struct CongruenceVerdict {
  bool holds = true;
  std::string op;
  std::vector<std::size_t> lhs_args, rhs_args;
  std::size_t lhs_value = 0, rhs_value = 0;
};

namespace detail {

// rel is indexed by language values here.
inline CongruenceVerdict congruence_check(const FiniteLanguage& lang, const Relation& rel, bool one_hole) {
  CongruenceVerdict v;
  const std::size_t n = lang.size();
  for (const auto& d : lang.signature().constructs()) {
    bool ok = for_each_tuple(d.arity, n, [&](const std::vector<std::size_t>& a) {
      std::size_t fa = lang.apply(d.name, a);
      return for_each_tuple(d.arity, n, [&](const std::vector<std::size_t>& b) {
        std::size_t differ = 0;
        for (std::size_t i = 0; i < d.arity; ++i) {
          if (!rel.related(a[i], b[i])) return true;
          differ += a[i] != b[i];
        }
        if (one_hole && differ > 1) return true;
        std::size_t fb = lang.apply(d.name, b);
        if (rel.related(fa, fb)) return true;
        v = {false, d.name, a, b, fa, fb};
        return false;
      });
    });
    if (!ok) return v;
  }
  return v;
}

}  // namespace detail

/// Checked per construct: a relation preserved by every operation is
/// preserved by every binder-free term.
inline CongruenceVerdict is_congruence(const FiniteLanguage& lang, const Relation& rel) {
  return detail::congruence_check(lang, restrict_to(lang, rel), false);
}

inline CongruenceVerdict is_one_hole_congruence(const FiniteLanguage& lang, const Relation& rel) {
  return detail::congruence_check(lang, restrict_to(lang, rel), true);
}

/// Largest 1-hole congruence contained in the equivalence, by partition
/// refinement. Carried by the language's unqualified values.
inline Relation congruence_closure_1hole(const FiniteLanguage& lang, const Relation& rel) {
  if (rel.kind() != RelationKind::Equivalence)
    throw UsageError("congruence closure needs an equivalence, '" + rel.name() + "' is a preorder");
  Relation base = restrict_to(lang, rel);
  const std::size_t n = lang.size();
  std::vector<std::size_t> block(n);
  {
    auto cls = base.classes();
    for (std::size_t c = 0; c < cls.size(); ++c)
      for (std::size_t x : cls[c]) block[x] = c;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& d : lang.signature().constructs()) {
      for (std::size_t pos = 0; pos < d.arity && !changed; ++pos) {
        for_each_tuple(d.arity, n, [&](const std::vector<std::size_t>& ctx) {
          // Split each block by the block of f(..., x at pos, ...).
          std::map<std::pair<std::size_t, std::size_t>, std::size_t> signature;
          std::vector<std::size_t> next(n);
          std::vector<std::size_t> args = ctx;
          for (std::size_t x = 0; x < n; ++x) {
            args[pos] = x;
            auto key = std::make_pair(block[x], block[lang.apply(d.name, args)]);
            auto it = signature.emplace(key, signature.size()).first;
            next[x] = it->second;
          }
          std::set<std::size_t> before(block.begin(), block.end()), after(next.begin(), next.end());
          if (after.size() != before.size()) {
            block = next;
            changed = true;
            return false;
          }
          return true;
        });
        if (changed) break;
      }
      if (changed) break;
    }
  }
  Relation out(rel.name() + "^1c", RelationKind::Equivalence, lang.values());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (block[i] == block[j]) out.add(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Semantic translations: relations R between target and source values,
// stored as (target index, source index) pairs in sorted order.

struct SemanticTranslation {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  bool contains(std::size_t t, std::size_t s) const {
    return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(t, s));
  }
  void normalize() {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }
  std::set<std::size_t> image() const {
    std::set<std::size_t> w;
    for (const auto& p : pairs) w.insert(p.first);
    return w;
  }
  friend bool operator==(const SemanticTranslation& a, const SemanticTranslation& b) { return a.pairs == b.pairs; }
  friend bool operator<(const SemanticTranslation& a, const SemanticTranslation& b) {
    if (a.pairs.size() != b.pairs.size()) return a.pairs.size() < b.pairs.size();
    return a.pairs < b.pairs;
  }
};

inline std::string format_translation(const FiniteLanguage& target, const FiniteLanguage& source,
                                      const SemanticTranslation& r) {
  std::string out = "{";
  for (std::size_t i = 0; i < r.pairs.size(); ++i)
    out += (i ? ",(" : "(") + target.values()[r.pairs[i].first] + "," + source.values()[r.pairs[i].second] + ")";
  return out + "}";
}

/// Reads a semantic translation from value-name pairs (target, source).
inline SemanticTranslation make_translation(const FiniteLanguage& target, const FiniteLanguage& source,
                                            const std::vector<std::pair<std::string, std::string>>& pairs) {
  SemanticTranslation r;
  for (const auto& [t, s] : pairs) r.pairs.emplace_back(target.value_index(t), source.value_index(s));
  r.normalize();
  return r;
}

inline void require_total(const FiniteLanguage& source, const SemanticTranslation& r) {
  std::vector<char> hit(source.size(), 0);
  for (const auto& p : r.pairs) hit[p.second] = 1;
  for (std::size_t v = 0; v < source.size(); ++v)
    if (!hit[v]) throw InputError("semantic translation is not total: no counterpart for " + source.qualified(v));
}

/// Restriction of a relation to target x source pairs.
inline SemanticTranslation restrict_pairs(const FiniteLanguage& target, const FiniteLanguage& source,
                                          const Relation& rel) {
  auto et = embed(target, rel);
  auto es = embed(source, rel);
  SemanticTranslation r;
  for (std::size_t t = 0; t < target.size(); ++t)
    for (std::size_t s = 0; s < source.size(); ++s)
      if (rel.related(et[t], es[s])) r.pairs.emplace_back(t, s);
  return r;
}

/// Union-find closure of R on the disjoint union of both value sets.
/// Carrier: source values then target values, qualified.
inline Relation smallest_equiv_containing(const FiniteLanguage& target, const FiniteLanguage& source,
                                          const SemanticTranslation& r) {
  std::vector<std::string> carrier;
  for (std::size_t i = 0; i < source.size(); ++i) carrier.push_back(source.qualified(i));
  for (std::size_t i = 0; i < target.size(); ++i) carrier.push_back(target.qualified(i));
  const std::size_t off = source.size();
  std::vector<std::size_t> parent(carrier.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [t, s] : r.pairs) parent[find(off + t)] = find(s);
  Relation out("=R", RelationKind::Equivalence, carrier);
  for (std::size_t i = 0; i < carrier.size(); ++i)
    for (std::size_t j = 0; j < carrier.size(); ++j)
      if (find(i) == find(j)) out.add(i, j);
  return out;
}

/// The equivalence w1 =R v1 ~1c v2 =R w2 on source and target values
/// (carrier as in smallest_equiv_containing).
inline Relation lr_closure(const FiniteLanguage& target, const FiniteLanguage& source, const Relation& sim,
                           const SemanticTranslation& r) {
  auto et = embed(target, sim);
  auto es = embed(source, sim);
  for (const auto& [t, s] : r.pairs)
    if (!sim.related(et[t], es[s]))
      throw InputError("semantic translation pair (" + target.qualified(t) + "," + source.qualified(s) +
                       ") is not contained in '" + sim.name() + "'");
  Relation eq = smallest_equiv_containing(target, source, r);
  Relation c = congruence_closure_1hole(source, sim);
  const std::size_t n = eq.size();
  Relation out(sim.name() + "^1c_R", RelationKind::Equivalence, eq.carrier());
  for (std::size_t w1 = 0; w1 < n; ++w1)
    for (std::size_t w2 = 0; w2 < n; ++w2) {
      bool rel = w1 == w2;
      for (std::size_t v1 = 0; v1 < source.size() && !rel; ++v1) {
        if (!eq.related(w1, v1)) continue;
        for (std::size_t v2 = 0; v2 < source.size() && !rel; ++v2)
          rel = c.related(v1, v2) && eq.related(v2, w2);
      }
      if (rel) out.add(w1, w2);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Correctness of head-map translations.

/// The standard head f(X1..Xn) of a construct and its translation.
struct HeadPair {
  const ConstructDecl* decl;
  Term head;
  Term image;
  std::vector<std::string> vars;  // fv(head) u fv(image), sorted
};

inline std::vector<HeadPair> head_pairs(const HeadMap& t) {
  std::vector<HeadPair> out;
  for (const auto& d : t.source().constructs()) {
    Term h = construct_head(d);
    Term img = t.translate(h);
    std::set<std::string> vs = free_vars(h);
    auto fi = free_vars(img);
    vs.insert(fi.begin(), fi.end());
    out.push_back({&d, h, img, std::vector<std::string>(vs.begin(), vs.end())});
  }
  return out;
}

struct CorrectnessVerdict {
  bool holds = true;
  /// Set when some source value has no counterpart at all.
  std::optional<std::size_t> uncovered_source;
  std::string op;
  Term head, image;
  Valuation eta, rho;
  std::size_t target_value = 0, source_value = 0;
};

/// Checks [[T(H)]](eta) R [[H]](rho) for every standard head H and all
/// valuations related pointwise by R; heads suffice for compositional T.
inline CorrectnessVerdict check_correct_wrt(const HeadMap& t, const FiniteLanguage& source,
                                            const FiniteLanguage& target, const SemanticTranslation& r) {
  require_total(source, r);
  CorrectnessVerdict v;
  for (const auto& hp : head_pairs(t)) {
    bool ok = for_each_tuple(hp.vars.size(), r.pairs.size(), [&](const std::vector<std::size_t>& pick) {
      Valuation eta, rho;
      for (std::size_t i = 0; i < hp.vars.size(); ++i) {
        eta[hp.vars[i]] = r.pairs[pick[i]].first;
        rho[hp.vars[i]] = r.pairs[pick[i]].second;
      }
      std::size_t tv = denote(target, hp.image, eta);
      std::size_t sv = denote(source, hp.head, rho);
      if (r.contains(tv, sv)) return true;
      v.holds = false;
      v.op = hp.decl->name;
      v.head = hp.head;
      v.image = hp.image;
      v.eta = std::move(eta);
      v.rho = std::move(rho);
      v.target_value = tv;
      v.source_value = sv;
      return false;
    });
    if (!ok) return v;
  }
  return v;
}

inline std::optional<std::size_t> uncovered_source_value(const FiniteLanguage& source, const SemanticTranslation& r) {
  std::vector<char> hit(source.size(), 0);
  for (const auto& p : r.pairs) hit[p.second] = 1;
  for (std::size_t v = 0; v < source.size(); ++v)
    if (!hit[v]) return v;
  return std::nullopt;
}

/// Correct up to ~: every source value has a counterpart, and T is correct
/// w.r.t. the full restriction of ~ to target x source.
inline CorrectnessVerdict check_correct_upto(const HeadMap& t, const FiniteLanguage& source,
                                             const FiniteLanguage& target, const Relation& sim) {
  SemanticTranslation r = restrict_pairs(target, source, sim);
  if (auto u = uncovered_source_value(source, r)) {
    CorrectnessVerdict v;
    v.holds = false;
    v.uncovered_source = u;
    return v;
  }
  return check_correct_wrt(t, source, target, r);
}

// ---------------------------------------------------------------------------
// Validity.

struct ValidityVerdict {
  enum class Status { Valid, Invalid, Inconclusive };
  Status status = Status::Invalid;
  SemanticTranslation witness;
  std::optional<std::size_t> uncovered_source;
  /// Number of counterpart functions whose closure was computed.
  std::size_t seeds_examined = 0;
  /// Number of candidate pairs in ~ restricted to target x source.
  std::size_t candidate_pairs = 0;
  std::size_t cap = 0;
};

namespace detail {

// Least relation containing `seed` that is closed under the head images
// (so that T is correct w.r.t. it). Returns nullopt as soon as a pair
// outside `allowed` is forced.
inline std::optional<SemanticTranslation> close_under_heads(const std::vector<HeadPair>& heads,
                                                            const FiniteLanguage& source,
                                                            const FiniteLanguage& target,
                                                            SemanticTranslation seed,
                                                            const SemanticTranslation& allowed) {
  std::vector<std::vector<char>> in(target.size(), std::vector<char>(source.size(), 0));
  for (const auto& [t, s] : seed.pairs) {
    if (!allowed.contains(t, s)) return std::nullopt;
    in[t][s] = 1;
  }
  std::vector<std::pair<std::size_t, std::size_t>> cur = seed.pairs;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& hp : heads) {
      const auto snapshot = cur;
      bool ok = for_each_tuple(hp.vars.size(), snapshot.size(), [&](const std::vector<std::size_t>& pick) {
        Valuation eta, rho;
        for (std::size_t i = 0; i < hp.vars.size(); ++i) {
          eta[hp.vars[i]] = snapshot[pick[i]].first;
          rho[hp.vars[i]] = snapshot[pick[i]].second;
        }
        std::size_t tv = denote(target, hp.image, eta);
        std::size_t sv = denote(source, hp.head, rho);
        if (in[tv][sv]) return true;
        if (!allowed.contains(tv, sv)) return false;
        in[tv][sv] = 1;
        cur.emplace_back(tv, sv);
        changed = true;
        return true;
      });
      if (!ok) return std::nullopt;
    }
  }
  SemanticTranslation out{cur};
  out.normalize();
  return out;
}

}  // namespace detail

/// Exact search for a semantic translation R contained in ~ w.r.t. which T
/// is correct. Every such R contains a function v -> v' with v' ~ v, and
/// then also that function's least closed extension; so it suffices to
/// close each such function. Returns the smallest (then lexicographically
/// least) closed R.
inline ValidityVerdict check_valid_upto(const HeadMap& t, const FiniteLanguage& source, const FiniteLanguage& target,
                                        const Relation& sim, std::size_t cap = 1000000) {
  ValidityVerdict v;
  v.cap = cap;
  SemanticTranslation allowed = restrict_pairs(target, source, sim);
  v.candidate_pairs = allowed.pairs.size();
  if (auto u = uncovered_source_value(source, allowed)) {
    v.status = ValidityVerdict::Status::Invalid;
    v.uncovered_source = u;
    return v;
  }
  std::vector<std::vector<std::size_t>> options(source.size());
  std::size_t space = 1;
  for (const auto& [tv, sv] : allowed.pairs) options[sv].push_back(tv);
  for (const auto& o : options) {
    if (space > cap / o.size()) {
      v.status = ValidityVerdict::Status::Inconclusive;
      return v;
    }
    space *= o.size();
  }
  auto heads = head_pairs(t);
  std::optional<SemanticTranslation> best;
  std::vector<std::size_t> choice(source.size(), 0);
  for (;;) {
    SemanticTranslation seed;
    for (std::size_t s = 0; s < source.size(); ++s) seed.pairs.emplace_back(options[s][choice[s]], s);
    seed.normalize();
    ++v.seeds_examined;
    auto closed = detail::close_under_heads(heads, source, target, seed, allowed);
    if (closed && (!best || *closed < *best)) best = closed;
    std::size_t j = source.size();
    while (j > 0 && ++choice[j - 1] == options[j - 1].size()) choice[--j] = 0;
    if (j == 0) break;
  }
  if (best) {
    v.status = ValidityVerdict::Status::Valid;
    v.witness = *best;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Preservation.

struct PreservationRejection {
  std::vector<std::size_t> candidate;  // source index -> target index
  Term term;
  Valuation rho;
  std::size_t target_value = 0, source_value = 0;
};

struct PreservationVerdict {
  bool holds = false;
  std::vector<std::size_t> witness;
  std::optional<std::size_t> uncovered_source;
  std::vector<PreservationRejection> rejected;
};

inline std::string format_counterpart(const FiniteLanguage& source, const FiniteLanguage& target,
                                      const std::vector<std::size_t>& f) {
  std::string out;
  for (std::size_t s = 0; s < f.size(); ++s)
    out += (s ? ", " : "") + std::string("bT(") + source.values()[s] + ")=" + target.values()[f[s]];
  return out;
}

namespace detail {

struct ReachedPair {
  std::size_t target_value, source_value;
  Term term;
};

// Searches for E and rho with [[T(E)]](bT . rho) outside ~ of [[E]](rho).
// Variables fixed by head images (outside X1..Xn) get the values zeta;
// every other variable can be chosen apart, and variable Y<k> carries
// source value k, so any two occurrences agree.
inline std::optional<PreservationRejection> refute_counterpart(
    const HeadMap& t, const std::vector<HeadPair>& heads, const FiniteLanguage& source,
    const FiniteLanguage& target, const std::vector<std::size_t>& bt, const std::vector<std::string>& fixed,
    const Valuation& zeta, const std::vector<std::string>& free_ids_for_values,
    const std::vector<std::vector<char>>& sim_ts) {
  (void)t;
  std::vector<std::vector<char>> in(target.size(), std::vector<char>(source.size(), 0));
  std::vector<ReachedPair> reached;
  auto offer = [&](std::size_t tv, std::size_t sv, const Term& e) -> bool {
    if (in[tv][sv]) return true;
    in[tv][sv] = 1;
    reached.push_back({tv, sv, e});
    return sim_ts[tv][sv] != 0;
  };
  auto reject = [&](const ReachedPair& p) {
    PreservationRejection r;
    r.candidate = bt;
    r.term = p.term;
    for (const auto& x : free_vars(p.term)) {
      auto z = zeta.find(x);
      if (z != zeta.end()) {
        r.rho[x] = z->second;
        continue;
      }
      auto k = std::find(free_ids_for_values.begin(), free_ids_for_values.end(), x);
      r.rho[x] = static_cast<std::size_t>(k - free_ids_for_values.begin());
    }
    r.target_value = p.target_value;
    r.source_value = p.source_value;
    return r;
  };
  for (const auto& x : fixed) {
    std::size_t sv = zeta.at(x);
    if (!offer(bt[sv], sv, Term::variable(x))) return reject(reached.back());
  }
  for (std::size_t sv = 0; sv < source.size(); ++sv)
    if (!offer(bt[sv], sv, Term::variable(free_ids_for_values[sv]))) return reject(reached.back());
  Valuation eta_fixed;
  for (const auto& [x, sv] : zeta) eta_fixed[x] = bt[sv];
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& hp : heads) {
      const auto snapshot = reached;
      const std::size_t n = hp.decl->arity;
      std::optional<PreservationRejection> bad;
      for_each_tuple(n, snapshot.size(), [&](const std::vector<std::size_t>& pick) {
        Valuation eta = eta_fixed, rho = zeta;
        std::vector<Term> args;
        for (std::size_t i = 0; i < n; ++i) {
          eta[placeholder(i + 1)] = snapshot[pick[i]].target_value;
          rho[placeholder(i + 1)] = snapshot[pick[i]].source_value;
          args.push_back(snapshot[pick[i]].term);
        }
        std::size_t tv = denote(target, hp.image, eta);
        std::size_t sv = denote(source, hp.head, rho);
        if (in[tv][sv]) return true;
        changed = true;
        Term e = Term::construct(hp.decl->name, {}, std::move(args), hp.decl->scopes);
        if (offer(tv, sv, e)) return true;
        bad = reject(reached.back());
        return false;
      });
      if (bad) return bad;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Decides whether some bT with bT(v) ~ v satisfies
/// [[T(E)]](bT . rho) ~ [[E]](rho) for every source term E and valuation rho.
/// Exact: the reachable (target, source) meaning pairs form a finite set,
/// computed by closing under the head images once per valuation of the
/// variables that the images introduce.
inline PreservationVerdict check_preserves(const HeadMap& t, const FiniteLanguage& source,
                                           const FiniteLanguage& target, const Relation& sim) {
  PreservationVerdict v;
  auto et = embed(target, sim);
  auto es = embed(source, sim);
  std::vector<std::vector<char>> sim_ts(target.size(), std::vector<char>(source.size(), 0));
  std::vector<std::vector<std::size_t>> options(source.size());
  for (std::size_t s = 0; s < source.size(); ++s)
    for (std::size_t tv = 0; tv < target.size(); ++tv)
      if (sim.related(et[tv], es[s])) {
        sim_ts[tv][s] = 1;
        options[s].push_back(tv);
      }
  for (std::size_t s = 0; s < source.size(); ++s)
    if (options[s].empty()) {
      v.uncovered_source = s;
      return v;
    }
  auto heads = head_pairs(t);
  std::set<std::string> fixed_set;
  for (const auto& hp : heads)
    for (const auto& x : hp.vars)
      if (!free_vars(hp.head).count(x)) fixed_set.insert(x);
  std::vector<std::string> fixed(fixed_set.begin(), fixed_set.end());
  std::set<std::string> avoid = fixed_set;
  for (std::size_t i = 1; i <= 8; ++i) avoid.insert(placeholder(i));
  std::vector<std::string> per_value;
  for (std::size_t s = 0; s < source.size(); ++s) {
    std::string y = "Y" + std::to_string(s + 1);
    while (avoid.count(y)) y += "'";
    per_value.push_back(y);
  }
  std::vector<std::size_t> choice(source.size(), 0);
  if (source.size() == 0) {
    v.holds = true;
    return v;
  }
  for (;;) {
    std::vector<std::size_t> bt(source.size());
    for (std::size_t s = 0; s < source.size(); ++s) bt[s] = options[s][choice[s]];
    std::optional<PreservationRejection> bad;
    for_each_tuple(fixed.size(), source.size(), [&](const std::vector<std::size_t>& z) {
      Valuation zeta;
      for (std::size_t i = 0; i < fixed.size(); ++i) zeta[fixed[i]] = z[i];
      bad = detail::refute_counterpart(t, heads, source, target, bt, fixed, zeta, per_value, sim_ts);
      return !bad;
    });
    if (!bad) {
      v.holds = true;
      v.witness = bt;
      return v;
    }
    v.rejected.push_back(*bad);
    std::size_t j = source.size();
    while (j > 0 && ++choice[j - 1] == options[j - 1].size()) choice[--j] = 0;
    if (j == 0) break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Respecting ~ on closed terms.

struct RespectsVerdict {
  bool holds = true;
  std::size_t depth = 0;
  std::size_t terms_checked = 0;
  std::optional<std::size_t> uncovered_source;
  std::optional<Term> witness;
  Valuation eta;
  std::size_t target_value = 0, source_value = 0;
};

/// [[T(p)]](eta) ~ [[p]] for every closed p to `depth` and every eta into
/// U = {v' | v' ~ v for some source v}.
inline RespectsVerdict check_respects(const HeadMap& t, const FiniteLanguage& source, const FiniteLanguage& target,
                                      const Relation& sim, std::size_t depth) {
  if (depth < 1) throw UsageError("check_respects: depth must be >= 1");
  RespectsVerdict v;
  v.depth = depth;
  SemanticTranslation r = restrict_pairs(target, source, sim);
  if (auto u = uncovered_source_value(source, r)) {
    v.holds = false;
    v.uncovered_source = u;
    return v;
  }
  auto u_set = r.image();
  std::vector<std::size_t> u(u_set.begin(), u_set.end());
  TermPools closed;
  closed.vars.clear();
  for (const auto& p : enumerate_terms(source.signature(), depth, closed)) {
    ++v.terms_checked;
    Term tp = t.translate(p);
    std::size_t sv = denote(source, p, {});
    const auto fv_set = free_vars(tp);
    std::vector<std::string> fv(fv_set.begin(), fv_set.end());
    bool ok = for_each_tuple(fv.size(), u.size(), [&](const std::vector<std::size_t>& pick) {
      Valuation eta;
      for (std::size_t i = 0; i < fv.size(); ++i) eta[fv[i]] = u[pick[i]];
      std::size_t tv = denote(target, tp, eta);
      if (r.contains(tv, sv)) return true;
      v.holds = false;
      v.witness = p;
      v.eta = std::move(eta);
      v.target_value = tv;
      v.source_value = sv;
      return false;
    });
    if (!ok) return v;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Congruence for the image of a translation on a value set W.

struct ImageCongruenceVerdict {
  bool holds = true;
  std::string op;
  Term image;
  Valuation theta, eta;
  std::size_t lhs_value = 0, rhs_value = 0;
};

inline ImageCongruenceVerdict is_congruence_for_image(const HeadMap& t, const FiniteLanguage& target,
                                                      const Relation& sim, const std::vector<std::size_t>& w) {
  Relation rel = restrict_to(target, sim);
  ImageCongruenceVerdict v;
  for (const auto& hp : head_pairs(t)) {
    const auto fv_set = free_vars(hp.image);
    std::vector<std::string> fv(fv_set.begin(), fv_set.end());
    bool ok = for_each_tuple(fv.size(), w.size(), [&](const std::vector<std::size_t>& a) {
      return for_each_tuple(fv.size(), w.size(), [&](const std::vector<std::size_t>& b) {
        Valuation theta, eta;
        for (std::size_t i = 0; i < fv.size(); ++i) {
          if (!rel.related(w[a[i]], w[b[i]])) return true;
          theta[fv[i]] = w[a[i]];
          eta[fv[i]] = w[b[i]];
        }
        std::size_t x = denote(target, hp.image, theta);
        std::size_t y = denote(target, hp.image, eta);
        if (rel.related(x, y)) return true;
        v = {false, hp.decl->name, hp.image, std::move(theta), std::move(eta), x, y};
        return false;
      });
    });
    if (!ok) return v;
  }
  return v;
}

/// U = {v' | v' ~ v for some source value v}, in target order.
inline std::vector<std::size_t> counterpart_domain(const FiniteLanguage& source, const FiniteLanguage& target,
                                                   const Relation& sim) {
  auto w = restrict_pairs(target, source, sim).image();
  return {w.begin(), w.end()};
}

/// W is closed under T(L): every translated head maps valuations into W
/// back into W. Returns the first offending head name, if any.
inline std::optional<std::string> closed_under_image(const HeadMap& t, const FiniteLanguage& target,
                                                     const std::vector<std::size_t>& w) {
  std::set<std::size_t> in(w.begin(), w.end());
  for (const auto& hp : head_pairs(t)) {
    const auto fv_set = free_vars(hp.image);
    std::vector<std::string> fv(fv_set.begin(), fv_set.end());
    bool ok = for_each_tuple(fv.size(), w.size(), [&](const std::vector<std::size_t>& a) {
      Valuation theta;
      for (std::size_t i = 0; i < fv.size(); ++i) theta[fv[i]] = w[a[i]];
      return in.count(denote(target, hp.image, theta)) > 0;
    });
    if (!ok) return hp.decl->name;
  }
  return std::nullopt;
}

/// Largest 1-hole congruence for T(L) on W contained in ~, as a block
/// number per element of W (blocks numbered by least member).
inline std::vector<std::size_t> image_congruence_closure(const HeadMap& t, const FiniteLanguage& target,
                                                         const Relation& sim, const std::vector<std::size_t>& w) {
  Relation rel = restrict_to(target, sim);
  const std::size_t n = w.size();
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos[w[i]] = i;
  std::vector<std::size_t> block(n);
  for (std::size_t i = 0; i < n; ++i) {
    block[i] = i;
    for (std::size_t j = 0; j < i; ++j)
      if (rel.related(w[i], w[j])) {
        block[i] = block[j];
        break;
      }
  }
  auto heads = head_pairs(t);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& hp : heads) {
      const auto fv_set = free_vars(hp.image);
      std::vector<std::string> fv(fv_set.begin(), fv_set.end());
      for (std::size_t hole = 0; hole < fv.size() && !changed; ++hole) {
        for_each_tuple(fv.size(), n, [&](const std::vector<std::size_t>& ctx) {
          std::map<std::pair<std::size_t, std::size_t>, std::size_t> sig;
          std::vector<std::size_t> next(n);
          Valuation theta;
          for (std::size_t i = 0; i < fv.size(); ++i) theta[fv[i]] = w[ctx[i]];
          for (std::size_t x = 0; x < n; ++x) {
            theta[fv[hole]] = w[x];
            std::size_t r = denote(target, hp.image, theta);
            auto it = pos.find(r);
            // Results outside W only count up to ~, which a congruence on W
            // contained in ~ cannot refine.
            std::size_t rb = it == pos.end() ? n + r : block[it->second];
            next[x] = sig.emplace(std::make_pair(block[x], rb), sig.size()).first->second;
          }
          std::set<std::size_t> b0(block.begin(), block.end()), b1(next.begin(), next.end());
          if (b0.size() == b1.size()) return true;
          block = next;
          changed = true;
          return false;
        });
      }
      if (changed) break;
    }
  }
  // Renumber by least member.
  std::map<std::size_t, std::size_t> renum;
  for (auto& b : block) b = renum.emplace(b, renum.size()).first->second;
  return block;
}

}  // namespace vtrans
