#pragma once

// Randomised brute-force checks of the theorems relating validity,
// correctness, congruence closure, composition and preservation on small
// finite languages.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vtrans/finite.hpp"
#include "vtrans/translation.hpp"

namespace vtrans {

struct PropertyResult {
  std::string name;
  std::size_t instances = 0;  // trials where the property's premise held
  std::size_t violations = 0;
  std::string counterexample;
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<PropertyResult> results;

  bool ok() const {
    for (const auto& r : results)
      if (r.violations) return false;
    return true;
  }
};

namespace detail {

class SuiteRng {
 public:
  explicit SuiteRng(std::uint64_t seed) : gen_(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(gen_() % n); }
  bool coin() { return below(2) == 1; }

 private:
  std::mt19937_64 gen_;
};

struct Instance {
  std::size_t max_values, max_constructs;
};

inline FiniteLanguage random_language(SuiteRng& rng, const std::string& name, std::size_t max_values,
                                      std::size_t max_constructs) {
  std::size_t nv = 1 + rng.below(max_values);
  std::vector<std::string> values;
  for (std::size_t i = 0; i < nv; ++i) values.push_back(std::string(1, static_cast<char>('a' + i)));
  FiniteLanguage lang(name, values);
  std::size_t nc = 1 + rng.below(max_constructs);
  for (std::size_t c = 0; c < nc; ++c) {
    std::size_t arity = rng.below(3);
    std::size_t cells = 1;
    for (std::size_t i = 0; i < arity; ++i) cells *= nv;
    std::vector<std::size_t> table(cells);
    for (auto& r : table) r = rng.below(nv);
    lang.add_operator("f" + std::to_string(c), arity, std::move(table));
  }
  return lang;
}

inline Term random_image(SuiteRng& rng, const FiniteLanguage& target, std::size_t arity, bool extra, int depth) {
  const auto& cs = target.signature().constructs();
  std::size_t nvars = arity + (extra ? 1 : 0);
  bool leaf_var = nvars > 0 && (depth <= 0 || rng.below(3) == 0);
  if (leaf_var) {
    std::size_t k = rng.below(nvars);
    return Term::variable(k < arity ? placeholder(k + 1) : "X0");
  }
  std::vector<const ConstructDecl*> usable;
  for (const auto& d : cs)
    if (depth > 0 || d.arity == 0) usable.push_back(&d);
  if (usable.empty()) {
    if (nvars == 0) {
      // Fall back to any construct; arguments become constants if possible.
      usable.push_back(&cs[rng.below(cs.size())]);
    } else {
      std::size_t k = rng.below(nvars);
      return Term::variable(k < arity ? placeholder(k + 1) : "X0");
    }
  }
  const ConstructDecl* d = usable[rng.below(usable.size())];
  std::vector<Term> args;
  for (std::size_t i = 0; i < d->arity; ++i) args.push_back(random_image(rng, target, arity, extra, depth - 1));
  return Term::construct(d->name, {}, std::move(args), d->scopes);
}

// Images must be finite terms; a target without constants and a
// nullary source construct forces an extra variable, so those draws are
// retried with one.
inline HeadMap random_heads(SuiteRng& rng, const FiniteLanguage& source, const FiniteLanguage& target,
                            bool allow_extra) {
  std::map<std::string, Term> images;
  bool target_has_constant = false;
  for (const auto& d : target.signature().constructs()) target_has_constant |= d.arity == 0;
  for (const auto& d : source.signature().constructs()) {
    bool extra = allow_extra && rng.below(3) == 0;
    if (d.arity == 0 && !target_has_constant) extra = true;
    Term img = random_image(rng, target, d.arity, extra, 2);
    images.emplace(d.name, img);
  }
  return HeadMap(source.signature_ptr(), target.signature_ptr(), std::move(images));
}

inline Relation random_equivalence(SuiteRng& rng, const std::vector<const FiniteLanguage*>& langs) {
  std::vector<std::string> carrier;
  for (const auto* l : langs)
    for (std::size_t i = 0; i < l->size(); ++i) carrier.push_back(l->qualified(i));
  std::size_t blocks = 1 + rng.below(3);
  std::vector<std::size_t> b(carrier.size());
  for (auto& x : b) x = rng.below(blocks);
  Relation r("sim", RelationKind::Equivalence, carrier);
  for (std::size_t i = 0; i < carrier.size(); ++i)
    for (std::size_t j = 0; j < carrier.size(); ++j)
      if (b[i] == b[j]) r.add(i, j);
  return r;
}

inline std::string describe(const FiniteLanguage& l) {
  std::ostringstream os;
  os << l.name() << " values {";
  for (std::size_t i = 0; i < l.size(); ++i) os << (i ? "," : "") << l.values()[i];
  os << "}";
  for (const auto& d : l.signature().constructs()) {
    os << " " << d.name << "/" << d.arity << "[";
    bool first = true;
    for_each_tuple(d.arity, l.size(), [&](const std::vector<std::size_t>& a) {
      os << (first ? "" : " ");
      first = false;
      for (std::size_t x : a) os << l.values()[x];
      os << (a.empty() ? "" : ">") << l.values()[l.apply(d.name, a)];
      return true;
    });
    os << "]";
  }
  return os.str();
}

inline std::string describe(const HeadMap& t) {
  std::string out = "T:";
  for (const auto& [op, img] : t.images()) out += " " + op + "->" + to_string(img);
  return out;
}

inline std::string describe(const Relation& r) {
  std::string out = "sim:";
  for (const auto& cls : r.classes()) {
    out += " {";
    for (std::size_t k = 0; k < cls.size(); ++k) out += (k ? "," : "") + r.carrier()[cls[k]];
    out += "}";
  }
  return out;
}

/// Reference validity decision: every total subset of ~ restricted to
/// target x source, tried in order of size.
inline std::optional<SemanticTranslation> brute_force_valid(const HeadMap& t, const FiniteLanguage& source,
                                                            const FiniteLanguage& target, const Relation& sim) {
  auto allowed = restrict_pairs(target, source, sim);
  const std::size_t m = allowed.pairs.size();
  if (m > 16) throw UsageError("brute_force_valid: too many candidate pairs");
  std::optional<SemanticTranslation> best;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    SemanticTranslation r;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) r.pairs.push_back(allowed.pairs[i]);
    if (uncovered_source_value(source, r)) continue;
    if (!check_correct_wrt(t, source, target, r).holds) continue;
    if (!best || r < *best) best = r;
  }
  return best;
}

inline SemanticTranslation compose_semantic(const SemanticTranslation& r1, const SemanticTranslation& r2) {
  // r1 relates L2 to L1, r2 relates L3 to L2; result relates L3 to L1.
  SemanticTranslation out;
  for (const auto& [v2, v1] : r1.pairs)
    for (const auto& [v3, w2] : r2.pairs)
      if (v2 == w2) out.pairs.emplace_back(v3, v1);
  out.normalize();
  return out;
}

}  // namespace detail

/// Runs `trials` random instances. Instance sizes grow with the trial
/// index, so the first violation reported is among the smallest found.
inline PropertyReport property_suite(std::uint64_t seed, std::size_t trials) {
  if (trials < 1) throw UsageError("property suite needs at least one trial");
  using namespace detail;
  PropertyReport rep;
  rep.seed = seed;
  rep.trials = trials;
  for (const char* name : {"valid-search matches brute force", "correct iff valid and congruence on image",
                           "composition correct w.r.t. R2.R1", "closure of translation clauses (1)-(3)",
                           "valid implies preserves", "fvr and preserves implies valid"}) {
    rep.results.emplace_back();
    rep.results.back().name = name;
  }
  auto violate = [&](std::size_t k, const std::string& why) {
    auto& r = rep.results[k];
    if (r.violations++ == 0) r.counterexample = why;
  };
  SuiteRng rng(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::size_t size = 1 + (3 * trial) / trials;  // 1..3
    FiniteLanguage l1 = random_language(rng, "A", size, size);
    FiniteLanguage l2 = random_language(rng, "B", size, size);
    FiniteLanguage l3 = random_language(rng, "C", size, size);
    HeadMap t1 = random_heads(rng, l1, l2, true);
    HeadMap t2 = random_heads(rng, l2, l3, true);
    HeadMap tf = random_heads(rng, l1, l2, false);
    Relation sim = random_equivalence(rng, {&l1, &l2, &l3});
    auto context = [&](const HeadMap& t, const FiniteLanguage& s, const FiniteLanguage& g) {
      return describe(s) + "; " + describe(g) + "; " + describe(t) + "; " + describe(sim);
    };

    auto v1 = check_valid_upto(t1, l1, l2, sim);
    auto bf = brute_force_valid(t1, l1, l2, sim);
    ++rep.results[0].instances;
    bool valid1 = v1.status == ValidityVerdict::Status::Valid;
    if (valid1 != bf.has_value() || (valid1 && !(v1.witness == *bf)))
      violate(0, context(t1, l1, l2));

    auto u = counterpart_domain(l1, l2, sim);
    bool correct = check_correct_upto(t1, l1, l2, sim).holds;
    bool cong = is_congruence_for_image(t1, l2, sim, u).holds;
    ++rep.results[1].instances;
    if (correct != (valid1 && cong)) violate(1, context(t1, l1, l2));

    auto v2 = check_valid_upto(t2, l2, l3, sim);
    if (valid1 && v2.status == ValidityVerdict::Status::Valid) {
      ++rep.results[2].instances;
      auto r = compose_semantic(v1.witness, v2.witness);
      HeadMap tc = compose_translations(t1, t2);
      bool ok = !uncovered_source_value(l1, r) && check_correct_wrt(tc, l1, l3, r).holds;
      auto e3 = embed(l3, sim);
      auto e1 = embed(l1, sim);
      for (const auto& [a, b] : r.pairs) ok = ok && sim.related(e3[a], e1[b]);
      if (!ok) violate(2, context(t1, l1, l2) + "; " + describe(l3) + "; " + describe(t2));
    }

    if (valid1) {
      ++rep.results[3].instances;
      Relation lr = lr_closure(l2, l1, sim, v1.witness);
      Relation c = congruence_closure_1hole(l1, sim);
      bool ok = lr.is_equivalence();
      for (std::size_t a = 0; a < l1.size(); ++a)
        for (std::size_t b = 0; b < l1.size(); ++b) ok = ok && lr.related(a, b) == c.related(a, b);
      // Contained in ~.
      for (std::size_t a = 0; a < lr.size(); ++a)
        for (std::size_t b = 0; b < lr.size(); ++b)
          if (lr.related(a, b)) ok = ok && sim.related(lr.carrier()[a], lr.carrier()[b]);
      auto w_set = v1.witness.image();
      std::vector<std::size_t> w(w_set.begin(), w_set.end());
      ok = ok && !closed_under_image(t1, l2, w);
      auto blocks = image_congruence_closure(t1, l2, sim, w);
      const std::size_t off = l1.size();
      for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
          ok = ok && lr.related(off + w[i], off + w[j]) == (blocks[i] == blocks[j]);
      if (!ok) violate(3, context(t1, l1, l2));

      ++rep.results[4].instances;
      if (!check_preserves(t1, l1, l2, sim).holds) violate(4, context(t1, l1, l2));
    }

    if (check_preserves(tf, l1, l2, sim).holds) {
      ++rep.results[5].instances;
      if (check_valid_upto(tf, l1, l2, sim).status != ValidityVerdict::Status::Valid)
        violate(5, context(tf, l1, l2));
    }
  }
  return rep;
}

inline std::string format_report(const PropertyReport& rep) {
  std::ostringstream os;
  os << "property suite: seed " << rep.seed << ", " << rep.trials << " trials\n";
  for (const auto& r : rep.results) {
    os << "  " << r.name << ": " << r.instances << " instances, " << r.violations << " violations\n";
    if (r.violations) os << "    first counterexample: " << r.counterexample << "\n";
  }
  os << (rep.ok() ? "result: no violations\n" : "result: VIOLATIONS FOUND\n");
  return os.str();
}

}  // namespace vtrans
