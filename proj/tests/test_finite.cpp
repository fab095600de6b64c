#include <catch_amalgamated.hpp>

#include "vtrans/json_io.hpp"
#include "vtrans/property_suite.hpp"

using namespace vtrans;

namespace {

std::string fx(const std::string& rel) { return std::string(VTRANS_FIXTURE_DIR) + "/finite/" + rel; }

struct Example {
  FiniteLanguage src, tgt;
  Relation sim;
  HeadMap t;
};

Example load(const std::string& dir, const std::string& trans = "id.json") {
  auto src = language_from_json(read_json_file(fx(dir + "/L.json")));
  auto tgt = language_from_json(read_json_file(fx(dir + "/Lp.json")));
  auto sim = relation_from_json(read_json_file(fx(dir + "/sim.json")));
  auto t = translation_from_json(read_json_file(fx(dir + "/" + trans)), src.signature_ptr(), tgt.signature_ptr());
  return {std::move(src), std::move(tgt), std::move(sim), std::move(t)};
}

std::string partition(const Relation& r) { return format_partition(r.classes(), r.carrier()); }

// All set partitions of {0..n-1} as restricted growth strings.
std::vector<std::vector<std::size_t>> all_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t m) {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t b = 0; b <= m; ++b) {
      cur.push_back(b);
      rec(std::max(m, b + 1));
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

TEST_CASE("denotation") {
  auto ex = load("congruence_image");
  CHECK(ex.src.values()[denote(ex.src, parse_term(ex.src.signature(), "not(X)"), {{"X", 1}})] == "0");
  CHECK(denote(ex.src, Term::variable("X"), {{"X", 1}}) == 1);
  CHECK_THROWS_AS(denote(ex.src, Term::variable("Y"), {{"X", 1}}), ValuationError);
  auto refl = load("reflection");
  CHECK(refl.tgt.values()[denote(refl.tgt, parse_term(refl.tgt.signature(), "next(next(Yes))"), {})] == "0");
}

TEST_CASE("denotation of substitutions") {
  auto ex = load("congruence_image");
  const auto& sig = ex.src.signature();
  Valuation rho{{"Y", 1}};
  CHECK(denote_subst(ex.src, {}, rho) == rho);
  CHECK(denote_subst(ex.src, {{"X", parse_term(sig, "not(Y)")}}, rho).at("X") == 0);
  // [[E[sigma]]](rho) = [[E]]([[sigma]](rho)) on every E to depth 3.
  TermPools pools;
  pools.vars = {"X", "Y"};
  Substitution sigma{{"X", parse_term(sig, "not(Y)")}, {"Y", parse_term(sig, "not(not(X))")}};
  for (const auto& e : enumerate_terms(sig, 3, pools))
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        Valuation r{{"X", x}, {"Y", y}};
        REQUIRE(denote(ex.src, substitute(e, sigma), r) == denote(ex.src, e, denote_subst(ex.src, sigma, r)));
      }
}

TEST_CASE("relation closure from generators") {
  auto id = close_relation("id", RelationKind::Equivalence, {"a", "b"}, {});
  CHECK(partition(id) == "{a} {b}");
  auto pnv = load("preserving_not_valid", "T.json");
  CHECK(partition(pnv.sim) == "{L.a,Lp.1,Lp.2} {L.b,Lp.3,Lp.4}");
  auto refl = load("reflection");
  CHECK(partition(refl.sim) == "{L.+,Lp.1,Lp.2} {L.-,Lp.0}");
  Relation again = refl.sim;
  again.close();
  CHECK(again == refl.sim);
  CHECK_THROWS_AS(close_relation("bad", RelationKind::Equivalence, {"a"}, {{"a", "z"}}), InputError);
  auto pre = close_relation("le", RelationKind::Preorder, {"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  CHECK(pre.related("a", "c"));
  CHECK_FALSE(pre.related("c", "a"));
}

TEST_CASE("congruence checks on the examples") {
  auto ex = load("congruence_image");
  CHECK(is_congruence(ex.src, ex.sim).holds);
  auto v = is_congruence(ex.tgt, ex.sim);
  REQUIRE_FALSE(v.holds);
  CHECK(v.op == "not");
  CHECK(ex.tgt.values()[v.lhs_args[0]] == "1");
  CHECK(ex.tgt.values()[v.rhs_args[0]] == "top");
  CHECK(ex.tgt.values()[v.lhs_value] == "0");
  CHECK(ex.tgt.values()[v.rhs_value] == "top");

  auto refl = load("reflection");
  auto r = is_congruence(refl.tgt, refl.sim);
  REQUIRE_FALSE(r.holds);
  CHECK(r.op == "next");
  CHECK(refl.tgt.values()[r.lhs_value] == "2");
  CHECK(refl.tgt.values()[r.rhs_value] == "0");

  // One-hole and full congruence agree for finite arity.
  for (const char* dir : {"congruence_image", "reflection", "closure_undetermined"}) {
    auto e = load(dir);
    CHECK(is_congruence(e.src, e.sim).holds == is_one_hole_congruence(e.src, e.sim).holds);
    CHECK(is_congruence(e.tgt, e.sim).holds == is_one_hole_congruence(e.tgt, e.sim).holds);
  }
}

TEST_CASE("congruence closure") {
  auto refl = load("reflection");
  CHECK(partition(congruence_closure_1hole(refl.tgt, refl.sim)) == "{0} {1} {2}");
  auto cu = load("closure_undetermined");
  CHECK(partition(congruence_closure_1hole(cu.src, cu.sim)) == "{0} {1} {top} {bot}");
  auto ci = load("congruence_image");
  CHECK(congruence_closure_1hole(ci.src, ci.sim) == restrict_to(ci.src, ci.sim));
}

TEST_CASE("congruence closure is the largest 1-hole congruence inside the relation") {
  detail::SuiteRng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    auto lang = detail::random_language(rng, "A", 5, 3);
    auto sim = detail::random_equivalence(rng, {&lang});
    Relation c = congruence_closure_1hole(lang, sim);
    Relation c_q("c", RelationKind::Equivalence, sim.carrier());
    for (std::size_t i = 0; i < lang.size(); ++i)
      for (std::size_t j = 0; j < lang.size(); ++j)
        if (c.related(i, j)) c_q.add(i, j);
    REQUIRE(is_one_hole_congruence(lang, c_q).holds);
    std::size_t best = 0, c_pairs = 0;
    for (std::size_t i = 0; i < lang.size(); ++i)
      for (std::size_t j = 0; j < lang.size(); ++j) c_pairs += c.related(i, j);
    for (const auto& p : all_partitions(lang.size())) {
      Relation cand("p", RelationKind::Equivalence, sim.carrier());
      bool inside = true;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < lang.size(); ++i)
        for (std::size_t j = 0; j < lang.size(); ++j)
          if (p[i] == p[j]) {
            cand.add(i, j);
            ++pairs;
            inside = inside && sim.related(i, j);
          }
      if (!inside || !is_one_hole_congruence(lang, cand).holds) continue;
      best = std::max(best, pairs);
      // Every 1-hole congruence inside ~ is inside the closure.
      for (std::size_t i = 0; i < lang.size(); ++i)
        for (std::size_t j = 0; j < lang.size(); ++j)
          if (cand.related(i, j)) REQUIRE(c.related(i, j));
    }
    CHECK(best == c_pairs);
  }
}

TEST_CASE("smallest equivalence containing a semantic translation") {
  auto cu = load("closure_undetermined");
  auto r = semantic_translation_from_json(read_json_file(fx("closure_undetermined/R.json")), cu.src, cu.tgt);
  auto rd = semantic_translation_from_json(read_json_file(fx("closure_undetermined/Rdagger.json")), cu.src, cu.tgt);
  CHECK(partition(smallest_equiv_containing(cu.tgt, cu.src, r)) ==
        "{L.0,Lp.0'} {L.1,Lp.1'} {L.top,Lp.top'} {L.bot,Lp.bot'}");
  CHECK(partition(smallest_equiv_containing(cu.tgt, cu.src, rd)) ==
        "{L.0,Lp.0'} {L.1,Lp.1'} {L.top,Lp.bot'} {L.bot,Lp.top'}");
  // Shared target value glues sources together.
  FiniteLanguage s("S", {"a", "b"});
  FiniteLanguage t("T", {"1"});
  auto shared = make_translation(t, s, {{"1", "a"}, {"1", "b"}});
  CHECK(partition(smallest_equiv_containing(t, s, shared)) == "{S.a,S.b,T.1}");
}

TEST_CASE("closure of a translation is not determined by the language") {
  auto cu = load("closure_undetermined");
  auto r = semantic_translation_from_json(read_json_file(fx("closure_undetermined/R.json")), cu.src, cu.tgt);
  auto rd = semantic_translation_from_json(read_json_file(fx("closure_undetermined/Rdagger.json")), cu.src, cu.tgt);
  CHECK(check_correct_wrt(cu.t, cu.src, cu.tgt, r).holds);
  CHECK(check_correct_wrt(cu.t, cu.src, cu.tgt, rd).holds);
  auto a = lr_closure(cu.tgt, cu.src, cu.sim, r);
  auto b = lr_closure(cu.tgt, cu.src, cu.sim, rd);
  CHECK(partition(a) == "{L.0,Lp.0'} {L.1,Lp.1'} {L.top,Lp.top'} {L.bot,Lp.bot'}");
  CHECK(partition(b) == "{L.0,Lp.0'} {L.1,Lp.1'} {L.top,Lp.bot'} {L.bot,Lp.top'}");
  for (const auto* rel : {&a, &b})
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(rel->related(i, j) == (i == j));
  // R must lie inside ~.
  auto bad = make_translation(cu.tgt, cu.src, {{"0'", "1"}, {"1'", "0"}, {"top'", "top"}, {"bot'", "bot"}});
  CHECK_THROWS_AS(lr_closure(cu.tgt, cu.src, cu.sim, bad), InputError);
}

TEST_CASE("correctness w.r.t. a semantic translation") {
  auto ci = load("congruence_image");
  auto r = semantic_translation_from_json(read_json_file(fx("congruence_image/R.json")), ci.src, ci.tgt);
  CHECK(check_correct_wrt(ci.t, ci.src, ci.tgt, r).holds);

  auto pnv = load("preserving_not_valid", "T.json");
  auto rp = semantic_translation_from_json(read_json_file(fx("preserving_not_valid/R.json")), pnv.src, pnv.tgt);
  auto v = check_correct_wrt(pnv.t, pnv.src, pnv.tgt, rp);
  REQUIRE_FALSE(v.holds);
  CHECK(to_string(v.image) == "f(X0)");
  CHECK(pnv.tgt.values()[v.eta.at("X0")] == "2");
  CHECK(pnv.tgt.values()[v.target_value] == "3");
  CHECK(pnv.src.values()[v.source_value] == "a");

  auto partial = make_translation(pnv.tgt, pnv.src, {{"1", "a"}});
  CHECK_THROWS_AS(check_correct_wrt(pnv.t, pnv.src, pnv.tgt, partial), InputError);
}

TEST_CASE("validity") {
  auto ci = load("congruence_image");
  auto v = check_valid_upto(ci.t, ci.src, ci.tgt, ci.sim);
  REQUIRE(v.status == ValidityVerdict::Status::Valid);
  CHECK(format_translation(ci.tgt, ci.src, v.witness) == "{(0,0),(1,1)}");

  auto pnv = load("preserving_not_valid", "T.json");
  auto p = check_valid_upto(pnv.t, pnv.src, pnv.tgt, pnv.sim);
  CHECK(p.status == ValidityVerdict::Status::Invalid);
  CHECK(p.candidate_pairs == 4);

  auto refl = load("reflection");
  auto q = check_valid_upto(refl.t, refl.src, refl.tgt, refl.sim);
  REQUIRE(q.status == ValidityVerdict::Status::Valid);
  CHECK(format_translation(refl.tgt, refl.src, q.witness) == "{(0,-),(1,+),(2,+)}");

  for (const auto* e : {&ci, &pnv, &refl}) {
    auto got = check_valid_upto(e->t, e->src, e->tgt, e->sim);
    auto want = detail::brute_force_valid(e->t, e->src, e->tgt, e->sim);
    REQUIRE(want.has_value() == (got.status == ValidityVerdict::Status::Valid));
    if (want) CHECK(*want == got.witness);
  }
}

TEST_CASE("validity search agrees with brute force on random instances") {
  detail::SuiteRng rng(2024);
  int valid = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto a = detail::random_language(rng, "A", 3, 3);
    auto b = detail::random_language(rng, "B", 3, 3);
    auto t = detail::random_heads(rng, a, b, true);
    auto sim = detail::random_equivalence(rng, {&a, &b});
    auto got = check_valid_upto(t, a, b, sim);
    auto want = detail::brute_force_valid(t, a, b, sim);
    REQUIRE(want.has_value() == (got.status == ValidityVerdict::Status::Valid));
    if (want) {
      ++valid;
      REQUIRE(*want == got.witness);
      // Witness is total and inside ~.
      REQUIRE_FALSE(uncovered_source_value(a, got.witness));
      auto allowed = restrict_pairs(b, a, sim);
      for (const auto& pr : got.witness.pairs) REQUIRE(allowed.contains(pr.first, pr.second));
    }
  }
  CHECK(valid > 20);
}

TEST_CASE("correct up to") {
  auto ci = load("congruence_image");
  auto v = check_correct_upto(ci.t, ci.src, ci.tgt, ci.sim);
  REQUIRE_FALSE(v.holds);
  CHECK(v.op == "not");
  CHECK(ci.tgt.values()[v.eta.at("X1")] == "top");
  CHECK(ci.src.values()[v.rho.at("X1")] == "1");
  CHECK(ci.tgt.values()[v.target_value] == "top");
  CHECK(ci.src.values()[v.source_value] == "0");

  // Only constants in the source: nothing can go wrong.
  auto refl = load("reflection");
  CHECK(check_correct_upto(refl.t, refl.src, refl.tgt, refl.sim).holds);

  FiniteLanguage l("L", {"0", "1"});
  l.add_operator("n", 1, {1, 0});
  auto sig = l.signature_ptr();
  auto id = close_relation("id", RelationKind::Equivalence, {"L.0", "L.1"}, {});
  CHECK(check_correct_upto(identity_heads(sig), l, l, id).holds);
}

TEST_CASE("preservation") {
  auto pnv = load("preserving_not_valid", "T.json");
  auto v = check_preserves(pnv.t, pnv.src, pnv.tgt, pnv.sim);
  REQUIRE(v.holds);
  CHECK(format_counterpart(pnv.src, pnv.tgt, v.witness) == "bT(a)=1, bT(b)=4");
  // bT(a)=1, bT(b)=3 is refuted first; bT(a)=2 candidates fail on f(2)=3.
  REQUIRE(v.rejected.size() == 1);
  CHECK(format_counterpart(pnv.src, pnv.tgt, v.rejected[0].candidate) == "bT(a)=1, bT(b)=3");
  bool saw_a2 = false;
  // Direct refutation of bT(a)=2 through the exhaustive closure.
  for (std::size_t b : {2u, 3u}) {
    std::vector<std::size_t> bt{1, b};  // a -> "2", b -> "3"/"4"
    std::vector<std::vector<char>> sim_ts(4, std::vector<char>(2, 0));
    auto e = embed(pnv.tgt, pnv.sim);
    auto s = embed(pnv.src, pnv.sim);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 2; ++y) sim_ts[x][y] = pnv.sim.related(e[x], s[y]);
    auto heads = head_pairs(pnv.t);
    std::optional<PreservationRejection> bad;
    for (std::size_t z = 0; z < 2 && !bad; ++z)
      bad = detail::refute_counterpart(pnv.t, heads, pnv.src, pnv.tgt, bt, {"X0"}, {{"X0", z}}, {"Y1", "Y2"},
                                       sim_ts);
    REQUIRE(bad);
    if (pnv.tgt.values()[bad->target_value] == "3" && pnv.src.values()[bad->source_value] == "a") saw_a2 = true;
  }
  CHECK(saw_a2);

  auto ci = load("congruence_image");
  CHECK(check_preserves(ci.t, ci.src, ci.tgt, ci.sim).holds);
}

TEST_CASE("preservation decision agrees with bounded enumeration") {
  // For each counterpart bT, search terms to depth 4 over the fixed image
  // variables plus one free variable; a refutation must show up there
  // whenever the exact procedure rejects every bT.
  detail::SuiteRng rng(77);
  for (int trial = 0; trial < 120; ++trial) {
    auto a = detail::random_language(rng, "A", 2, 2);
    auto b = detail::random_language(rng, "B", 3, 2);
    auto t = detail::random_heads(rng, a, b, true);
    auto sim = detail::random_equivalence(rng, {&a, &b});
    auto verdict = check_preserves(t, a, b, sim);
    if (verdict.uncovered_source) continue;
    auto et = embed(b, sim);
    auto es = embed(a, sim);
    TermPools pools;
    pools.vars = {"X0", "Y"};
    auto terms = enumerate_terms(a.signature(), 4, pools);
    std::vector<std::vector<std::size_t>> options(a.size());
    for (std::size_t s = 0; s < a.size(); ++s)
      for (std::size_t x = 0; x < b.size(); ++x)
        if (sim.related(et[x], es[s])) options[s].push_back(x);
    bool some_survives = false;
    for_each_tuple(a.size(), 3, [&](const std::vector<std::size_t>& pick) {
      std::vector<std::size_t> bt(a.size());
      for (std::size_t s = 0; s < a.size(); ++s) {
        if (pick[s] >= options[s].size()) return true;
        bt[s] = options[s][pick[s]];
      }
      bool ok = true;
      for (const auto& e : terms) {
        Term te = t.translate(e);
        for_each_tuple(2, a.size(), [&](const std::vector<std::size_t>& r) {
          Valuation rho{{"X0", r[0]}, {"Y", r[1]}}, eta{{"X0", bt[r[0]]}, {"Y", bt[r[1]]}};
          if (!sim.related(et[denote(b, te, eta)], es[denote(a, e, rho)])) ok = false;
          return ok;
        });
        if (!ok) break;
      }
      if (ok) some_survives = true;
      if (ok && verdict.holds) REQUIRE(bt == verdict.witness);
      return !ok;
    });
    // Bounded search is an over-approximation of preservation.
    if (verdict.holds) REQUIRE(some_survives);
  }
}

TEST_CASE("respecting the relation on closed terms") {
  auto ci = load("congruence_image");
  CHECK(check_respects(ci.t, ci.src, ci.tgt, ci.sim, 3).holds);
  auto pnv = load("preserving_not_valid", "T.json");
  auto v = check_respects(pnv.t, pnv.src, pnv.tgt, pnv.sim, 3);
  REQUIRE_FALSE(v.holds);
  CHECK(to_string(*v.witness) == "0");
  CHECK(pnv.tgt.values()[v.eta.at("X0")] == "2");
  CHECK(pnv.tgt.values()[v.target_value] == "3");
  // No source values: vacuously respected.
  FiniteLanguage empty("E", {});
  auto none = close_relation("e", RelationKind::Equivalence, {}, {});
  CHECK(check_respects(identity_heads(empty.signature_ptr()), empty, empty, none, 2).holds);
}

TEST_CASE("congruence for the image on a value set") {
  auto ci = load("congruence_image");
  auto u = counterpart_domain(ci.src, ci.tgt, ci.sim);
  CHECK(u.size() == 3);
  CHECK_FALSE(is_congruence_for_image(ci.t, ci.tgt, ci.sim, u).holds);
  CHECK(is_congruence_for_image(ci.t, ci.tgt, ci.sim, {0, 1}).holds);
  FiniteLanguage l("L", {"0", "1"});
  l.add_operator("n", 1, {1, 0});
  auto id = close_relation("id", RelationKind::Equivalence, {"L.0", "L.1"}, {});
  CHECK(is_congruence_for_image(identity_heads(l.signature_ptr()), l, id, {0, 1}).holds);
}

TEST_CASE("semantic alpha relation is the identity for binder-free languages") {
  auto ci = load("congruence_image");
  for (const auto& e : enumerate_terms(ci.src.signature(), 3, {}))
    for (std::size_t x = 0; x < 2; ++x) CHECK(denote(ci.src, e, {{"X", x}}) == denote(ci.src, alpha_variant(e), {{"X", x}}));
}

TEST_CASE("denotation ignores variables outside the term") {
  auto ci = load("congruence_image");
  for (const auto& e : enumerate_terms(ci.src.signature(), 3, {}))
    for (std::size_t x = 0; x < 2; ++x)
      CHECK(denote(ci.src, e, {{"X", x}}) == denote(ci.src, e, {{"X", x}, {"Q", 1 - x}}));
}

TEST_CASE("property suite") {
  auto rep = property_suite(42, 200);
  INFO(format_report(rep));
  CHECK(rep.ok());
  for (const auto& r : rep.results) CHECK(r.instances > 0);
  CHECK(format_report(property_suite(5, 30)) == format_report(property_suite(5, 30)));
}
