#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "vtrans/bisim.hpp"
#include "vtrans/encodings.hpp"

using namespace vtrans;

namespace {

using Matrix = std::vector<std::vector<bool>>;
using K = BisimKind;
using S = BisimVerdict::Status;

PiTerm P(const std::string& s) { return parse_pi(s); }

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(VTRANS_FIXTURE_DIR) + "/" + rel);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Hand-built complete graph; state keys are "s0", "s1", ...
ReductionGraph make_graph(std::vector<std::vector<std::size_t>> succ, std::vector<std::set<Barb>> barbs) {
  ReductionGraph g;
  for (std::size_t i = 0; i < succ.size(); ++i) {
    PiState st;
    st.key = "s" + std::to_string(i);
    g.states.push_back(st);
  }
  g.succ = std::move(succ);
  g.barbs = std::move(barbs);
  g.complete = true;
  g.divergent = detail::divergent_states(g.succ, std::vector<bool>(g.size(), true));
  return g;
}

ReductionGraph random_graph(std::mt19937& rng) {
  std::uniform_int_distribution<std::size_t> nd(1, 4);
  std::size_t n = nd(rng);
  std::uniform_int_distribution<int> coin(0, 3);
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::set<Barb>> barbs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (coin(rng) == 0) succ[i].push_back(j);
    if (coin(rng) == 0) barbs[i].insert(Barb{Barb::Kind::Output, "a"});
    if (coin(rng) == 0) barbs[i].insert(Barb{Barb::Kind::Output, "b"});
  }
  return make_graph(std::move(succ), std::move(barbs));
}

// Reflexive-transitive closure by Warshall.
Matrix closure(const ReductionGraph& g) {
  std::size_t n = g.size();
  Matrix m(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = true;
    for (std::size_t j : g.succ[i]) m[i][j] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (m[i][k] && m[k][j]) m[i][j] = true;
  return m;
}

// Oracle: literal reading of the clauses on the disjoint union of both
// graphs, iterated to the greatest fixpoint of a symmetric relation.
class Oracle {
 public:
  Oracle(const ReductionGraph& a, const ReductionGraph& b, K kind) : kind_(kind), n_(a.size() + b.size()) {
    off_ = a.size();
    step_.assign(n_, std::vector<bool>(n_, false));
    barbs_.resize(n_);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (auto j : a.succ[i]) step_[i][j] = true;
      barbs_[i] = a.barbs[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (auto j : b.succ[i]) step_[off_ + i][off_ + j] = true;
      barbs_[off_ + i] = b.barbs[i];
    }
    star_ = step_;
    for (std::size_t i = 0; i < n_; ++i) star_[i][i] = true;
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (star_[i][k] && star_[k][j]) star_[i][j] = true;
    plus_ = step_;
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (plus_[i][k] && plus_[k][j]) plus_[i][j] = true;
  }

  bool related_roots() {
    Matrix r(n_, std::vector<bool>(n_, true));
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t p = 0; p < n_; ++p)
        for (std::size_t q = 0; q < n_; ++q)
          if (r[p][q] && !(ok(r, p, q) && ok(r, q, p))) {
            r[p][q] = r[q][p] = false;
            changed = true;
          }
    }
    return r[0][off_];
  }

 private:
  bool diverges(std::size_t p) const {
    for (std::size_t s = 0; s < n_; ++s)
      if (star_[p][s] && plus_[s][s]) return true;
    return false;
  }

  bool ok(const Matrix& r, std::size_t p, std::size_t q) const {
    for (const auto& w : barbs_[p]) {
      bool found = false;
      for (std::size_t qd = 0; qd < n_; ++qd) {
        if (kind_ == K::Strong) {
          found = barbs_[q].count(w) > 0;
          break;
        }
        if (star_[q][qd] && barbs_[qd].count(w) && (kind_ == K::Weak || r[p][qd])) found = true;
      }
      if (!found) return false;
    }
    for (std::size_t pn = 0; pn < n_; ++pn) {
      if (!step_[p][pn]) continue;
      bool found = false;
      for (std::size_t qd = 0; qd < n_ && !found; ++qd) {
        if (kind_ == K::Strong) {
          found = step_[q][qd] && r[pn][qd];
        } else if (kind_ == K::Weak) {
          found = star_[q][qd] && r[pn][qd];
        } else if (star_[q][qd] && r[p][qd]) {
          if (r[pn][qd]) found = true;
          for (std::size_t qn = 0; qn < n_; ++qn)
            if (step_[qd][qn] && r[pn][qn]) found = true;
        }
      }
      if (!found) return false;
    }
    if (kind_ == K::WdpBranching && diverges(p) && !diverges(q)) return false;
    if (kind_ == K::DpBranching) {
      // Bad: states unrelated to every successor of q. Look for a Bad cycle
      // reachable from p through Bad states.
      std::vector<bool> bad(n_, true);
      for (std::size_t s = 0; s < n_; ++s)
        for (std::size_t qn = 0; qn < n_; ++qn)
          if (step_[q][qn] && r[s][qn]) bad[s] = false;
      if (!bad[p]) return true;
      Matrix m(n_, std::vector<bool>(n_, false));
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) m[i][j] = bad[i] && bad[j] && step_[i][j];
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = 0; j < n_; ++j)
            if (m[i][k] && m[k][j]) m[i][j] = true;
      for (std::size_t s = 0; s < n_; ++s)
        if ((s == p || m[p][s]) && m[s][s]) return false;
    }
    return true;
  }

  K kind_;
  std::size_t n_, off_;
  Matrix step_, star_, plus_;
  std::vector<std::set<Barb>> barbs_;
};

const std::vector<K> kAllKinds = {K::Strong, K::Weak, K::Branching, K::DpBranching, K::WdpBranching};

}  // namespace

TEST_CASE("weak_reach agrees with a Warshall closure", "[bisim]") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng);
    auto reach = weak_reach(g);
    auto m = closure(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<std::size_t> expect;
      for (std::size_t j = 0; j < g.size(); ++j)
        if (m[i][j]) expect.push_back(j);
      REQUIRE(reach[i] == expect);
    }
  }
}

TEST_CASE("bisimulation solver agrees with a naive fixpoint on random graphs", "[bisim]") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    auto a = random_graph(rng);
    auto b = random_graph(rng);
    for (K k : kAllKinds) {
      INFO("trial " << trial << " kind " << to_string(k));
      bool expect = Oracle(a, b, k).related_roots();
      auto v = bisim_graphs(a, b, k);
      REQUIRE(v.status != S::Inconclusive);
      REQUIRE(v.bisimilar() == expect);
      if (!expect) REQUIRE(v.reason.rfind("clause ", 0) == 0);
    }
  }
}

TEST_CASE("verdicts are reflexive, symmetric and ordered", "[bisim][property]") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_graph(rng);
    auto b = random_graph(rng);
    std::map<K, bool> r;
    for (K k : kAllKinds) {
      REQUIRE(bisim_graphs(a, a, k).bisimilar());
      r[k] = bisim_graphs(a, b, k).bisimilar();
      REQUIRE(bisim_graphs(b, a, k).bisimilar() == r[k]);
    }
    if (r[K::Strong]) REQUIRE(r[K::DpBranching]);
    if (r[K::DpBranching]) REQUIRE(r[K::WdpBranching]);
    if (r[K::WdpBranching]) REQUIRE(r[K::Branching]);
    if (r[K::Branching]) REQUIRE(r[K::Weak]);
  }
}

TEST_CASE("inert steps are absorbed", "[bisim]") {
  // s0 -> s1 (barb b) and s0 -> s2 -> s3 (barb c), against the same with
  // an extra direct s0 -> s3.
  Barb b{Barb::Kind::Output, "b"}, c{Barb::Kind::Output, "c"};
  auto left = make_graph({{1, 2}, {}, {3}, {}}, {{}, {b}, {}, {c}});
  auto right = make_graph({{1, 2, 3}, {}, {3}, {}}, {{}, {b}, {}, {c}});
  CHECK(bisim_graphs(left, right, K::Weak).bisimilar());
  CHECK(bisim_graphs(left, right, K::Branching).bisimilar());
  // An inert step in front of a choice.
  auto l2 = make_graph({{1, 2}, {}, {}}, {{}, {b}, {c}});
  auto r2 = make_graph({{1}, {2, 3}, {}, {}}, {{}, {}, {b}, {c}});
  CHECK(bisim_graphs(l2, r2, K::Weak).bisimilar());
  CHECK(bisim_graphs(l2, r2, K::Branching).bisimilar());
  CHECK_FALSE(bisim_graphs(l2, r2, K::Strong).bisimilar());
}

TEST_CASE("weak but not branching", "[bisim]") {
  Barb a{Barb::Kind::Output, "a"}, b{Barb::Kind::Output, "b"};
  // The right root shows a together with b; the left reaches a only after
  // losing b.
  auto left = make_graph({{1}, {}}, {{b}, {a}});
  auto right = make_graph({{1}, {}}, {{a, b}, {a}});
  CHECK(bisim_graphs(left, right, K::Weak).bisimilar());
  auto v = bisim_graphs(left, right, K::Branching);
  CHECK_FALSE(v.bisimilar());
  CHECK(v.reason.rfind("clause 1 (barb a!)", 0) == 0);
  CHECK_FALSE(Oracle(left, right, K::Branching).related_roots());
}

TEST_CASE("divergence clauses", "[bisim]") {
  auto loop = make_graph({{0}}, {{}});
  auto stop = make_graph({{}}, {{}});
  CHECK(bisim_graphs(loop, stop, K::Weak).bisimilar());
  CHECK(bisim_graphs(loop, stop, K::Branching).bisimilar());
  auto wdp = bisim_graphs(loop, stop, K::WdpBranching);
  CHECK_FALSE(wdp.bisimilar());
  CHECK(wdp.reason.find("clause 3") != std::string::npos);
  CHECK_FALSE(bisim_graphs(loop, stop, K::DpBranching).bisimilar());
}

TEST_CASE("process level verdicts", "[bisim]") {
  auto v = bisim(P("x!z.0"), P("0"), K::Weak, 100);
  CHECK(v.status == S::NotBisimilar);
  CHECK(v.reason.rfind("clause 1 (barb x!)", 0) == 0);
  CHECK(format_verdict(v).rfind("not bisimilar (left 1 states, right 1 states)", 0) == 0);

  CHECK(bisim(P("x!z.0 | x(y).0"), P("x(y).0 | x!z.0"), K::Strong, 100).bisimilar());
  CHECK(bisim(P("new a.(a!b | a(c).x!z)"), P("x!z.0"), K::Weak, 100).bisimilar());
  CHECK_FALSE(bisim(P("new a.(a!b | a(c).x!z)"), P("x!z.0"), K::Strong, 100).bisimilar());
}

TEST_CASE("truncated graphs give inconclusive verdicts", "[bisim][property]") {
  auto big = P("!x!z.0 | !x(y).y!w");
  for (K k : kAllKinds) {
    auto v = bisim(big, P("0"), k, 5);
    CHECK(v.status == S::Inconclusive);
    CHECK_FALSE(v.left_complete);
    CHECK(v.reason == "left graph truncated at budget 5");
    CHECK(format_verdict(v).find("left 5+ states") != std::string::npos);
  }
}

TEST_CASE("kind names round trip", "[bisim]") {
  for (K k : kAllKinds) CHECK(parse_bisim_kind(to_string(k)) == k);
  CHECK(parse_bisim_kind("weak") == K::Weak);
  CHECK_THROWS_AS(parse_bisim_kind("coupled"), UsageError);
}

TEST_CASE("hierarchy on the lattice fixture", "[bisim]") {
  auto pairs = parse_pair_list(slurp("pi/lattice.txt"));
  REQUIRE(pairs.size() == 8);
  for (const auto& [p, q] : pairs) {
    INFO(print_pi(p) << " ;; " << print_pi(q));
    std::map<K, BisimVerdict> r;
    for (K k : kAllKinds) {
      r[k] = bisim(p, q, k, 500);
      REQUIRE(r[k].status != S::Inconclusive);
    }
    if (r[K::DpBranching].bisimilar()) CHECK(r[K::Branching].bisimilar());
    if (r[K::Branching].bisimilar()) CHECK(r[K::Weak].bisimilar());
    if (r[K::Strong].bisimilar()) CHECK(r[K::DpBranching].bisimilar());
  }
  // Divergence separates the replicated internal loop from 0.
  auto v = bisim(P("!new a.(a!b | a(c).0)"), P("0"), K::DpBranching, 500);
  CHECK_FALSE(v.bisimilar());
  CHECK(bisim(P("!new a.(a!b | a(c).0)"), P("0"), K::Branching, 500).bisimilar());
}
