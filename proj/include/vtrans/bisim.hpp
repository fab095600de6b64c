#pragma once

// Barbed bisimilarities on explored reduction graphs, computed as greatest
// fixpoints over pairs (left state, right state). Each pair is checked in
// both directions, which gives the largest symmetric relation restricted to
// the two graphs.

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "vtrans/error.hpp"
#include "vtrans/pi.hpp"
#include "vtrans/pi_semantics.hpp"

namespace vtrans {

enum class BisimKind { Strong, Weak, Branching, DpBranching, WdpBranching };

inline const char* to_string(BisimKind k) {
  switch (k) {
    case BisimKind::Strong: return "strong-barbed";
    case BisimKind::Weak: return "weak-barbed";
    case BisimKind::Branching: return "branching-barbed";
    case BisimKind::DpBranching: return "dp-branching-barbed";
    case BisimKind::WdpBranching: return "wdp-branching-barbed";
  }
  return "?";
}

/// Accepts the names printed by to_string, with or without "-barbed".
inline BisimKind parse_bisim_kind(std::string s) {
  const std::string suffix = "-barbed";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    s.resize(s.size() - suffix.size());
  if (s == "strong") return BisimKind::Strong;
  if (s == "weak") return BisimKind::Weak;
  if (s == "branching") return BisimKind::Branching;
  if (s == "dp-branching") return BisimKind::DpBranching;
  if (s == "wdp-branching") return BisimKind::WdpBranching;
  throw UsageError("unknown bisimilarity '" + s +
                   "' (expected strong, weak, branching, dp-branching or wdp-branching)");
}

struct BisimVerdict {
  enum class Status { Bisimilar, NotBisimilar, Inconclusive };
  Status status = Status::Inconclusive;
  std::string reason;
  std::size_t left_states = 0, right_states = 0;
  bool left_complete = false, right_complete = false;

  bool bisimilar() const { return status == Status::Bisimilar; }
};

inline const char* to_string(BisimVerdict::Status s) {
  switch (s) {
    case BisimVerdict::Status::Bisimilar: return "bisimilar";
    case BisimVerdict::Status::NotBisimilar: return "not bisimilar";
    case BisimVerdict::Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Reflexive-transitive closure of the reduction relation, as sorted
/// successor lists.
inline std::vector<std::vector<std::size_t>> weak_reach(const ReductionGraph& g) {
  std::vector<std::vector<std::size_t>> out(g.size());
  for (std::size_t s = 0; s < g.size(); ++s) {
    std::vector<bool> seen(g.size(), false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : g.succ[u])
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    for (std::size_t v = 0; v < g.size(); ++v)
      if (seen[v]) out[s].push_back(v);
  }
  return out;
}

namespace detail {

struct GraphView {
  const ReductionGraph* g;
  std::vector<std::vector<std::size_t>> reach;
  std::vector<std::set<Barb>> weak_barbs;

  explicit GraphView(const ReductionGraph& graph) : g(&graph), reach(weak_reach(graph)) {
    for (std::size_t s = 0; s < graph.size(); ++s) {
      std::set<Barb> wb;
      for (std::size_t t : reach[s]) wb.insert(graph.barbs[t].begin(), graph.barbs[t].end());
      weak_barbs.push_back(std::move(wb));
    }
  }
};

class BisimSolver {
 public:
  BisimSolver(const ReductionGraph& left, const ReductionGraph& right, BisimKind kind)
      : l_(left), r_(right), kind_(kind), rel_(left.size() * right.size(), true) {}

  // Returns the reason the root pair was removed, or empty if it survives.
  std::string solve() {
    std::string root_reason;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t p = 0; p < l_.g->size(); ++p) {
        for (std::size_t q = 0; q < r_.g->size(); ++q) {
          if (!related(p, q)) continue;
          std::string why = check(l_, r_, p, q, false);
          if (why.empty()) why = check(r_, l_, q, p, true);
          if (why.empty()) continue;
          rel_[p * r_.g->size() + q] = false;
          changed = true;
          if (p == 0 && q == 0) root_reason = why;
        }
      }
    }
    return related(0, 0) ? std::string() : root_reason;
  }

 private:
  bool related(std::size_t p, std::size_t q) const { return rel_[p * r_.g->size() + q]; }

  // Relation oriented from graph `a` to graph `b`.
  bool rel(bool flipped, std::size_t a, std::size_t b) const { return flipped ? related(b, a) : related(a, b); }

  static std::string side(bool flipped, bool first) { return (first != flipped) ? "left" : "right"; }

  std::string describe(const GraphView& a, const GraphView& b, bool flipped, std::size_t p, std::size_t q) const {
    return side(flipped, true) + " " + a.g->states[p].key + " vs " + side(flipped, false) + " " +
           b.g->states[q].key;
  }

  std::string check(const GraphView& a, const GraphView& b, std::size_t p, std::size_t q, bool flipped) const {
    const auto& ga = *a.g;
    const auto& gb = *b.g;
    const bool strong = kind_ == BisimKind::Strong;
    const bool weak = kind_ == BisimKind::Weak;

    // Clause 1: barbs.
    for (const auto& w : ga.barbs[p]) {
      bool ok = false;
      if (strong) {
        ok = gb.barbs[q].count(w) > 0;
      } else if (weak) {
        ok = b.weak_barbs[q].count(w) > 0;
      } else {
        for (std::size_t qd : b.reach[q])
          if (gb.barbs[qd].count(w) && rel(flipped, p, qd)) {
            ok = true;
            break;
          }
      }
      if (!ok)
        return "clause 1 (barb " + w.str() + "): " + describe(a, b, flipped, p, q) + "; the " +
               side(flipped, false) + " side has no matching " + (strong ? "strong" : "weak") + " barb";
    }

    // Clause 2: reductions.
    for (std::size_t pn : ga.succ[p]) {
      bool ok = false;
      if (strong) {
        for (std::size_t qn : gb.succ[q]) ok = ok || rel(flipped, pn, qn);
      } else if (weak) {
        for (std::size_t qn : b.reach[q]) ok = ok || rel(flipped, pn, qn);
      } else {
        for (std::size_t qd : b.reach[q]) {
          if (!rel(flipped, p, qd)) continue;
          if (rel(flipped, pn, qd)) ok = true;
          for (std::size_t qn : gb.succ[qd]) ok = ok || rel(flipped, pn, qn);
          if (ok) break;
        }
      }
      if (!ok)
        return "clause 2 (reduction to " + ga.states[pn].key + "): " + describe(a, b, flipped, p, q) +
               "; the " + side(flipped, false) + " side cannot match it";
    }

    // Clause 3: divergence.
    if (kind_ == BisimKind::WdpBranching && ga.divergent[p] && !gb.divergent[q])
      return "clause 3 (divergence): " + describe(a, b, flipped, p, q) + "; only the " + side(flipped, true) +
             " side diverges";
    if (kind_ == BisimKind::DpBranching) {
      // A violating infinite path from p stays among states unrelated to
      // every successor of q.
      std::vector<bool> bad(ga.size(), true);
      for (std::size_t s = 0; s < ga.size(); ++s)
        for (std::size_t qn : gb.succ[q])
          if (rel(flipped, s, qn)) {
            bad[s] = false;
            break;
          }
      if (bad[p] && detail::divergent_states(ga.succ, bad)[p])
        return "clause 3 (divergence): " + describe(a, b, flipped, p, q) + "; an infinite run of the " +
               side(flipped, true) + " side is not matched by a step of the " + side(flipped, false) + " side";
    }
    return {};
  }

  GraphView l_, r_;
  BisimKind kind_;
  std::vector<bool> rel_;
};

}  // namespace detail

/// Compares the initial states (index 0) of two explored graphs.
inline BisimVerdict bisim_graphs(const ReductionGraph& left, const ReductionGraph& right, BisimKind kind) {
  BisimVerdict v;
  v.left_states = left.size();
  v.right_states = right.size();
  v.left_complete = left.complete;
  v.right_complete = right.complete;
  if (!left.complete || !right.complete) {
    v.status = BisimVerdict::Status::Inconclusive;
    v.reason = std::string(!left.complete ? "left" : "right") + " graph truncated at budget " +
               std::to_string(!left.complete ? left.budget : right.budget);
    return v;
  }
  detail::BisimSolver solver(left, right, kind);
  v.reason = solver.solve();
  v.status = v.reason.empty() ? BisimVerdict::Status::Bisimilar : BisimVerdict::Status::NotBisimilar;
  return v;
}

inline BisimVerdict bisim(const PiTerm& p, const PiTerm& q, BisimKind kind, std::size_t budget,
                          const BarbOptions& opts = {}) {
  return bisim_graphs(explore(p, budget, opts), explore(q, budget, opts), kind);
}

inline std::string format_verdict(const BisimVerdict& v) {
  std::string out = to_string(v.status);
  out += " (left " + std::to_string(v.left_states) + (v.left_complete ? "" : "+") + " states, right " +
         std::to_string(v.right_states) + (v.right_complete ? "" : "+") + " states)";
  if (!v.reason.empty()) out += "\n  reason: " + v.reason;
  return out;
}

}  // namespace vtrans
