#pragma once

// Reduction semantics of the pi fragment on canonical states.
//
// A state is (new r0..rk)(T1 | ... | Tn) with sequential threads Ti
// (output, input, replication, external barb, variable). Restrictions are
// lifted to the top except across prefixes and replication, dead ones are
// dropped, bound names inside threads are renamed by depth (_v0, _v1, ...)
// and restricted names get canonical indices (_r0, _r1, ...). Replication
// is never unfolded eagerly: a replicated thread takes part in a
// communication through a fresh copy of its body and stays in place.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vtrans/error.hpp"
#include "vtrans/pi.hpp"

namespace vtrans {

struct Barb {
  enum class Kind { Output, Input, External };
  Kind kind = Kind::Output;
  std::string id;

  std::string str() const {
    switch (kind) {
      case Kind::Output: return id + "!";
      case Kind::Input: return id + "?";
      case Kind::External: return "@" + id;
    }
    return id;
  }
  friend bool operator==(const Barb& a, const Barb& b) { return a.kind == b.kind && a.id == b.id; }
  friend bool operator<(const Barb& a, const Barb& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.id < b.id;
  }
};

/// "x" or "x!" is an output barb, "x?" an input barb, "@w" external.
inline Barb parse_barb(const std::string& s) {
  if (s.empty()) throw InputError("empty barb");
  if (s[0] == '@') {
    if (s.size() == 1) throw InputError("empty external barb");
    return {Barb::Kind::External, s.substr(1)};
  }
  std::string id = s;
  Barb::Kind k = Barb::Kind::Output;
  if (s.back() == '!' || s.back() == '?') {
    k = s.back() == '?' ? Barb::Kind::Input : Barb::Kind::Output;
    id = s.substr(0, s.size() - 1);
  }
  if (id.empty() || !(std::islower(static_cast<unsigned char>(id[0])) || id[0] == '_'))
    throw InputError("'" + s + "' is not a barb");
  return {k, id};
}

inline std::string format_barbs(const std::set<Barb>& bs) {
  std::string out = "{";
  bool first = true;
  for (const auto& b : bs) {
    out += (first ? "" : ", ") + b.str();
    first = false;
  }
  return out + "}";
}

struct BarbOptions {
  bool input_barbs = false;
  /// Declared external barbs; when set, any other @w in a process is an error.
  std::optional<std::set<std::string>> omega;
};

struct PiState {
  std::vector<std::string> restricted;
  std::vector<PiTerm> threads;  // sorted by printed form
  std::string key;              // printed form; identifies the state

  PiTerm to_term() const {
    PiTerm body = PiTerm::par_all(threads);
    for (auto it = restricted.rbegin(); it != restricted.rend(); ++it) body = PiTerm::res(*it, body);
    return body;
  }
  friend bool operator==(const PiState& a, const PiState& b) { return a.key == b.key; }
  friend bool operator<(const PiState& a, const PiState& b) { return a.key < b.key; }
};

namespace detail {

struct Soup {
  std::vector<std::string> restricted;
  std::vector<PiTerm> threads;
};

class NameGen {
 public:
  explicit NameGen(std::set<std::string> avoid) : avoid_(std::move(avoid)) {}
  std::string next() {
    std::string n;
    do n = "_t" + std::to_string(counter_++);
    while (avoid_.count(n));
    return n;
  }

 private:
  std::set<std::string> avoid_;
  std::size_t counter_ = 0;
};

inline void flatten(const PiTerm& p, Soup& soup, NameGen& gen) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Nil: return;
    case K::Par:
      flatten(p.left(), soup, gen);
      flatten(p.right(), soup, gen);
      return;
    case K::Res: {
      std::string n = gen.next();
      soup.restricted.push_back(n);
      flatten(subst_name(p.body(), p.bound(), n), soup, gen);
      return;
    }
    default: soup.threads.push_back(p);
  }
}

/// Simultaneous renaming of free names; binders shadow.
inline PiTerm rename_names(const PiTerm& p, const std::map<std::string, std::string>& m) {
  using K = PiTerm::Kind;
  auto sw = [&](const std::string& n) {
    auto it = m.find(n);
    return it == m.end() ? n : it->second;
  };
  switch (p.kind()) {
    case K::Out: return PiTerm::out(sw(p.subject()), sw(p.object()), rename_names(p.cont(), m));
    case K::Par: return PiTerm::par(rename_names(p.left(), m), rename_names(p.right(), m));
    case K::Repl: return PiTerm::repl(rename_names(p.body(), m));
    case K::In:
    case K::Res: {
      PiTerm body = p.body();
      if (m.count(p.bound())) {
        auto inner = m;
        inner.erase(p.bound());
        body = rename_names(body, inner);
      } else {
        body = rename_names(body, m);
      }
      return p.is(K::In) ? PiTerm::in(sw(p.subject()), p.bound(), body) : PiTerm::res(p.bound(), body);
    }
    default: return p;
  }
}

// Beyond this many candidate orderings of tied restricted names the first
// ordering is taken; states stay sound but may not be merged.
constexpr std::size_t kCanonicalPermutationCap = 5040;

inline PiState canonicalize(Soup soup) {
  for (auto& t : soup.threads) t = pi_canonical_bound(t, "_v");
  std::vector<std::set<std::string>> fns;
  for (const auto& t : soup.threads) fns.push_back(pi_free_names(t));
  std::vector<std::string> live;
  for (const auto& r : soup.restricted) {
    bool used = false;
    for (const auto& f : fns) used |= f.count(r) > 0;
    if (used && std::find(live.begin(), live.end(), r) == live.end()) live.push_back(r);
  }

  auto render = [&](const std::map<std::string, std::string>& m, std::vector<PiTerm>& threads) {
    std::vector<std::pair<std::string, PiTerm>> keyed;
    for (const auto& t : soup.threads) {
      PiTerm u = m.empty() ? t : rename_names(t, m);
      keyed.emplace_back(print_pi(u), u);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    threads.clear();
    std::string key;
    for (const auto& [s, u] : keyed) {
      key += s;
      key += '\n';
      threads.push_back(u);
    }
    return key;
  };

  PiState st;
  if (live.empty()) {
    render({}, st.threads);
    st.key = print_pi(st.to_term());
    return st;
  }

  // Colour each restricted name by the threads it occurs in.
  std::vector<std::pair<std::string, std::string>> coloured;
  for (const auto& n : live) {
    std::map<std::string, std::string> m;
    for (const auto& o : live) m[o] = "*";
    m[n] = "@";
    std::vector<std::string> occ;
    for (std::size_t i = 0; i < soup.threads.size(); ++i)
      if (fns[i].count(n)) occ.push_back(print_pi(rename_names(soup.threads[i], m)));
    std::sort(occ.begin(), occ.end());
    std::string c;
    for (const auto& s : occ) c += s + "\n";
    coloured.emplace_back(c, n);
  }
  std::stable_sort(coloured.begin(), coloured.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < coloured.size(); ++i) {
    if (i == 0 || coloured[i].first != coloured[i - 1].first) groups.emplace_back();
    groups.back().push_back(coloured[i].second);
  }
  std::size_t combos = 1;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    for (std::size_t k = 2; k <= g.size() && combos <= kCanonicalPermutationCap; ++k) combos *= k;
  }
  const bool exhaustive = combos <= kCanonicalPermutationCap;

  std::string best_key;
  std::vector<PiTerm> best_threads;
  bool have = false;
  auto consider = [&]() {
    std::map<std::string, std::string> m;
    std::size_t idx = 0;
    for (const auto& g : groups)
      for (const auto& n : g) m[n] = "_r" + std::to_string(idx++);
    std::vector<PiTerm> threads;
    std::string key = render(m, threads);
    if (!have || key < best_key) {
      best_key = std::move(key);
      best_threads = std::move(threads);
      have = true;
    }
  };
  auto rec = [&](auto&& self, std::size_t gi) -> void {
    if (gi == groups.size()) {
      consider();
      return;
    }
    if (!exhaustive) {
      self(self, gi + 1);
      return;
    }
    do self(self, gi + 1);
    while (std::next_permutation(groups[gi].begin(), groups[gi].end()));
  };
  rec(rec, 0);

  for (std::size_t i = 0; i < live.size(); ++i) st.restricted.push_back("_r" + std::to_string(i));
  st.threads = std::move(best_threads);
  st.key = print_pi(st.to_term());
  return st;
}

inline std::set<std::string> state_names(const PiState& s) {
  std::set<std::string> out(s.restricted.begin(), s.restricted.end());
  for (const auto& t : s.threads) {
    auto n = pi_names(t);
    out.insert(n.begin(), n.end());
  }
  return out;
}

}  // namespace detail

/// Canonical state of P. Process variables are kept as inert threads when
/// `allow_open` is set, otherwise they are a usage error.
inline PiState normal_form(const PiTerm& p, bool allow_open = false) {
  if (!allow_open) {
    auto vs = pi_vars(p);
    if (!vs.empty()) throw UsageError("process has free process variable " + *vs.begin());
  }
  detail::NameGen gen(pi_names(p));
  detail::Soup soup;
  detail::flatten(p, soup, gen);
  return detail::canonicalize(std::move(soup));
}

inline std::string print_state(const PiState& s) { return s.key; }

/// All states reachable in one communication step, sorted and distinct.
inline std::vector<PiState> reduce_once(const PiState& s) {
  using K = PiTerm::Kind;
  detail::NameGen gen(detail::state_names(s));

  // Fresh copies of replicated bodies: two per replicated thread, so that
  // two copies of the same body can communicate with each other.
  struct Copy {
    std::size_t repl;
    int which;
    detail::Soup soup;
  };
  std::vector<Copy> copies;
  for (std::size_t i = 0; i < s.threads.size(); ++i) {
    if (!s.threads[i].is(K::Repl)) continue;
    for (int which = 1; which <= 2; ++which) {
      Copy c{i, which, {}};
      detail::flatten(s.threads[i].body(), c.soup, gen);
      copies.push_back(std::move(c));
    }
  }

  struct End {
    int copy;  // -1 for a top-level thread
    std::size_t idx;
  };
  auto at = [&](const End& e) -> const PiTerm& {
    return e.copy < 0 ? s.threads[e.idx] : copies[static_cast<std::size_t>(e.copy)].soup.threads[e.idx];
  };
  std::vector<End> outs, ins;
  auto add_end = [&](const PiTerm& t, End e) {
    if (t.is(K::Out)) outs.push_back(e);
    if (t.is(K::In)) ins.push_back(e);
  };
  for (std::size_t i = 0; i < s.threads.size(); ++i) add_end(s.threads[i], {-1, i});
  for (std::size_t c = 0; c < copies.size(); ++c)
    for (std::size_t k = 0; k < copies[c].soup.threads.size(); ++k)
      add_end(copies[c].soup.threads[k], {static_cast<int>(c), k});

  auto allowed = [&](const End& a, const End& b) {
    auto second = [&](const End& e) { return e.copy >= 0 && copies[static_cast<std::size_t>(e.copy)].which == 2; };
    if (!second(a) && !second(b)) return true;
    if (second(a) && second(b)) return false;
    const End& two = second(a) ? a : b;
    const End& other = second(a) ? b : a;
    return other.copy >= 0 && copies[static_cast<std::size_t>(other.copy)].repl ==
                                  copies[static_cast<std::size_t>(two.copy)].repl;
  };

  std::map<std::string, PiState> results;
  for (const auto& o : outs) {
    for (const auto& i : ins) {
      const PiTerm& out = at(o);
      const PiTerm& inp = at(i);
      if (out.subject() != inp.subject() || !allowed(o, i)) continue;
      detail::Soup soup;
      soup.restricted = s.restricted;
      std::vector<PiTerm> pending;
      for (std::size_t k = 0; k < s.threads.size(); ++k)
        if (!((o.copy < 0 && o.idx == k) || (i.copy < 0 && i.idx == k))) pending.push_back(s.threads[k]);
      std::set<int> used;
      if (o.copy >= 0) used.insert(o.copy);
      if (i.copy >= 0) used.insert(i.copy);
      for (int c : used) {
        const auto& cs = copies[static_cast<std::size_t>(c)].soup;
        soup.restricted.insert(soup.restricted.end(), cs.restricted.begin(), cs.restricted.end());
        for (std::size_t k = 0; k < cs.threads.size(); ++k)
          if (!((o.copy == c && o.idx == k) || (i.copy == c && i.idx == k))) pending.push_back(cs.threads[k]);
      }
      pending.push_back(out.cont());
      pending.push_back(subst_name(inp.cont(), inp.bound(), out.object()));
      for (const auto& p : pending) detail::flatten(p, soup, gen);
      PiState next = detail::canonicalize(std::move(soup));
      results.emplace(next.key, std::move(next));
    }
  }
  std::vector<PiState> out;
  for (auto& [k, st] : results) out.push_back(std::move(st));
  return out;
}

namespace detail {

inline void term_barbs(const PiTerm& p, const BarbOptions& opts, std::set<std::string>& hidden,
                       std::set<Barb>& out) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Out:
      if (!hidden.count(p.subject())) out.insert({Barb::Kind::Output, p.subject()});
      return;
    case K::In:
      if (opts.input_barbs && !hidden.count(p.subject())) out.insert({Barb::Kind::Input, p.subject()});
      return;
    case K::ExtBarb: out.insert({Barb::Kind::External, p.id()}); return;
    case K::Par:
      term_barbs(p.left(), opts, hidden, out);
      term_barbs(p.right(), opts, hidden, out);
      return;
    case K::Repl: term_barbs(p.body(), opts, hidden, out); return;
    case K::Res: {
      bool fresh = hidden.insert(p.bound()).second;
      term_barbs(p.body(), opts, hidden, out);
      if (fresh) hidden.erase(p.bound());
      return;
    }
    default: return;
  }
}

}  // namespace detail

inline std::set<Barb> strong_barbs(const PiState& s, const BarbOptions& opts = {}) {
  std::set<std::string> hidden(s.restricted.begin(), s.restricted.end());
  std::set<Barb> out;
  for (const auto& t : s.threads) detail::term_barbs(t, opts, hidden, out);
  return out;
}

inline std::set<Barb> strong_barbs(const PiTerm& p, const BarbOptions& opts = {}) {
  std::set<std::string> hidden;
  std::set<Barb> out;
  detail::term_barbs(p, opts, hidden, out);
  return out;
}

// ---------------------------------------------------------------------------
// Exploration.

struct ReductionGraph {
  std::vector<PiState> states;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::set<Barb>> barbs;
  std::vector<std::size_t> dropped;  // successors not stored for lack of budget
  bool complete = false;
  std::size_t budget = 0;
  /// States with an infinite reduction sequence; filled only when complete.
  std::vector<bool> divergent;

  std::size_t size() const { return states.size(); }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& s : succ) n += s.size();
    return n;
  }
};

namespace detail {

// Greatest set of states each having a successor in the set.
inline std::vector<bool> divergent_states(const std::vector<std::vector<std::size_t>>& succ,
                                          const std::vector<bool>& within) {
  const std::size_t n = succ.size();
  std::vector<std::vector<std::size_t>> pred(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<bool> in(within);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    for (std::size_t j : succ[i]) {
      if (!in[j]) continue;
      pred[j].push_back(i);
      ++count[i];
    }
  }
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i] && count[i] == 0) work.push_back(i);
  while (!work.empty()) {
    std::size_t j = work.back();
    work.pop_back();
    if (!in[j]) continue;
    in[j] = false;
    for (std::size_t i : pred[j])
      if (in[i] && --count[i] == 0) work.push_back(i);
  }
  return in;
}

}  // namespace detail

/// Breadth-first exploration from P, storing at most `budget` states.
inline ReductionGraph explore(const PiTerm& p, std::size_t budget, const BarbOptions& opts = {}) {
  if (budget < 1) throw UsageError("exploration budget must be at least 1");
  if (opts.omega) {
    for (const auto& w : pi_ext_barbs(p))
      if (!opts.omega->count(w)) throw UsageError("external barb @" + w + " is not declared");
  }
  ReductionGraph g;
  g.budget = budget;
  std::map<std::string, std::size_t> index;
  PiState init = normal_form(p);
  index.emplace(init.key, 0);
  g.states.push_back(std::move(init));
  bool truncated = false;
  for (std::size_t cur = 0; cur < g.states.size(); ++cur) {
    std::vector<std::size_t> out;
    std::size_t lost = 0;
    for (auto& next : reduce_once(g.states[cur])) {
      auto it = index.find(next.key);
      if (it == index.end()) {
        if (g.states.size() >= budget) {
          truncated = true;
          ++lost;
          continue;
        }
        it = index.emplace(next.key, g.states.size()).first;
        g.states.push_back(std::move(next));
      }
      out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    g.succ.push_back(std::move(out));
    g.dropped.push_back(lost);
  }
  g.complete = !truncated;
  for (const auto& s : g.states) g.barbs.push_back(strong_barbs(s, opts));
  if (g.complete) g.divergent = detail::divergent_states(g.succ, std::vector<bool>(g.size(), true));
  return g;
}

inline std::string format_graph(const ReductionGraph& g) {
  std::ostringstream os;
  os << "states: " << g.size() << ", edges: " << g.edge_count() << ", "
     << (g.complete ? "complete" : "truncated at budget " + std::to_string(g.budget)) << "\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << "s" << i << ": " << g.states[i].key << "  barbs " << format_barbs(g.barbs[i]);
    if (g.complete && g.divergent[i]) os << "  divergent";
    os << "  ->";
    if (g.succ[i].empty() && !g.dropped[i]) os << " none";
    for (std::size_t j : g.succ[i]) os << " s" << j;
    if (g.dropped[i]) os << " +" << g.dropped[i] << " beyond budget";
    os << "\n";
  }
  return os.str();
}

enum class Decision { Yes, No, Inconclusive };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::Yes: return "yes";
    case Decision::No: return "no";
    case Decision::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct WeakBarbVerdict {
  Decision decision = Decision::Inconclusive;
  std::size_t states = 0;
  bool complete = false;
  std::optional<std::size_t> witness;  // state index with the barb
  std::string witness_state;
};

inline WeakBarbVerdict weak_barb(const PiTerm& p, const Barb& b, std::size_t budget, BarbOptions opts = {}) {
  if (b.kind == Barb::Kind::Input) opts.input_barbs = true;
  auto g = explore(p, budget, opts);
  WeakBarbVerdict v;
  v.states = g.size();
  v.complete = g.complete;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.barbs[i].count(b)) {
      v.decision = Decision::Yes;
      v.witness = i;
      v.witness_state = g.states[i].key;
      return v;
    }
  }
  v.decision = g.complete ? Decision::No : Decision::Inconclusive;
  return v;
}

}  // namespace vtrans
