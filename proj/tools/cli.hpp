#pragma once

// Command-line front end. Exit codes: 0 the check holds, 1 it fails, 2 the
// answer is inconclusive within the budget, 3 bad input or usage.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vtrans/vtrans.hpp"

namespace vtrans::cli {

enum Exit { kHolds = 0, kFails = 1, kInconclusive = 2, kError = 3 };

namespace detail {

/// Paths that do not exist as given are looked up under $VTRANS_FIXTURES.
inline std::string resolve(const std::string& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(path, ec)) return path;
  if (fs::path(path).is_relative())
    if (const char* dir = std::getenv("VTRANS_FIXTURES")) {
      fs::path p = fs::path(dir) / path;
      if (fs::exists(p, ec)) return p.string();
    }
  return path;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(resolve(path));
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline json load_json(const std::string& path) { return read_json_file(resolve(path)); }

/// Process text, or "@file" for a file whose non-comment lines are joined.
inline std::string term_text(const std::string& arg) {
  if (arg.empty() || arg[0] != '@' || arg.size() == 1) return arg;
  std::istringstream in(read_text(arg.substr(1)));
  std::string line, out;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!out.empty()) out += ' ';
    out += line.substr(first);
  }
  return out;
}

inline PiTerm term_arg(const std::string& arg) { return parse_pi(term_text(arg)); }

// An "@w" process is an external barb; "@file" is a file. Files win when
// they exist.
inline PiTerm process_arg(const std::string& arg) {
  if (arg.size() > 1 && arg[0] == '@') {
    std::error_code ec;
    if (!std::filesystem::exists(resolve(arg.substr(1)), ec)) return parse_pi(arg);
  }
  return term_arg(arg);
}

inline std::vector<PiTerm> term_list(const std::string& path) {
  std::vector<PiTerm> out;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(parse_pi(line));
    } catch (const InputError& e) {
      throw InputError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::shared_ptr<const Signature> signature_of(const json& j, std::optional<FiniteLanguage>& keep) {
  if (j.contains("values")) {
    keep.emplace(language_from_json(j));
    return keep->signature_ptr();
  }
  return signature_from_json(j);
}

inline std::string show_pi_ast(const PiTerm& p) {
  using K = PiTerm::Kind;
  switch (p.kind()) {
    case K::Nil: return "Nil";
    case K::Out: return "Out(" + p.subject() + "," + p.object() + "," + show_pi_ast(p.cont()) + ")";
    case K::In: return "In(" + p.subject() + "," + p.bound() + "," + show_pi_ast(p.cont()) + ")";
    case K::Par: return "Par(" + show_pi_ast(p.left()) + ", " + show_pi_ast(p.right()) + ")";
    case K::Res: return "Res(" + p.bound() + ", " + show_pi_ast(p.body()) + ")";
    case K::Repl: return "Repl(" + show_pi_ast(p.body()) + ")";
    case K::Var: return "Var(" + p.id() + ")";
    case K::ExtBarb: return "ExtBarb(" + p.id() + ")";
  }
  return "?";
}

inline std::string join_values(const FiniteLanguage& l, const std::vector<std::size_t>& xs) {
  std::string out = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + l.values()[xs[i]];
  return out + "}";
}

inline std::string apply_text(const FiniteLanguage& l, const std::string& op, const std::vector<std::size_t>& args) {
  std::string out = op;
  if (!args.empty()) {
    out += "(";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + l.values()[args[i]];
    out += ")";
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

struct Options {
  // finite inputs
  std::string lang, source, middle, target, translation, second, relation, semantic, semantic2;
  std::vector<std::string> files;
  bool one_hole = false;
  std::size_t depth = 3;
  std::size_t cap = 1000000;
  // property suite
  std::size_t trials = 200;
  std::uint64_t seed = 42;
  // pi
  std::string term;
  std::vector<std::string> terms;
  std::string barb, kind = "weak", pairs, file, context, omega, check;
  std::size_t budget = 500;
  bool input_barbs = false, translate = false;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"vtrans: valid translations and a pi-calculus workbench", "vtrans"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    build(app);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out_ << help_for(app);
      return kHolds;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kHolds;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n" << help_for(app);
      return kError;
    }
    try {
      return dispatch();
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return kError;
    } catch (const json::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kError;
    }
  }

 private:
  using Handler = int (Runner::*)();

  static std::string help_for(const CLI::App& app) {
    const CLI::App* cur = &app;
    for (;;) {
      auto subs = cur->get_subcommands();
      if (subs.empty()) break;
      cur = subs.front();
    }
    return cur->help();
  }

  void on(CLI::App* sub, Handler h) { handlers_.emplace_back(sub, h); }

  void finite_opts(CLI::App* s, bool with_translation) {
    s->add_option("--source", o_.source, "Source language (JSON)")->required();
    s->add_option("--target", o_.target, "Target language (JSON)")->required();
    if (with_translation) s->add_option("--translation", o_.translation, "Head-map translation (JSON)")->required();
    s->add_option("--relation", o_.relation, "Relation on source and target values (JSON)")->required();
  }

  void pi_explore_opts(CLI::App* s) {
    s->add_option("--budget", o_.budget, "Maximum number of states explored")->check(CLI::PositiveNumber);
    s->add_flag("--input-barbs", o_.input_barbs, "Also observe input barbs x?");
    s->add_option("--omega", o_.omega, "Declared external barbs, comma separated");
  }

  void build(CLI::App& app) {
    auto* lang = app.add_subcommand("lang", "Finite language files");
    lang->require_subcommand(1);
    auto* validate = lang->add_subcommand("validate", "Load and validate signature, language, relation files");
    validate->add_option("files", o_.files, "JSON files")->required();
    on(validate, &Runner::lang_validate);

    auto* check = app.add_subcommand("check", "Decision procedures on finite languages");
    check->require_subcommand(1);
    auto* cong = check->add_subcommand("congruence", "Is the relation a congruence (on L, or for T(L) on U)?");
    cong->add_option("--lang", o_.lang, "Language (JSON)");
    cong->add_option("--relation", o_.relation, "Relation (JSON)")->required();
    cong->add_flag("--one-hole", o_.one_hole, "Check the 1-hole variant");
    cong->add_option("--translation", o_.translation, "Check for the image T(L) on U instead");
    cong->add_option("--source", o_.source, "Source language, with --translation");
    cong->add_option("--target", o_.target, "Target language, with --translation");
    on(cong, &Runner::check_congruence);

    auto* correct = check->add_subcommand("correct", "Correct up to the relation, or w.r.t. --semantic R");
    finite_opts(correct, true);
    correct->add_option("--semantic", o_.semantic, "Semantic translation R (JSON)");
    on(correct, &Runner::check_correct);

    auto* valid = check->add_subcommand("valid", "Valid up to the relation (exhaustive search)");
    finite_opts(valid, true);
    valid->add_option("--cap", o_.cap, "Maximum number of counterpart functions")->check(CLI::PositiveNumber);
    on(valid, &Runner::check_valid);

    auto* pres = check->add_subcommand("preserves", "Preserves the relation (exact)");
    finite_opts(pres, true);
    on(pres, &Runner::check_preserves_cmd);

    auto* resp = check->add_subcommand("respects", "Respects the relation on closed terms to a depth");
    finite_opts(resp, true);
    resp->add_option("--depth", o_.depth, "Term depth")->check(CLI::PositiveNumber);
    on(resp, &Runner::check_respects_cmd);

    for (const char* name : {"compositional", "fvr"}) {
      auto* s = check->add_subcommand(name, std::string(name) == "fvr"
                                                ? "Free-variable respecting to a depth"
                                                : "Compositionality clauses to a depth");
      s->add_option("--source", o_.source, "Source signature or language (JSON)")->required();
      s->add_option("--target", o_.target, "Target signature or language (JSON)")->required();
      s->add_option("--translation", o_.translation, "Head map or translation table (JSON)")->required();
      s->add_option("--depth", o_.depth, "Term depth")->check(CLI::PositiveNumber);
      on(s, std::string(name) == "fvr" ? &Runner::check_fvr_cmd : &Runner::check_compositional_cmd);
    }

    auto* closure = app.add_subcommand("closure", "Largest 1-hole congruence inside the relation");
    closure->add_option("--lang", o_.lang, "Language (JSON)")->required();
    closure->add_option("--relation", o_.relation, "Equivalence (JSON)")->required();
    on(closure, &Runner::closure_cmd);

    auto* lr = app.add_subcommand("lr-closure", "Congruence closure of a translation via =R");
    lr->add_option("--source", o_.source, "Source language (JSON)")->required();
    lr->add_option("--target", o_.target, "Target language (JSON)")->required();
    lr->add_option("--relation", o_.relation, "Relation (JSON)")->required();
    lr->add_option("--semantic", o_.semantic, "Semantic translation R (JSON)")->required();
    on(lr, &Runner::lr_closure_cmd);

    auto* compose = app.add_subcommand("compose", "Compose two translations (and semantic translations)");
    compose->add_option("--source", o_.source, "Source language (JSON)")->required();
    compose->add_option("--middle", o_.middle, "Intermediate language (JSON)")->required();
    compose->add_option("--target", o_.target, "Target language (JSON)")->required();
    compose->add_option("--first", o_.translation, "Translation source -> middle")->required();
    compose->add_option("--second", o_.second, "Translation middle -> target")->required();
    compose->add_option("--semantic1", o_.semantic, "Semantic translation R1 (middle, source)");
    compose->add_option("--semantic2", o_.semantic2, "Semantic translation R2 (target, middle)");
    on(compose, &Runner::compose_cmd);

    auto* suite = app.add_subcommand("property-suite", "Randomized theorem checks on small languages");
    suite->add_option("--trials", o_.trials, "Number of trials")->check(CLI::PositiveNumber);
    suite->add_option("--seed", o_.seed, "Random seed");
    on(suite, &Runner::property_suite_cmd);

    auto* pi = app.add_subcommand("pi", "Pi-calculus workbench");
    pi->require_subcommand(1);
    auto term = [&](CLI::App* s, const char* what) {
      s->add_option("term", o_.term, what)->required();
    };
    auto* parse = pi->add_subcommand("parse", "Show the syntax tree");
    term(parse, "Process text or @file");
    on(parse, &Runner::pi_parse);
    auto* print = pi->add_subcommand("print", "Print in normalized concrete syntax");
    term(print, "Process text or @file");
    on(print, &Runner::pi_print);
    auto* reduce = pi->add_subcommand("reduce", "Canonical state and its one-step successors");
    term(reduce, "Process text or @file");
    on(reduce, &Runner::pi_reduce);

    auto probe = [&](CLI::App* s) {
      s->add_option("--context", o_.context, "Plug the process into this context first");
      s->add_flag("--translate", o_.translate, "Apply Boudol's translation to the process first");
    };
    auto* explore_c = pi->add_subcommand("explore", "Explore the reduction graph");
    term(explore_c, "Process text or @file");
    pi_explore_opts(explore_c);
    probe(explore_c);
    on(explore_c, &Runner::pi_explore);

    auto* barbs = pi->add_subcommand("barbs", "Strong barbs");
    term(barbs, "Process text or @file");
    barbs->add_flag("--input-barbs", o_.input_barbs, "Also observe input barbs x?");
    barbs->add_option("--omega", o_.omega, "Declared external barbs, comma separated");
    on(barbs, &Runner::pi_barbs);

    auto* wb = pi->add_subcommand("weak-barb", "Weak barb: yes, no or inconclusive");
    wb->add_option("term", o_.term, "Process text or @file")->required();
    wb->add_option("barb", o_.barb, "Barb: x or x! (output), x? (input), @w (external)")->required();
    pi_explore_opts(wb);
    probe(wb);
    on(wb, &Runner::pi_weak_barb);

    auto* bis = pi->add_subcommand("bisim", "Barbed bisimilarity of two processes or of a pair list");
    bis->add_option("terms", o_.terms, "Two processes")->expected(0, 2);
    bis->add_option("--pairs", o_.pairs, "Pair-list file");
    bis->add_option("--kind", o_.kind, "strong, weak, branching, dp-branching, wdp-branching or all");
    pi_explore_opts(bis);
    probe(bis);
    on(bis, &Runner::pi_bisim);

    auto* tr = pi->add_subcommand("translate", "Boudol's translation");
    tr->add_option("terms", o_.terms, "Processes, text or @file")->expected(0, -1);
    tr->add_option("--pairs", o_.pairs, "File of 'source ;; expected' lines, compared up to alpha");
    tr->add_option("--check", o_.check, "Also check: compositional, fvr or both");
    tr->add_option("--depth", o_.depth, "Depth for --check")->check(CLI::PositiveNumber);
    on(tr, &Runner::pi_translate);

    auto* pl = pi->add_subcommand("plug", "Plug a closed process into a one-variable context");
    pl->add_option("terms", o_.terms, "Context and process")->required()->expected(2);
    pl->add_flag("--translate", o_.translate, "Translate the process before plugging");
    on(pl, &Runner::pi_plug);

    auto* ce = pi->add_subcommand("check-encoding", "Spot-check P against T(P)");
    ce->add_option("terms", o_.terms, "Processes")->expected(0, -1);
    ce->add_option("--file", o_.file, "File with one process per line");
    ce->add_option("--kind", o_.kind, "Bisimilarity kind");
    ce->add_option("--context", o_.context, "Compare C[P] with C[T(P)] instead");
    pi_explore_opts(ce);
    on(ce, &Runner::pi_check_encoding);

    auto* fa = pi->add_subcommand("full-abstraction", "Full abstraction of Boudol's translation on pairs");
    fa->add_option("--pairs", o_.pairs, "Pair-list file")->required();
    fa->add_option("--kind", o_.kind, "Bisimilarity kind used on both sides");
    pi_explore_opts(fa);
    on(fa, &Runner::pi_full_abstraction);
  }

  int dispatch() {
    for (auto it = handlers_.rbegin(); it != handlers_.rend(); ++it)
      if (it->first->parsed()) return (this->*(it->second))();
    throw UsageError("no command given");
  }

  // -- finite ---------------------------------------------------------------

  struct Finite {
    std::optional<FiniteLanguage> src, tgt;
    std::optional<Relation> sim;
    std::optional<HeadMap> t;
  };

  Finite load_finite(bool with_translation) const {
    Finite f;
    f.src.emplace(language_from_json(detail::load_json(o_.source)));
    f.tgt.emplace(language_from_json(detail::load_json(o_.target)));
    f.sim.emplace(relation_from_json(detail::load_json(o_.relation)));
    if (with_translation)
      f.t.emplace(translation_from_json(detail::load_json(o_.translation), f.src->signature_ptr(),
                                        f.tgt->signature_ptr()));
    return f;
  }

  int lang_validate() {
    for (const auto& path : o_.files) {
      json j = detail::load_json(path);
      if (j.contains("values")) {
        auto l = language_from_json(j);
        out_ << "language " << l.name() << ": " << l.size() << " values, " << l.signature().constructs().size()
             << " operators, tables total\n";
      } else if (j.contains("constructs")) {
        auto s = signature_from_json(j);
        out_ << "signature " << s->name() << ": " << s->constructs().size() << " constructs\n";
      } else if (j.contains("carrier")) {
        auto r = relation_from_json(j);
        out_ << "relation " << r.name() << " (" << (r.kind() == RelationKind::Equivalence ? "equivalence" : "preorder")
             << "): " << r.size() << " elements";
        if (r.kind() == RelationKind::Equivalence) out_ << ", " << r.classes().size() << " classes";
        out_ << "\n";
      } else if (j.contains("heads") || j.contains("table") || j.contains("pairs")) {
        const char* what = j.contains("heads") ? "translation" : j.contains("table") ? "translation table"
                                                                                    : "semantic translation";
        std::size_t n = j.contains("heads") ? j.at("heads").size() : j.contains("table") ? j.at("table").size()
                                                                                         : j.at("pairs").size();
        out_ << what << " " << j.value("source", "?") << " -> " << j.value("target", "?") << ": " << n
             << " entries\n";
      } else {
        throw InputError("'" + path + "' is not a signature, language, relation or translation");
      }
    }
    return kHolds;
  }

  int check_congruence() {
    Relation sim = relation_from_json(detail::load_json(o_.relation));
    if (!o_.translation.empty()) {
      if (o_.source.empty() || o_.target.empty())
        throw UsageError("check congruence --translation needs --source and --target");
      auto src = language_from_json(detail::load_json(o_.source));
      auto tgt = language_from_json(detail::load_json(o_.target));
      auto t = translation_from_json(detail::load_json(o_.translation), src.signature_ptr(), tgt.signature_ptr());
      auto u = counterpart_domain(src, tgt, sim);
      auto v = is_congruence_for_image(t, tgt, sim, u);
      out_ << "congruence of " << sim.name() << " for T(" << src.name() << ") on U = " << detail::join_values(tgt, u)
           << ": " << (v.holds ? "holds" : "fails") << "\n";
      if (!v.holds)
        out_ << "  witness: " << to_string(v.image) << " with " << format_valuation(tgt, v.theta) << " gives "
             << tgt.values()[v.lhs_value] << ", with " << format_valuation(tgt, v.eta) << " gives "
             << tgt.values()[v.rhs_value] << "; arguments related, results not\n";
      return v.holds ? kHolds : kFails;
    }
    if (o_.lang.empty()) throw UsageError("check congruence needs --lang, or --translation with --source/--target");
    auto l = language_from_json(detail::load_json(o_.lang));
    auto v = o_.one_hole ? is_one_hole_congruence(l, sim) : is_congruence(l, sim);
    out_ << (o_.one_hole ? "1-hole congruence of " : "congruence of ") << sim.name() << " on " << l.name() << ": "
         << (v.holds ? "holds" : "fails") << "\n";
    if (!v.holds)
      out_ << "  witness: " << detail::apply_text(l, v.op, v.lhs_args) << " = " << l.values()[v.lhs_value] << ", "
           << detail::apply_text(l, v.op, v.rhs_args) << " = " << l.values()[v.rhs_value]
           << "; arguments related, results not\n";
    return v.holds ? kHolds : kFails;
  }

  void print_correctness(const Finite& f, const CorrectnessVerdict& v, const std::string& what) {
    out_ << what << ": " << (v.holds ? "holds" : "fails") << "\n";
    if (v.holds) return;
    if (v.uncovered_source) {
      out_ << "  no counterpart for " << f.src->qualified(*v.uncovered_source) << "\n";
      return;
    }
    out_ << "  head " << to_string(v.head) << " -> " << to_string(v.image) << "\n"
         << "  eta " << format_valuation(*f.tgt, v.eta) << ", rho " << format_valuation(*f.src, v.rho) << "\n"
         << "  [[T(H)]](eta) = " << f.tgt->values()[v.target_value] << ", [[H]](rho) = "
         << f.src->values()[v.source_value] << ", not related\n";
  }

  int check_correct() {
    Finite f = load_finite(true);
    if (!o_.semantic.empty()) {
      auto r = semantic_translation_from_json(detail::load_json(o_.semantic), *f.src, *f.tgt);
      auto v = check_correct_wrt(*f.t, *f.src, *f.tgt, r);
      print_correctness(f, v, "correct w.r.t. R = " + format_translation(*f.tgt, *f.src, r));
      return v.holds ? kHolds : kFails;
    }
    auto v = check_correct_upto(*f.t, *f.src, *f.tgt, *f.sim);
    print_correctness(f, v, "correct up to " + f.sim->name());
    return v.holds ? kHolds : kFails;
  }

  int check_valid() {
    Finite f = load_finite(true);
    auto v = check_valid_upto(*f.t, *f.src, *f.tgt, *f.sim, o_.cap);
    using S = ValidityVerdict::Status;
    out_ << "valid up to " << f.sim->name() << ": "
         << (v.status == S::Valid ? "yes" : v.status == S::Invalid ? "no" : "inconclusive") << "\n";
    if (v.uncovered_source) {
      out_ << "  no counterpart for " << f.src->qualified(*v.uncovered_source) << "\n";
      return kFails;
    }
    if (v.status == S::Inconclusive) {
      out_ << "  search space exceeds the cap of " << v.cap << " counterpart functions\n";
      return kInconclusive;
    }
    if (v.status == S::Valid) out_ << "  witness R = " << format_translation(*f.tgt, *f.src, v.witness) << "\n";
    out_ << "  search: " << v.candidate_pairs << " candidate pairs (2^" << v.candidate_pairs
         << " relations), " << v.seeds_examined << " counterpart functions closed\n";
    return v.status == S::Valid ? kHolds : kFails;
  }

  int check_preserves_cmd() {
    Finite f = load_finite(true);
    auto v = check_preserves(*f.t, *f.src, *f.tgt, *f.sim);
    out_ << "preserves " << f.sim->name() << ": " << (v.holds ? "yes" : "no") << "\n";
    if (v.uncovered_source) {
      out_ << "  no counterpart for " << f.src->qualified(*v.uncovered_source) << "\n";
      return kFails;
    }
    for (const auto& r : v.rejected)
      out_ << "  rejected " << format_counterpart(*f.src, *f.tgt, r.candidate) << ": E = " << to_string(r.term)
           << ", rho " << format_valuation(*f.src, r.rho) << ", [[T(E)]] = " << f.tgt->values()[r.target_value]
           << ", [[E]] = " << f.src->values()[r.source_value] << "\n";
    if (v.holds) out_ << "  witness " << format_counterpart(*f.src, *f.tgt, v.witness) << "\n";
    return v.holds ? kHolds : kFails;
  }

  int check_respects_cmd() {
    Finite f = load_finite(true);
    auto v = check_respects(*f.t, *f.src, *f.tgt, *f.sim, o_.depth);
    out_ << "respects " << f.sim->name() << " on closed terms to depth " << v.depth << ": "
         << (v.holds ? "holds" : "fails") << " (" << v.terms_checked << " terms)\n";
    if (v.uncovered_source) {
      out_ << "  no counterpart for " << f.src->qualified(*v.uncovered_source) << "\n";
      return kFails;
    }
    if (!v.holds)
      out_ << "  witness p = " << to_string(*v.witness) << ", eta " << format_valuation(*f.tgt, v.eta)
           << ", [[T(p)]](eta) = " << f.tgt->values()[v.target_value] << ", [[p]] = "
           << f.src->values()[v.source_value] << "\n";
    return v.holds ? kHolds : kFails;
  }

  struct LoadedFn {
    std::optional<FiniteLanguage> keep_src, keep_tgt;
    std::shared_ptr<const Signature> src, tgt;
    TermFn fn;
  };

  LoadedFn load_term_fn() const {
    LoadedFn l;
    l.src = detail::signature_of(detail::load_json(o_.source), l.keep_src);
    l.tgt = detail::signature_of(detail::load_json(o_.target), l.keep_tgt);
    json j = detail::load_json(o_.translation);
    if (j.contains("table")) {
      auto table = std::make_shared<TableTranslation>(table_translation_from_json(j, *l.src, *l.tgt));
      l.fn = [table](const Term& t) { return (*table)(t); };
    } else {
      l.fn = complete_compositional(translation_from_json(j, l.src, l.tgt));
    }
    return l;
  }

  int check_compositional_cmd() {
    auto l = load_term_fn();
    auto v = check_compositional(l.fn, *l.src, o_.depth);
    print_compositional(v);
    return v.holds() ? kHolds : kFails;
  }

  void print_compositional(const CompositionalityVerdict& v) {
    out_ << "compositional to depth " << v.depth << ": "
         << (v.holds() ? "holds" : "fails clause " + std::to_string(v.clause)) << " (" << v.terms_checked
         << " terms, " << v.cases_checked << " cases)\n";
    if (v.holds()) return;
    if (v.clause == 1) {
      out_ << "  E = " << to_string(*v.witness_term) << ", sigma = " << to_string(v.witness_sigma) << "\n"
           << "  T(E[sigma])   = " << to_string(*v.lhs) << "\n"
           << "  T(E)[T.sigma] = " << to_string(*v.rhs) << "\n";
    } else if (v.clause == 2) {
      out_ << "  E = " << to_string(*v.witness_term) << ": T(E) = " << to_string(*v.lhs)
           << " but the alpha-variant translates to " << to_string(*v.rhs) << "\n";
    } else {
      out_ << "  T(" << to_string(*v.witness_term) << ") = " << to_string(*v.lhs) << "\n";
    }
  }

  void print_fvr(const FvrVerdict& v) {
    out_ << "fvr to depth " << v.depth << ": " << (v.holds ? "holds" : "fails") << " (" << v.terms_checked
         << " terms)\n";
    if (v.holds) return;
    out_ << "  E = " << to_string(*v.witness) << ", T(E) = " << to_string(*v.image) << ", introduces {";
    bool first = true;
    for (const auto& x : v.introduced) {
      out_ << (first ? "" : ",") << x;
      first = false;
    }
    out_ << "}\n";
  }

  int check_fvr_cmd() {
    auto l = load_term_fn();
    auto v = is_fvr(l.fn, *l.src, o_.depth);
    print_fvr(v);
    return v.holds ? kHolds : kFails;
  }

  int closure_cmd() {
    auto l = language_from_json(detail::load_json(o_.lang));
    Relation sim = relation_from_json(detail::load_json(o_.relation));
    Relation c = congruence_closure_1hole(l, sim);
    out_ << "1-hole congruence closure of " << sim.name() << " on " << l.name() << ": "
         << format_partition(c.classes(), c.carrier()) << "\n";
    return kHolds;
  }

  int lr_closure_cmd() {
    auto src = language_from_json(detail::load_json(o_.source));
    auto tgt = language_from_json(detail::load_json(o_.target));
    Relation sim = relation_from_json(detail::load_json(o_.relation));
    auto r = semantic_translation_from_json(detail::load_json(o_.semantic), src, tgt);
    Relation eq = smallest_equiv_containing(tgt, src, r);
    Relation c = lr_closure(tgt, src, sim, r);
    out_ << "R = " << format_translation(tgt, src, r) << "\n"
         << "=R: " << format_partition(eq.classes(), eq.carrier()) << "\n"
         << "closure: " << format_partition(c.classes(), c.carrier()) << "\n";
    std::vector<std::vector<std::size_t>> on_v;
    for (const auto& cls : c.classes()) {
      std::vector<std::size_t> keep;
      for (std::size_t x : cls)
        if (x < src.size()) keep.push_back(x);
      if (!keep.empty()) on_v.push_back(std::move(keep));
    }
    out_ << "restricted to " << src.name() << ": " << format_partition(on_v, src.values()) << "\n";
    return kHolds;
  }

  int compose_cmd() {
    auto a = language_from_json(detail::load_json(o_.source));
    auto b = language_from_json(detail::load_json(o_.middle));
    auto c = language_from_json(detail::load_json(o_.target));
    auto t1 = translation_from_json(detail::load_json(o_.translation), a.signature_ptr(), b.signature_ptr());
    auto t2 = translation_from_json(detail::load_json(o_.second), b.signature_ptr(), c.signature_ptr());
    HeadMap t = compose_translations(t1, t2);
    out_ << "composite " << a.name() << " -> " << c.name() << ":\n";
    for (const auto& d : a.signature().constructs())
      out_ << "  " << to_string(construct_head(d)) << " -> " << to_string(t.image(d.name)) << "\n";
    if (o_.semantic.empty() != o_.semantic2.empty())
      throw UsageError("compose needs both --semantic1 and --semantic2, or neither");
    if (o_.semantic.empty()) return kHolds;
    auto r1 = semantic_translation_from_json(detail::load_json(o_.semantic), a, b);
    auto r2 = semantic_translation_from_json(detail::load_json(o_.semantic2), b, c);
    // R2 . R1 as (target, source) pairs.
    SemanticTranslation r;
    for (const auto& [y, x] : r1.pairs)
      for (const auto& [z, y2] : r2.pairs)
        if (y == y2) r.pairs.emplace_back(z, x);
    r.normalize();
    bool c1 = check_correct_wrt(t1, a, b, r1).holds;
    bool c2 = check_correct_wrt(t2, b, c, r2).holds;
    bool c12 = check_correct_wrt(t, a, c, r).holds;
    out_ << "R2.R1 = " << format_translation(c, a, r) << "\n"
         << "T1 correct w.r.t. R1: " << (c1 ? "holds" : "fails") << "\n"
         << "T2 correct w.r.t. R2: " << (c2 ? "holds" : "fails") << "\n"
         << "T2.T1 correct w.r.t. R2.R1: " << (c12 ? "holds" : "fails") << "\n";
    return c12 ? kHolds : kFails;
  }

  int property_suite_cmd() {
    auto rep = property_suite(o_.seed, o_.trials);
    out_ << format_report(rep);
    return rep.ok() ? kHolds : kFails;
  }

  // -- pi -------------------------------------------------------------------

  BarbOptions barb_opts() const {
    BarbOptions b;
    b.input_barbs = o_.input_barbs;
    if (!o_.omega.empty()) {
      auto xs = detail::split_list(o_.omega);
      b.omega = std::set<std::string>(xs.begin(), xs.end());
    }
    return b;
  }

  PiTerm probe_term(const std::string& arg) const {
    PiTerm p = detail::process_arg(arg);
    if (o_.translate) p = boudol_translate(p);
    if (!o_.context.empty()) p = plug(detail::process_arg(o_.context), p);
    return p;
  }

  int pi_parse() {
    out_ << detail::show_pi_ast(detail::process_arg(o_.term)) << "\n";
    return kHolds;
  }

  int pi_print() {
    out_ << print_pi(detail::process_arg(o_.term)) << "\n";
    return kHolds;
  }

  int pi_reduce() {
    PiState s = normal_form(detail::process_arg(o_.term));
    auto next = reduce_once(s);
    out_ << "state: " << print_state(s) << "\n";
    if (next.empty()) out_ << "successors: none\n";
    for (const auto& n : next) out_ << "  -> " << print_state(n) << "\n";
    return kHolds;
  }

  int pi_explore() {
    auto g = explore(probe_term(o_.term), o_.budget, barb_opts());
    out_ << format_graph(g);
    return g.complete ? kHolds : kInconclusive;
  }

  int pi_barbs() {
    auto bs = strong_barbs(normal_form(detail::process_arg(o_.term)), barb_opts());
    if (bs.empty()) out_ << "none\n";
    for (const auto& b : bs) out_ << b.str() << "\n";
    return kHolds;
  }

  int pi_weak_barb() {
    PiTerm p = probe_term(o_.term);
    auto v = weak_barb(p, parse_barb(o_.barb), o_.budget, barb_opts());
    out_ << to_string(v.decision) << "\n"
         << "  " << v.states << " states, " << (v.complete ? "complete" : "truncated at budget " + std::to_string(o_.budget))
         << "\n";
    if (v.witness) out_ << "  reached " << v.witness_state << "\n";
    switch (v.decision) {
      case Decision::Yes: return kHolds;
      case Decision::No: return kFails;
      case Decision::Inconclusive: return kInconclusive;
    }
    return kError;
  }

  static int fold(std::size_t fails, std::size_t inconclusive) {
    return fails ? kFails : inconclusive ? kInconclusive : kHolds;
  }

  int pi_bisim() {
    std::vector<std::pair<PiTerm, PiTerm>> pairs;
    if (!o_.pairs.empty()) {
      if (!o_.terms.empty()) throw UsageError("give either two processes or --pairs");
      pairs = parse_pair_list(detail::read_text(o_.pairs));
    } else {
      if (o_.terms.size() != 2) throw UsageError("pi bisim needs two processes or --pairs");
      pairs.emplace_back(detail::process_arg(o_.terms[0]), detail::process_arg(o_.terms[1]));
    }
    auto prep = [&](const PiTerm& p) {
      PiTerm q = o_.translate ? boudol_translate(p) : p;
      return o_.context.empty() ? q : plug(detail::process_arg(o_.context), q);
    };
    const bool all = o_.kind == "all";
    const auto opts = barb_opts();
    std::size_t fails = 0, inconclusive = 0;
    for (const auto& [p0, q0] : pairs) {
      PiTerm p = prep(p0), q = prep(q0);
      if (pairs.size() > 1 || all) out_ << print_pi(p) << " ;; " << print_pi(q) << "\n";
      if (!all) {
        auto v = bisim(p, q, parse_bisim_kind(o_.kind), o_.budget, opts);
        out_ << (pairs.size() > 1 ? "  " : "") << to_string(parse_bisim_kind(o_.kind)) << ": " << format_verdict(v)
             << "\n";
        fails += v.status == BisimVerdict::Status::NotBisimilar;
        inconclusive += v.status == BisimVerdict::Status::Inconclusive;
        continue;
      }
      // Every kind, then the implications between them on this pair.
      auto gl = explore(p, o_.budget, opts), gr = explore(q, o_.budget, opts);
      std::map<BisimKind, BisimVerdict> vs;
      for (auto k : {BisimKind::Strong, BisimKind::Weak, BisimKind::Branching, BisimKind::DpBranching,
                     BisimKind::WdpBranching}) {
        vs[k] = bisim_graphs(gl, gr, k);
        out_ << "  " << to_string(k) << ": " << to_string(vs[k].status) << "\n";
      }
      if (vs[BisimKind::Weak].status == BisimVerdict::Status::Inconclusive) {
        ++inconclusive;
        continue;
      }
      auto implies = [&](BisimKind a, BisimKind b) { return !vs[a].bisimilar() || vs[b].bisimilar(); };
      bool ok = implies(BisimKind::Strong, BisimKind::Weak) && implies(BisimKind::DpBranching, BisimKind::Branching) &&
                implies(BisimKind::Branching, BisimKind::Weak) && implies(BisimKind::DpBranching, BisimKind::WdpBranching) &&
                implies(BisimKind::WdpBranching, BisimKind::Branching);
      out_ << "  hierarchy: " << (ok ? "consistent" : "VIOLATED") << "\n";
      fails += !ok;
    }
    if (pairs.size() > 1 || all)
      out_ << "summary: " << pairs.size() << " pairs, " << fails << (all ? " hierarchy violations, " : " not bisimilar, ")
           << inconclusive << " inconclusive\n";
    return fold(fails, inconclusive);
  }

  int pi_translate() {
    int code = kHolds;
    if (!o_.pairs.empty()) {
      std::size_t bad = 0;
      for (const auto& [src, want] : parse_pair_list(detail::read_text(o_.pairs))) {
        PiTerm got = boudol_translate(src);
        bool ok = pi_alpha_eq(got, want);
        bad += !ok;
        out_ << (ok ? "ok        " : "MISMATCH  ") << "T(" << print_pi(src) << ") = " << print_pi(got) << "\n";
        if (!ok) out_ << "          expected " << print_pi(want) << "\n";
      }
      if (bad) code = kFails;
    }
    for (const auto& t : o_.terms) out_ << print_pi(boudol_translate(detail::process_arg(t))) << "\n";
    if (!o_.check.empty()) {
      if (o_.check != "compositional" && o_.check != "fvr" && o_.check != "both")
        throw UsageError("--check takes compositional, fvr or both");
      auto src = pi_signature("pi");
      auto fn = boudol_term_fn();
      if (o_.check != "fvr") {
        auto v = check_compositional(fn, *src, o_.depth);
        print_compositional(v);
        if (!v.holds()) code = kFails;
      }
      if (o_.check != "compositional") {
        auto v = is_fvr(fn, *src, o_.depth);
        print_fvr(v);
        if (!v.holds) code = kFails;
      }
    }
    if (o_.pairs.empty() && o_.terms.empty() && o_.check.empty())
      throw UsageError("pi translate needs a process, --pairs or --check");
    return code;
  }

  int pi_plug() {
    PiTerm p = detail::process_arg(o_.terms.at(1));
    if (o_.translate) p = boudol_translate(p);
    out_ << print_pi(plug(detail::process_arg(o_.terms.at(0)), p)) << "\n";
    return kHolds;
  }

  int pi_check_encoding() {
    std::vector<PiTerm> sources;
    if (!o_.file.empty()) sources = detail::term_list(o_.file);
    for (const auto& t : o_.terms) sources.push_back(detail::process_arg(t));
    if (sources.empty()) throw UsageError("pi check-encoding needs processes or --file");
    const BisimKind kind = parse_bisim_kind(o_.kind);
    EncodingReport rep;
    if (o_.context.empty()) {
      rep = check_encoding_pairs(boudol_translate, sources, kind, o_.budget, barb_opts());
    } else {
      PiTerm ctx = detail::process_arg(o_.context);
      rep.kind = kind;
      for (const auto& p : sources) {
        PiTerm lhs = plug(ctx, p), rhs = plug(ctx, boudol_translate(p));
        auto v = bisim(lhs, rhs, kind, o_.budget, barb_opts());
        rep.bisimilar += v.status == BisimVerdict::Status::Bisimilar;
        rep.not_bisimilar += v.status == BisimVerdict::Status::NotBisimilar;
        rep.inconclusive += v.status == BisimVerdict::Status::Inconclusive;
        rep.checks.push_back({lhs, rhs, v});
      }
      out_ << "context " << print_pi(ctx) << "\n";
    }
    out_ << format_encoding_report(rep);
    return fold(rep.not_bisimilar, rep.inconclusive);
  }

  int pi_full_abstraction() {
    auto pairs = parse_pair_list(detail::read_text(o_.pairs));
    const BisimKind kind = parse_bisim_kind(o_.kind);
    const std::size_t budget = o_.budget;
    const BarbOptions opts = barb_opts();
    PiOracle oracle = [=](const PiTerm& p, const PiTerm& q) { return bisim(p, q, kind, budget, opts); };
    auto rep = full_abstraction_check(boudol_translate, oracle, oracle, pairs);
    out_ << "Boudol's translation, " << to_string(kind) << " on both sides\n" << format_full_abstraction(rep);
    return fold(rep.failed, rep.inconclusive);
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  std::vector<std::pair<CLI::App*, Handler>> handlers_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner r(out, err);
  return r.run(args);
}

}  // namespace vtrans::cli
