#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Case {
  std::string name;
  std::vector<std::string> args;
  int exit;
};

const std::string CI = "finite/congruence_image/";
const std::string PN = "finite/preserving_not_valid/";
const std::string RF = "finite/reflection/";
const std::string CU = "finite/closure_undetermined/";
const std::string CO = "finite/compose/";
const std::string NF = "finite/normal_form/";

// Exit codes: 0 holds, 1 fails, 2 inconclusive, 3 error.
const std::vector<Case> kCases = {
    {"lang_validate", {"lang", "validate", CI + "L.json", CI + "Lp.json", CI + "R.json", CI + "sim.json"}, 0},
    {"lang_validate_signature", {"lang", "validate", NF + "S2.json", NF + "SG.json"}, 0},
    {"congruence_L", {"check", "congruence", "--lang", CI + "L.json", "--relation", CI + "sim.json"}, 0},
    {"congruence_image",
     {"check", "congruence", "--translation", CI + "id.json", "--source", CI + "L.json", "--target", CI + "Lp.json",
      "--relation", CI + "sim.json"},
     1},
    {"valid_congruence_image",
     {"check", "valid", "--source", CI + "L.json", "--target", CI + "Lp.json", "--translation", CI + "id.json",
      "--relation", CI + "sim.json"},
     0},
    {"correct_congruence_image",
     {"check", "correct", "--source", CI + "L.json", "--target", CI + "Lp.json", "--translation", CI + "id.json",
      "--relation", CI + "sim.json"},
     1},
    {"correct_semantic",
     {"check", "correct", "--source", CI + "L.json", "--target", CI + "Lp.json", "--translation", CI + "id.json",
      "--relation", CI + "sim.json", "--semantic", CI + "R.json"},
     0},
    {"preserves",
     {"check", "preserves", "--source", PN + "L.json", "--target", PN + "Lp.json", "--translation", PN + "T.json",
      "--relation", PN + "sim.json"},
     0},
    {"valid_preserving",
     {"check", "valid", "--source", PN + "L.json", "--target", PN + "Lp.json", "--translation", PN + "T.json",
      "--relation", PN + "sim.json"},
     1},
    {"correct_preserving_semantic",
     {"check", "correct", "--source", PN + "L.json", "--target", PN + "Lp.json", "--translation", PN + "T.json",
      "--relation", PN + "sim.json", "--semantic", PN + "R.json"},
     1},
    {"fvr_preserving",
     {"check", "fvr", "--source", PN + "L.json", "--target", PN + "Lp.json", "--translation", PN + "T.json"},
     1},
    {"respects_preserving",
     {"check", "respects", "--source", PN + "L.json", "--target", PN + "Lp.json", "--translation", PN + "T.json",
      "--relation", PN + "sim.json", "--depth", "2"},
     1},
    {"valid_reflection",
     {"check", "valid", "--source", RF + "L.json", "--target", RF + "Lp.json", "--translation", RF + "id.json",
      "--relation", RF + "sim.json"},
     0},
    {"closure_reflection", {"closure", "--lang", RF + "Lp.json", "--relation", RF + "sim.json"}, 0},
    {"lr_closure_R",
     {"lr-closure", "--source", CU + "L.json", "--target", CU + "Lp.json", "--relation", CU + "sim.json",
      "--semantic", CU + "R.json"},
     0},
    {"lr_closure_Rdagger",
     {"lr-closure", "--source", CU + "L.json", "--target", CU + "Lp.json", "--relation", CU + "sim.json",
      "--semantic", CU + "Rdagger.json"},
     0},
    {"correct_closure_undetermined",
     {"check", "correct", "--source", CU + "L.json", "--target", CU + "Lp.json", "--translation", CU + "id.json",
      "--relation", CU + "sim.json", "--semantic", CU + "R.json"},
     0},
    {"compose",
     {"compose", "--source", CO + "L.json", "--middle", CO + "Lp.json", "--target", CO + "Lq.json", "--first",
      CO + "T1.json", "--second", CO + "T2.json", "--semantic1", CO + "R1.json", "--semantic2", CO + "R2.json"},
     0},
    {"compositional_normal_form",
     {"check", "compositional", "--source", NF + "S2.json", "--target", NF + "SG.json", "--translation",
      NF + "T.json", "--depth", "3"},
     1},
    {"fvr_normal_form",
     {"check", "fvr", "--source", NF + "S2.json", "--target", NF + "SG.json", "--translation", NF + "T.json",
      "--depth", "3"},
     0},
    {"property_suite", {"property-suite", "--trials", "20", "--seed", "42"}, 0},

    {"pi_parse", {"pi", "parse", "new x.(x!z.0 | x(y).y!w.0)"}, 0},
    {"pi_print", {"pi", "print", "@pi/twice_seq.pi"}, 0},
    {"pi_reduce", {"pi", "reduce", "x!z.0 | x(y).y!w.0 | x(y).0"}, 0},
    {"pi_explore_zeta", {"pi", "explore", "@pi/zeta.pi", "--context", "@pi/async_context.pi"}, 0},
    {"pi_explore_truncated", {"pi", "explore", "!x!z.0 | !x(y).y!w", "--budget", "5"}, 2},
    {"pi_barbs", {"pi", "barbs", "x!z.0 | y(u).0 | @w", "--input-barbs"}, 0},
    {"pi_barbs_none", {"pi", "barbs", "new x.x!z.0"}, 0},
    {"pi_weak_barb_zeta", {"pi", "weak-barb", "@pi/zeta.pi", "v", "--context", "@pi/async_context.pi"}, 0},
    {"pi_weak_barb_rho", {"pi", "weak-barb", "@pi/rho.pi", "v", "--context", "@pi/async_context.pi"}, 1},
    {"pi_weak_barb_par",
     {"pi", "weak-barb", "@pi/twice_par.pi", "r", "--translate", "--context", "@pi/distinguishing_context.pi"},
     0},
    {"pi_weak_barb_seq",
     {"pi", "weak-barb", "@pi/twice_seq.pi", "r", "--translate", "--context", "@pi/distinguishing_context.pi"},
     1},
    {"pi_bisim_two", {"pi", "bisim", "x!z.0", "0"}, 1},
    {"pi_bisim_lattice", {"pi", "bisim", "--pairs", "pi/lattice.txt", "--kind", "all"}, 0},
    {"pi_bisim_dp_context",
     {"pi", "bisim", "x!z.0", "x!z.0", "--kind", "dp-branching", "--context", "@pi/dp_context.pi"},
     0},
    {"pi_translate_table", {"pi", "translate", "--pairs", "pi/boudol_table.txt"}, 0},
    {"pi_translate_terms", {"pi", "translate", "x!z.0", "x(y).0"}, 0},
    {"pi_translate_check", {"pi", "translate", "--check", "both", "--depth", "2"}, 0},
    {"pi_plug", {"pi", "plug", "@pi/dp_context.pi", "x!z.0", "--translate"}, 0},
    {"pi_check_encoding", {"pi", "check-encoding", "--file", "pi/spot.txt"}, 0},
    {"pi_check_encoding_context",
     {"pi", "check-encoding", "x!z.0", "--kind", "dp-branching", "--context", "@pi/dp_context.pi"},
     0},
    {"pi_full_abstraction", {"pi", "full-abstraction", "--pairs", "pi/full_abstraction.txt"}, 0},

    {"error_no_command", {}, 3},
    {"error_unknown_subcommand", {"pi", "frob"}, 3},
    {"error_missing_option", {"check", "valid", "--source", CI + "L.json"}, 3},
    {"error_missing_file", {"closure", "--lang", "nope.json", "--relation", CI + "sim.json"}, 3},
    {"error_syntax", {"pi", "print", "x!z.(0"}, 3},
    {"error_bad_kind", {"pi", "bisim", "0", "0", "--kind", "coupled"}, 3},
    {"error_open_plug", {"pi", "plug", "x!z.0", "0"}, 3},
};

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  setenv("VTRANS_FIXTURES", VTRANS_FIXTURE_DIR, 1);
  std::ostringstream out, err;
  int code = vtrans::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string transcript(const Case& c, const Run& r) {
  std::string cmd = "vtrans";
  for (const auto& a : c.args) cmd += " '" + a + "'";
  return "$ " + cmd + "\nexit " + std::to_string(r.code) + "\n--- stdout\n" + r.out + "--- stderr\n" + r.err;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("CLI transcripts match the golden files", "[cli]") {
  const bool update = std::getenv("VTRANS_UPDATE_GOLDEN") != nullptr;
  const fs::path dir = VTRANS_GOLDEN_DIR;
  if (update) fs::create_directories(dir);
  for (const auto& c : kCases) {
    DYNAMIC_SECTION(c.name) {
      Run r = run(c.args);
      std::string got = transcript(c, r);
      fs::path file = dir / (c.name + ".txt");
      if (update) {
        std::ofstream(file) << got;
      } else {
        REQUIRE(fs::exists(file));
        CHECK(got == read_file(file));
      }
      CHECK(r.code == c.exit);
    }
  }
}

TEST_CASE("every fixture file is exercised by some CLI case", "[cli]") {
  std::set<std::string> used;
  for (const auto& c : kCases)
    for (auto a : c.args) {
      if (!a.empty() && a[0] == '@') a = a.substr(1);
      used.insert(a);
    }
  const fs::path root = VTRANS_FIXTURE_DIR;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), root).generic_string();
    INFO(rel);
    CHECK(used.count(rel) == 1);
  }
}

TEST_CASE("usage errors print the subcommand help", "[cli]") {
  Run r = run({"check", "valid"});
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") == 0);
  CHECK(r.err.find("--relation") != std::string::npos);
  Run h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("pi") != std::string::npos);
}
