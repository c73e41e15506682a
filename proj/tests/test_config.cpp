#include "poromix/config.hpp"
#include "poromix/study.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace poromix;
using poromix::testing::code_of;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("poromix_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// errors.csv with the wall-time column blanked.
std::string masked_errors(const std::filesystem::path& dir) {
  std::istringstream in(read_file(dir / "errors.csv"));
  const auto& cols = error_csv_columns();
  const auto wall = std::find(cols.begin(), cols.end(), "walltime_s") - cols.begin();
  std::string line, out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    for (long i = 0; std::getline(row, cell, ','); ++i) out += (i == wall ? std::string("*") : cell) + ",";
    out += "\n";
  }
  return out;
}

std::vector<KeyValue> small_study(const std::filesystem::path& out) {
  return {{"mesh_n", "2"}, {"refinements", "1"}, {"t_final", "0.1"}, {"outputs", out.string()}};
}

}  // namespace

TEST(Toml, FlatPairsCommentsAndQuotes) {
  const auto kv = parse_toml_flat(
      "# comment\n"
      "scenario = \"convergence\"  # trailing\n"
      "\n"
      "mesh_n=4\n"
      "outputs = 'out # dir'\n"
      "snapshot_times = [0.1, 0.2]\n");
  ASSERT_EQ(kv.size(), 4u);
  EXPECT_EQ(kv[0], KeyValue("scenario", "convergence"));
  EXPECT_EQ(kv[1], KeyValue("mesh_n", "4"));
  EXPECT_EQ(kv[2], KeyValue("outputs", "out # dir"));
  EXPECT_EQ(kv[3], KeyValue("snapshot_times", "[0.1, 0.2]"));
}

TEST(Toml, MalformedInputReportsLine) {
  const std::vector<std::string> bad{"[table]\n", "mesh_n\n", "a = 1\na = 2\n", "x = \"open\n",
                                     "s = [1,\n2]\n", "= 3\n", "k =\n"};
  for (const std::string& text : bad) {
    try {
      parse_toml_flat(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
      EXPECT_NE(std::string(e.what()).find("line "), std::string::npos);
    }
  }
  try {
    parse_toml_flat("mesh_n = 2\n\nbroken\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Assignment, SplitsOnFirstEquals) {
  EXPECT_EQ(parse_assignment("lambda=1e6"), KeyValue("lambda", "1e6"));
  EXPECT_EQ(parse_assignment(" outputs = \"a=b\" "), KeyValue("outputs", "a=b"));
  EXPECT_EQ(code_of([] { parse_assignment("lambda"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_assignment("=1"); }), ErrorCode::ParseError);
}

TEST(Config, DefaultsFromScenario) {
  const RunConfig c = parse_config_text("scenario = \"wave\"\n");
  EXPECT_EQ(c.mesh_n, 96);
  EXPECT_EQ(c.refinements, 0);
  ASSERT_TRUE(c.dt.has_value());
  EXPECT_EQ(*c.dt, 0.005);
  EXPECT_EQ(c.w_space, Family::BDM1);
  const RunConfig d = parse_config(std::nullopt);
  EXPECT_EQ(d.scenario, "convergence");
  EXPECT_FALSE(d.dt.has_value());
  EXPECT_EQ(d.dt_check, DtCheckScope::Coarsest);
}

TEST(Config, OverridesWinOverFile) {
  const RunConfig c = parse_config_text("lambda = 5\ns0 = 0.1\nmesh_n = 4\n",
                                        {{"lambda", "1e6"}, {"s0", "0"}, {"mesh_n", "16"}});
  const ScenarioSpec s = resolve(c);
  EXPECT_EQ(s.params.lambda, 1e6);
  EXPECT_EQ(s.params.s0, 0.0);
  EXPECT_EQ(s.mesh_n, 16);
  EXPECT_EQ(c.explicit_keys.size(), 6u);
}

TEST(Config, PhysicalKeysReachTheScenario) {
  const RunConfig c = parse_config_text("k11 = 2\nk12 = 0.5\nk22 = 3\nrho_f = 0.1\nt0 = 0.4\nf0 = 7\n"
                                        "snapshot_times = [0.1, 0.25]\n");
  const ScenarioSpec s = resolve(c);
  EXPECT_EQ(s.params.K(0, 0), 2.0);
  EXPECT_EQ(s.params.K(1, 0), 0.5);
  EXPECT_EQ(s.params.K(1, 1), 3.0);
  EXPECT_EQ(s.params.rho_f, 0.1);
  EXPECT_EQ(s.t0, 0.4);
  EXPECT_EQ(s.f0, 7.0);
  EXPECT_EQ(s.snapshot_times, (std::vector<double>{0.1, 0.25}));
}

TEST(Config, HigherDegreeIsUnsupported) {
  try {
    parse_config_text("degree = 1\n");
    ADD_FAILURE() << "degree 1 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidValue);
    EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
  }
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_EQ(code_of([] { parse_config_text("viscosity = 1\n"); }), ErrorCode::UnknownKey);
  EXPECT_EQ(code_of([] { parse_config_text("", {{"bogus", "1"}}); }), ErrorCode::UnknownKey);
  EXPECT_EQ(code_of([] { parse_config_text("scenario = \"tsunami\"\n"); }), ErrorCode::UnknownScenario);
  EXPECT_EQ(code_of([] { parse_config_text("dt = -1\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("dt = fast\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("mesh_n = 0\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("mesh_n = 2.5\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("w_space = \"dg0\"\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("dt_check = \"some\"\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("mu = -1\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("lambda = nan\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config_text("snapshot_times = [0.1, 9]\n"); }), ErrorCode::InvalidValue);
  EXPECT_EQ(code_of([] { parse_config(std::filesystem::path("/nonexistent/poromix.toml")); }), ErrorCode::IoError);
}

TEST(Config, NoDensityForcesBdm1) {
  const RunConfig c = parse_config_text("scenario = \"robust_nodensity\"\nw_space = \"rt0\"\n");
  EXPECT_EQ(c.w_space, Family::BDM1);
  ASSERT_FALSE(c.notes.empty());
  EXPECT_NE(c.notes.front().find("BDM1"), std::string::npos);
}

TEST(Config, AutoStepAndCheckScope) {
  EXPECT_EQ(*parse_config_text("dt = 0.1\n").dt, 0.1);
  EXPECT_FALSE(parse_config_text("", {{"dt", "0.1"}, {"dt", "auto"}}).dt.has_value());
  EXPECT_EQ(parse_config_text("dt_check = \"all\"\n").dt_check, DtCheckScope::All);
  EXPECT_EQ(parse_config_text("dt_check = \"none\"\n").dt_check, DtCheckScope::None);
}

TEST(Config, HashTracksResolvedSettings) {
  const RunConfig a = parse_config_text("mesh_n = 4\n");
  const RunConfig b = parse_config_text("mesh_n=4 # same\n", {{"outputs", "elsewhere"}});
  const RunConfig c = parse_config_text("mesh_n = 4\nlambda = 11\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(canonical_text(a), canonical_text(b));
  EXPECT_NE(canonical_text(a).find("lambda=10\n"), std::string::npos);
  EXPECT_EQ(canonical_text(a).find("outputs"), std::string::npos);
  const std::vector<std::string>& keys = config_keys();
  for (const char* k : {"scenario", "dt", "dt_check", "lambda", "snapshot_times"}) {
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
  }
}

TEST(Study, SmallConvergenceRun) {
  const auto dir = scratch("study");
  std::ostringstream log;
  const StudyResult r = run_study(parse_config_text("", small_study(dir)), log);
  EXPECT_TRUE(r.ok()) << log.str();
  ASSERT_EQ(r.levels.size(), 2u);
  ASSERT_EQ(r.dt_checks.size(), 2u);
  EXPECT_TRUE(r.dt_checks[0].performed);
  EXPECT_FALSE(r.dt_checks[1].performed);
  for (const std::string& f : study_fields()) {
    ASSERT_EQ(r.slopes.at(f).size(), 1u) << f;
    EXPECT_TRUE(std::isfinite(r.slopes.at(f)[0])) << f;
  }
  EXPECT_NEAR(r.levels[1].report.h, 0.5 * r.levels[0].report.h, 1e-15);
  EXPECT_LT(r.levels[1].report.l2_u, r.levels[0].report.l2_u);
  for (const char* f : {"errors.csv", "energy_L0.csv", "energy_L1.csv", "run.log"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const std::string csv = read_file(dir / "errors.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(read_file(dir / "run.log").find("config:\nscenario=convergence"), std::string::npos);
  EXPECT_NE(log.str().find("slopes between consecutive levels"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Study, CheckScopes) {
  const auto dir = scratch("scopes");
  std::ostringstream log;
  auto keys = small_study(dir);
  keys.emplace_back("dt_check", "all");
  const StudyResult all = run_study(parse_config_text("", keys), log);
  EXPECT_TRUE(all.dt_checks[0].performed);
  EXPECT_TRUE(all.dt_checks[1].performed);
  keys.back().second = "none";
  const StudyResult none = run_study(parse_config_text("", keys), log);
  EXPECT_FALSE(none.dt_checks[0].performed);
  EXPECT_FALSE(none.dt_checks[1].performed);
  keys.back().second = "coarsest";
  keys.emplace_back("dt", "0.05");
  const StudyResult fixed = run_study(parse_config_text("", keys), log);
  EXPECT_FALSE(fixed.dt_checks[0].performed);
  EXPECT_NEAR(fixed.levels[0].report.tau, 0.05, 1e-15);
  std::filesystem::remove_all(dir);
}

TEST(Study, DeterministicApartFromWallTime) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  run_study(parse_config_text("", small_study(a)), log);
  run_study(parse_config_text("", small_study(b)), log);
  EXPECT_EQ(masked_errors(a), masked_errors(b));
  EXPECT_EQ(read_file(a / "energy_L1.csv"), read_file(b / "energy_L1.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Study, TinyWaveWritesSnapshots) {
  const auto dir = scratch("wave");
  std::ostringstream log;
  const RunConfig c = parse_config_text(
      "scenario = \"wave\"\nmesh_n = 8\nt_final = 0.02\ndt = 0.01\nsnapshot_times = [0.01, 0.02]\n",
      {{"outputs", dir.string()}});
  const StudyResult r = run_study(c, log);
  EXPECT_TRUE(r.ok()) << log.str();
  EXPECT_TRUE(std::filesystem::exists(dir / "energy.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "snapshot_t0.010.vtk"));
  EXPECT_TRUE(std::filesystem::exists(dir / "snapshot_t0.020.vtk"));
  EXPECT_TRUE(r.slopes.empty());
  std::filesystem::remove_all(dir);
}
