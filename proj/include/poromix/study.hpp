#pragma once

// Refinement-study driver shared by the command-line tool, the acceptance
// harness and the Python module.

#include "poromix/config.hpp"
#include "poromix/postproc.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace poromix {

/// One mesh level of a study.
struct LevelRecord {
  ErrorReport report;
  Mesh mesh;
  FieldSpaces spaces;
  RunResult run;
  bool zero_load = false;  ///< no loads or boundary data: energy must not grow
};

/// Outcome of the automatic time-step check on one level.
struct TimeStepCheck {
  bool performed = false;
  bool passed = true;
  double tau = 0.0;              ///< accepted step
  double max_relative_change = 0.0;
  int halvings = 0;              ///< how often the automatic step was halved
};

struct StudyResult {
  ScenarioSpec spec;
  std::vector<LevelRecord> levels;
  /// Slopes between consecutive levels, keyed by CSV column name.
  std::map<std::string, std::vector<double>> slopes;
  /// One entry per level; `performed` marks the levels that were checked.
  std::vector<TimeStepCheck> dt_checks;
  std::vector<std::string> gate_failures;
  std::uint64_t hash = 0;

  [[nodiscard]] bool ok() const { return gate_failures.empty(); }
};

struct StudyOptions {
  bool write_files = true;
  bool keep_states = true;  ///< false drops meshes and snapshots after each level
};

inline constexpr double kTimeStepTolerance = 0.05;
inline constexpr int kMaxHalvings = 6;

/// Automatic step for a level: min(0.01, 4 h_min^2).
double auto_dt(const Mesh& mesh);

/// Runs every level, writes errors.csv, energy CSVs, VTK snapshots and
/// run.log under config.outputs, and prints the slope table to `out`.
/// Gates: solver residual, local conservation (manufactured runs), finite
/// energy, the time-step check, and monotone energy for zero-load runs.
StudyResult run_study(const RunConfig& config, std::ostream& out, const StudyOptions& options = {});

/// Fields compared by the time-step check and listed in the slope table.
const std::vector<std::string>& study_fields();
double report_value(const ErrorReport& r, const std::string& field);

}  // namespace poromix
