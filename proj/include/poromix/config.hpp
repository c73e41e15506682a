#pragma once

// Run configuration: a flat TOML-syntax key/value file plus command-line
// overrides, resolved against a built-in scenario.
//
//   scenario = "convergence"
//   mesh_n = 8
//   dt = "auto"          # or a positive number
//   dt_check = "coarsest" # levels on which an automatic step is verified
//   lambda = 1e6         # physical keys override the scenario's values

#include "poromix/scenarios.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace poromix {

using KeyValue = std::pair<std::string, std::string>;

/// Levels on which an automatic time step is halved until the errors settle.
enum class DtCheckScope : std::uint8_t { Coarsest, All, None };

std::string_view to_string(DtCheckScope scope);

struct RunConfig {
  std::string scenario = "convergence";
  int mesh_n = 8;
  int refinements = 3;
  double t_final = 0.5;
  std::optional<double> dt;  ///< empty: automatic
  DtCheckScope dt_check = DtCheckScope::Coarsest;
  double gamma = 1.0;
  int penalty_r = 2;
  Family w_space = Family::RT0;
  int degree = 0;
  std::filesystem::path outputs = "poromix_out";
  /// Physical keys (coefficients, source timing) in application order.
  std::vector<KeyValue> overrides;
  /// Every key that was set explicitly, file first, then flags.
  std::vector<KeyValue> explicit_keys;
  /// Adjustments made while resolving, e.g. a forced filtration space.
  std::vector<std::string> notes;
};

/// Every key accepted in a config file or by --set.
const std::vector<std::string>& config_keys();

/// Splits the text into key/value pairs; strings are unquoted, arrays kept
/// verbatim. Throws ParseError with the line number on malformed input.
std::vector<KeyValue> parse_toml_flat(const std::string& text);

/// "key=value" as given to --set. Throws ParseError without '='.
KeyValue parse_assignment(const std::string& item);

/// Scenario defaults, then the file's keys, then the overrides; later keys
/// win. Throws UnknownKey, InvalidValue, UnknownScenario or IoError.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<KeyValue>& overrides = {});
RunConfig parse_config_text(const std::string& text, const std::vector<KeyValue>& overrides = {});

/// The scenario with every setting of the config applied and validated.
ScenarioSpec resolve(const RunConfig& config);

/// Canonical one-key-per-line dump of the resolved settings.
std::string canonical_text(const RunConfig& config);

/// 64-bit FNV-1a of canonical_text.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace poromix
