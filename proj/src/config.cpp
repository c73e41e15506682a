#include "poromix/config.hpp"

#include "poromix/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace poromix {

namespace {

const std::vector<std::string> kGeneralKeys{"scenario", "mesh_n",  "refinements", "t_final",
                                            "dt",       "dt_check", "gamma",      "penalty_r",
                                            "w_space",  "degree",  "outputs"};
const std::vector<std::string> kPhysicalKeys{"mu",  "lambda", "s0",  "alpha", "rho_u", "rho_f",
                                             "rho_w", "k",    "k11", "k12",   "k22",   "phi",
                                             "nu_tort", "f0", "t0",  "snapshot_times"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool contains(const std::vector<std::string>& v, const std::string& k) {
  return std::find(v.begin(), v.end(), k) != v.end();
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  std::string t = text;
  t.erase(std::remove(t.begin(), t.end(), '_'), t.end());
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidValue, key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidValue, key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_array(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw Error(ErrorCode::InvalidValue, key + ": expected an array like [0.8, 0.9]");
  }
  std::vector<double> out;
  std::stringstream items(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(items, item, ',')) {
    const std::string v = trim(item);
    if (v.empty()) continue;
    out.push_back(to_double(key, v));
  }
  return out;
}

Family to_family(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "rt0") return Family::RT0;
  if (t == "bdm1") return Family::BDM1;
  throw Error(ErrorCode::InvalidValue, "w_space: expected rt0 or bdm1, got '" + text + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidValue, what);
}

void apply_general(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "mesh_n") {
    c.mesh_n = to_int(key, value);
    require(c.mesh_n >= 1, "mesh_n must be at least 1");
  } else if (key == "refinements") {
    c.refinements = to_int(key, value);
    require(c.refinements >= 0 && c.refinements <= 8, "refinements must lie in [0, 8]");
  } else if (key == "t_final") {
    c.t_final = to_double(key, value);
    require(c.t_final > 0.0, "t_final must be positive");
  } else if (key == "dt") {
    if (value == "auto") {
      c.dt.reset();
    } else {
      c.dt = to_double(key, value);
      require(*c.dt > 0.0, "dt must be positive or \"auto\"");
    }
  } else if (key == "dt_check") {
    if (value == "coarsest") {
      c.dt_check = DtCheckScope::Coarsest;
    } else if (value == "all") {
      c.dt_check = DtCheckScope::All;
    } else if (value == "none") {
      c.dt_check = DtCheckScope::None;
    } else {
      require(false, "dt_check must be \"coarsest\", \"all\" or \"none\"");
    }
  } else if (key == "gamma") {
    c.gamma = to_double(key, value);
    require(c.gamma > 0.0, "gamma must be positive");
  } else if (key == "penalty_r") {
    c.penalty_r = to_int(key, value);
    require(c.penalty_r >= 0, "penalty_r must be non-negative");
  } else if (key == "w_space") {
    c.w_space = to_family(value);
  } else if (key == "degree") {
    c.degree = to_int(key, value);
    require(c.degree == 0, "degree = " + value +
                               " is unsupported: only the lowest-order family (l = 0) is implemented, "
                               "higher orders are a planned extension");
  } else if (key == "outputs") {
    require(!value.empty(), "outputs must name a directory");
    c.outputs = value;
  }
}

void apply_physical(ScenarioSpec& s, const std::string& key, const std::string& value) {
  ModelParams& p = s.params;
  if (key == "snapshot_times") {
    s.snapshot_times = to_array(key, value);
    return;
  }
  const double v = to_double(key, value);
  if (key == "mu") p.mu = v;
  else if (key == "lambda") p.lambda = v;
  else if (key == "s0") p.s0 = v;
  else if (key == "alpha") p.alpha = v;
  else if (key == "rho_u") p.rho_u = v;
  else if (key == "rho_f") p.rho_f = v;
  else if (key == "rho_w") p.rho_w = v;
  else if (key == "k") p.K = v * Mat2::Identity();
  else if (key == "k11") p.K(0, 0) = v;
  else if (key == "k12") p.K(0, 1) = p.K(1, 0) = v;
  else if (key == "k22") p.K(1, 1) = v;
  else if (key == "phi") p.phi = v;
  else if (key == "nu_tort") p.nu_tort = v;
  else if (key == "f0") s.f0 = v;
  else if (key == "t0") s.t0 = v;
}

RunConfig build(const std::vector<KeyValue>& file_keys, const std::vector<KeyValue>& overrides) {
  std::vector<KeyValue> all = file_keys;
  all.insert(all.end(), overrides.begin(), overrides.end());
  for (const auto& [k, v] : all) {
    if (!contains(kGeneralKeys, k) && !contains(kPhysicalKeys, k)) {
      throw Error(ErrorCode::UnknownKey, "unknown config key '" + k + "'");
    }
  }
  RunConfig c;
  for (const auto& [k, v] : all) {
    if (k == "scenario") c.scenario = v;
  }
  const ScenarioSpec base = scenario(c.scenario);
  c.mesh_n = base.mesh_n;
  c.refinements = base.refinements;
  c.t_final = base.t_F;
  c.dt = base.dt;
  c.gamma = base.penalty.gamma;
  c.penalty_r = base.penalty.r;
  c.w_space = base.w_family;
  c.explicit_keys = all;
  for (const auto& [k, v] : all) {
    if (contains(kGeneralKeys, k)) {
      apply_general(c, k, v);
    } else {
      c.overrides.emplace_back(k, v);
    }
  }
  if (c.scenario == "robust_nodensity" && c.w_space != Family::BDM1) {
    c.w_space = Family::BDM1;
    c.notes.emplace_back("w_space forced to BDM1: RT0 loses second order for w when rho_f = rho_w = 0");
  }
  for (const std::string& w : resolve(c).params.validate()) c.notes.push_back("warning: " + w);
  return c;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string_view to_string(DtCheckScope scope) {
  switch (scope) {
    case DtCheckScope::Coarsest: return "coarsest";
    case DtCheckScope::All: return "all";
    case DtCheckScope::None: return "none";
  }
  return "coarsest";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = kGeneralKeys;
    k.insert(k.end(), kPhysicalKeys.begin(), kPhysicalKeys.end());
    return k;
  }();
  return keys;
}

std::vector<KeyValue> parse_toml_flat(const std::string& text) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    // Strip a trailing comment outside quotes.
    std::string line;
    char quote = 0;
    for (char ch : raw) {
      if (quote) {
        if (ch == quote) quote = 0;
      } else if (ch == '"' || ch == '\'') {
        quote = ch;
      } else if (ch == '#') {
        break;
      }
      line.push_back(ch);
    }
    if (quote) fail("unterminated string");
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') fail("tables are not supported; use flat key = value pairs");
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = unquote(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.empty()) fail("missing value for '" + key + "'");
    if (value.front() == '[' && value.back() != ']') fail("arrays must fit on one line");
    if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
    out.emplace_back(key, unquote(value));
  }
  return out;
}

KeyValue parse_assignment(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::ParseError, "override '" + item + "' is not of the form key=value");
  }
  const std::string key = trim(item.substr(0, eq));
  if (key.empty()) throw Error(ErrorCode::ParseError, "override '" + item + "' has an empty key");
  return {key, unquote(trim(item.substr(eq + 1)))};
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<KeyValue>& overrides) {
  if (!file) return build({}, overrides);
  std::ifstream in(*file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + file->string());
  std::stringstream text;
  text << in.rdbuf();
  return build(parse_toml_flat(text.str()), overrides);
}

RunConfig parse_config_text(const std::string& text, const std::vector<KeyValue>& overrides) {
  return build(parse_toml_flat(text), overrides);
}

ScenarioSpec resolve(const RunConfig& c) {
  ScenarioSpec s = scenario(c.scenario);
  s.mesh_n = c.mesh_n;
  s.refinements = c.refinements;
  s.t_F = c.t_final;
  s.dt = c.dt;
  s.penalty.gamma = c.gamma;
  s.penalty.r = c.penalty_r;
  s.w_family = c.w_space;
  for (const auto& [k, v] : c.overrides) apply_physical(s, k, v);
  s.penalty.validate();
  s.params.validate();
  for (double t : s.snapshot_times) {
    require(t >= 0.0 && t <= s.t_F + 1e-12, "snapshot_times must lie in [0, t_final]");
  }
  return s;
}

std::string canonical_text(const RunConfig& c) {
  const ScenarioSpec s = resolve(c);
  const ModelParams& p = s.params;
  std::ostringstream out;
  out << "scenario=" << c.scenario << '\n'
      << "mesh_n=" << s.mesh_n << '\n'
      << "refinements=" << s.refinements << '\n'
      << "t_final=" << format_double(s.t_F) << '\n'
      << "dt=" << (s.dt ? format_double(*s.dt) : std::string("auto")) << '\n'
      << "dt_check=" << to_string(c.dt_check) << '\n'
      << "gamma=" << format_double(s.penalty.gamma) << '\n'
      << "penalty_r=" << s.penalty.r << '\n'
      << "w_space=" << to_string(s.w_family) << '\n'
      << "degree=" << c.degree << '\n'
      << "mu=" << format_double(p.mu) << '\n'
      << "lambda=" << format_double(p.lambda) << '\n'
      << "s0=" << format_double(p.s0) << '\n'
      << "alpha=" << format_double(p.alpha) << '\n'
      << "rho_u=" << format_double(p.rho_u) << '\n'
      << "rho_f=" << format_double(p.rho_f) << '\n'
      << "rho_w=" << format_double(p.rho_w) << '\n'
      << "k11=" << format_double(p.K(0, 0)) << '\n'
      << "k12=" << format_double(p.K(0, 1)) << '\n'
      << "k22=" << format_double(p.K(1, 1)) << '\n'
      << "f0=" << format_double(s.f0) << '\n'
      << "t0=" << format_double(s.t0) << '\n'
      << "snapshot_times=[";
  for (std::size_t i = 0; i < s.snapshot_times.size(); ++i) {
    out << (i ? "," : "") << format_double(s.snapshot_times[i]);
  }
  out << "]\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_text(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace poromix
