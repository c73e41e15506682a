// Command-line driver: poromix --scenario convergence --out results/

#include "poromix/errors.hpp"
#include "poromix/study.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element solver for dynamic Biot poroelasticity"};
  std::string config_path, scenario_name, out_dir, dt_text, dt_check, w_space;
  std::vector<std::string> sets;
  std::optional<int> mesh_n, refinements;
  std::optional<double> gamma;
  bool list = false;

  app.add_option("--config", config_path, "flat TOML config file")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario_name, "built-in scenario name");
  app.add_option("--set", sets, "KEY=VALUE override, repeatable")->take_all();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--mesh-n", mesh_n, "squares per side on the coarsest level");
  app.add_option("--refinements", refinements, "number of additional levels");
  app.add_option("--dt", dt_text, "time step or 'auto'");
  app.add_option("--dt-check", dt_check, "levels whose automatic step is verified: coarsest, all or none");
  app.add_option("--gamma", gamma, "skew penalty scale");
  app.add_option("--w-space", w_space, "filtration space: rt0 or bdm1");
  app.add_flag("--list", list, "print the built-in scenarios and config keys, then exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    std::cout << "scenarios:";
    for (const auto& s : poromix::scenario_names()) std::cout << ' ' << s;
    std::cout << "\nconfig keys:";
    for (const auto& k : poromix::config_keys()) std::cout << ' ' << k;
    std::cout << '\n';
    return 0;
  }

  try {
    std::vector<poromix::KeyValue> overrides;
    if (!scenario_name.empty()) overrides.emplace_back("scenario", scenario_name);
    if (mesh_n) overrides.emplace_back("mesh_n", std::to_string(*mesh_n));
    if (refinements) overrides.emplace_back("refinements", std::to_string(*refinements));
    if (!dt_text.empty()) overrides.emplace_back("dt", dt_text);
    if (!dt_check.empty()) overrides.emplace_back("dt_check", dt_check);
    if (gamma) overrides.emplace_back("gamma", format_number(*gamma));
    if (!w_space.empty()) overrides.emplace_back("w_space", w_space);
    if (!out_dir.empty()) overrides.emplace_back("outputs", out_dir);
    for (const std::string& s : sets) overrides.push_back(poromix::parse_assignment(s));

    std::optional<std::filesystem::path> file;
    if (!config_path.empty()) file = config_path;
    const poromix::RunConfig config = poromix::parse_config(file, overrides);
    const poromix::StudyResult result = poromix::run_study(config, std::cout);
    return result.ok() ? 0 : 1;
  } catch (const poromix::Error& e) {
    std::cerr << "poromix: " << e.what() << '\n';
    return 2;
  }
}
