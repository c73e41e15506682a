// Python bindings: configuration, studies, meshes and the block system.

#include "poromix/errors.hpp"
#include "poromix/study.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace poromix;

namespace {

std::vector<KeyValue> to_pairs(const py::dict& overrides) {
  std::vector<KeyValue> out;
  for (const auto& [k, v] : overrides) {
    const std::string value = py::isinstance<py::str>(v) ? v.cast<std::string>() : py::str(v).cast<std::string>();
    out.emplace_back(k.cast<std::string>(), value);
  }
  return out;
}

py::dict report_dict(const ErrorReport& r) {
  py::dict d;
  d["level"] = r.level;
  d["h"] = r.h;
  d["tau"] = r.tau;
  d["ndofs"] = r.ndofs;
  for (const std::string& f : study_fields()) d[py::str(f)] = report_value(r, f);
  d["l2_dev_sigma"] = r.l2_dev_sigma;
  d["skw_ratio"] = r.skw_ratio;
  d["energy_final"] = r.energy_final;
  return d;
}

GridPattern pattern_of(const std::string& name) {
  if (name == "diagonal") return GridPattern::Diagonal;
  if (name == "unionjack") return GridPattern::UnionJack;
  if (name == "crisscross") return GridPattern::Crisscross;
  throw Error(ErrorCode::InvalidValue, "unknown grid pattern '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed finite elements for dynamic Biot poroelasticity";

  // The message starts with the error code, e.g. "UnknownKey: ...".
  py::register_exception<Error>(m, "PoromixError", PyExc_RuntimeError);

  m.def("scenario_names", &scenario_names);
  m.def("config_keys", &config_keys);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("scenario", &RunConfig::scenario)
      .def_readonly("mesh_n", &RunConfig::mesh_n)
      .def_readonly("refinements", &RunConfig::refinements)
      .def_readonly("t_final", &RunConfig::t_final)
      .def_readonly("dt", &RunConfig::dt)
      .def_readonly("gamma", &RunConfig::gamma)
      .def_readonly("outputs", &RunConfig::outputs)
      .def_readonly("notes", &RunConfig::notes)
      .def_property_readonly("w_space", [](const RunConfig& c) { return std::string(to_string(c.w_space)); })
      .def_property_readonly("dt_check", [](const RunConfig& c) { return std::string(to_string(c.dt_check)); })
      .def_property_readonly("canonical", [](const RunConfig& c) { return canonical_text(c); })
      .def_property_readonly("hash", [](const RunConfig& c) { return config_hash(c); });

  m.def(
      "load_config",
      [](const std::optional<std::filesystem::path>& path, const py::dict& overrides) {
        return parse_config(path, to_pairs(overrides));
      },
      py::arg("path") = py::none(), py::arg("overrides") = py::dict(),
      "Scenario defaults, then the file, then the overrides.");
  m.def(
      "config_from_text",
      [](const std::string& text, const py::dict& overrides) { return parse_config_text(text, to_pairs(overrides)); },
      py::arg("text"), py::arg("overrides") = py::dict());

  m.def(
      "run_study",
      [](const RunConfig& config, bool write_files, bool verbose) {
        std::ostringstream sink;
        StudyOptions o;
        o.write_files = write_files;
        o.keep_states = false;
        StudyResult r;
        {
          py::gil_scoped_release release;
          r = run_study(config, sink, o);
        }
        if (verbose) py::print(sink.str(), py::arg("end") = "");
        py::dict d;
        py::list levels;
        for (const LevelRecord& l : r.levels) levels.append(report_dict(l.report));
        d["levels"] = levels;
        d["slopes"] = r.slopes;
        d["gate_failures"] = r.gate_failures;
        d["ok"] = r.ok();
        d["hash"] = r.hash;
        py::list checks;
        for (const TimeStepCheck& c : r.dt_checks) {
          py::dict cd;
          cd["performed"] = c.performed;
          cd["passed"] = c.passed;
          cd["tau"] = c.tau;
          cd["max_relative_change"] = c.max_relative_change;
          cd["halvings"] = c.halvings;
          checks.append(cd);
        }
        d["dt_checks"] = checks;
        return d;
      },
      py::arg("config"), py::arg("write_files") = false, py::arg("verbose") = false);

  m.def("eoc", &eoc, py::arg("h"), py::arg("errors"));

  m.def(
      "structured_mesh",
      [](int n, const std::string& pattern) {
        const Mesh mesh = generate_structured(n, n, Rect{}, pattern_of(pattern));
        Eigen::MatrixX2d v(mesh.num_vertices(), 2);
        for (int i = 0; i < mesh.num_vertices(); ++i) v.row(i) = mesh.vertices[i].transpose();
        Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> c(mesh.num_cells(), 3);
        for (int i = 0; i < mesh.num_cells(); ++i) c.row(i) << mesh.cells[i][0], mesh.cells[i][1], mesh.cells[i][2];
        return py::make_tuple(v, c);
      },
      py::arg("n"), py::arg("pattern") = "crisscross", "Vertices and counter-clockwise cells of the unit square.");

  m.def(
      "assemble",
      [](const RunConfig& config, int n) {
        const ScenarioSpec spec = resolve(config);
        const Mesh mesh = scenario_mesh(spec, n);
        const FieldSpaces spaces = build_dofmaps(mesh, spec.w_family);
        BlockSystem sys = assemble_system(mesh, spaces, spec.params, spec.penalty);
        py::dict offsets;
        offsets["sigma"] = sys.offsets[0];
        offsets["p"] = sys.offsets[1];
        offsets["u"] = sys.offsets[2];
        offsets["w"] = sys.offsets[3];
        return py::make_tuple(std::move(sys.M), std::move(sys.A), offsets);
      },
      py::arg("config"), py::arg("n"), "M, A (scipy.sparse) and block offsets on the scenario mesh.");

  py::class_<ManufacturedCase>(m, "ManufacturedCase")
      .def(py::init([](const RunConfig& c) { return ManufacturedCase(resolve(c).params); }), py::arg("config"))
      .def("p", [](const ManufacturedCase& mc, double x, double y, double t) { return mc.p(Vec2(x, y), t); })
      .def("u", [](const ManufacturedCase& mc, double x, double y, double t) -> Eigen::Vector2d {
        return mc.u(Vec2(x, y), t);
      })
      .def("w", [](const ManufacturedCase& mc, double x, double y, double t) -> Eigen::Vector2d {
        return mc.w(Vec2(x, y), t);
      })
      .def("sigma", [](const ManufacturedCase& mc, double x, double y, double t) -> Eigen::Matrix2d {
        return mc.sigma(Vec2(x, y), t);
      });
}
