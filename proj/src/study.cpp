#include "poromix/study.hpp"

#include "poromix/errors.hpp"
#include "poromix/parallel.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace poromix {

namespace {

using Clock = std::chrono::steady_clock;

ExactFields exact_fields(const ManufacturedCase& mc) {
  ExactFields e;
  e.sigma = [mc](const Vec2& x, double t) { return mc.sigma(x, t); };
  e.p = [mc](const Vec2& x, double t) { return mc.p(x, t); };
  e.u = [mc](const Vec2& x, double t) { return mc.u(x, t); };
  e.w = [mc](const Vec2& x, double t) { return mc.w(x, t); };
  e.div_sigma = [mc](const Vec2& x, double t) { return mc.div_sigma(x, t); };
  e.div_w = [mc](const Vec2& x, double t) { return mc.div_w(x, t); };
  return e;
}

bool has_loads(const Problem& p) {
  return p.loads.f || p.loads.h || p.loads.g || p.loads.eta || p.bc.u_d || p.bc.p_d;
}

LevelRecord run_level(const ScenarioSpec& spec, int level, int n, double dt) {
  const auto start = Clock::now();
  LevelRecord rec;
  Problem problem = build_problem(spec, scenario_mesh(spec, n));
  RunOptions opts;
  opts.grid = TimeGrid::from_dt(spec.t_F, dt);
  opts.snapshot_times = spec.snapshot_times;
  opts.conservation_check = true;
  rec.run = run(problem, opts);
  rec.zero_load = !has_loads(problem);

  ErrorReport& r = rec.report;
  const double t_end = opts.grid.t(opts.grid.N);
  if (spec.kind == ScenarioKind::Manufactured) {
    r = error_norms(rec.run.final_state.x, t_end, exact_fields(ManufacturedCase(spec.params)),
                    problem.mesh, problem.spaces);
  } else {
    r.skw_ratio = skw_diagnostic(rec.run.final_state.x, problem.mesh, problem.spaces);
  }
  r.scenario = spec.name;
  r.level = level;
  r.h = mesh_size(problem.mesh).h;
  r.one_over_h = 1.0 / r.h;
  r.tau = opts.grid.tau();
  r.ndofs = problem.spaces.n_total;
  r.energy_final = rec.run.energy.back().parts.total();
  rec.mesh = std::move(problem.mesh);
  rec.spaces = std::move(problem.spaces);
  r.walltime_s = std::chrono::duration<double>(Clock::now() - start).count();
  return rec;
}

double max_relative_change(const ErrorReport& coarse, const ErrorReport& fine) {
  double worst = 0.0;
  for (const std::string& f : study_fields()) {
    const double a = report_value(coarse, f), b = report_value(fine, f);
    if (b > 0.0) worst = std::max(worst, std::abs(a - b) / b);
  }
  return worst;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(prec) << v;
  return s.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string snapshot_name(int level, int levels, double t) {
  std::ostringstream s;
  s << "snapshot_";
  if (levels > 1) s << "L" << level << "_";
  s << "t" << std::fixed << std::setprecision(3) << t << ".vtk";
  return s.str();
}

}  // namespace

const std::vector<std::string>& study_fields() {
  static const std::vector<std::string> f{"l2_u", "l2_w", "l2_sigma", "l2_p", "hdiv_sigma", "hdiv_w"};
  return f;
}

double report_value(const ErrorReport& r, const std::string& f) {
  if (f == "l2_u") return r.l2_u;
  if (f == "l2_w") return r.l2_w;
  if (f == "l2_sigma") return r.l2_sigma;
  if (f == "l2_p") return r.l2_p;
  if (f == "hdiv_sigma") return r.hdiv_sigma;
  if (f == "hdiv_w") return r.hdiv_w;
  if (f == "hdiv_sigma_unw") return r.hdiv_sigma_unw;
  if (f == "hdiv_w_unw") return r.hdiv_w_unw;
  if (f == "l2_dev_sigma") return r.l2_dev_sigma;
  if (f == "skw_ratio") return r.skw_ratio;
  throw Error(ErrorCode::UnknownKey, "unknown report field '" + f + "'");
}

double auto_dt(const Mesh& mesh) {
  const double h = mesh_size(mesh).h_min;
  return std::min(0.01, 4.0 * h * h);
}

StudyResult run_study(const RunConfig& config, std::ostream& out, const StudyOptions& options) {
  StudyResult res;
  res.spec = resolve(config);
  res.hash = config_hash(config);
  const ScenarioSpec& spec = res.spec;
  const bool manufactured = spec.kind == ScenarioKind::Manufactured;

  std::ostringstream log;
  auto emit = [&](const std::string& line) {
    out << line << '\n';
    log << line << '\n';
  };
  emit("poromix run, scenario " + spec.name + ", config hash " + hex(res.hash));
  for (const auto& [k, v] : config.explicit_keys) emit("  set " + k + " = " + v);
  for (const auto& [k, v] : config.overrides) emit("  physical override " + k + " = " + v);
  for (const std::string& n : config.notes) emit("  note: " + n);
  emit("  threads " + std::to_string(thread_count()) + ", w space " + std::string(to_string(spec.w_family)) +
       ", gamma " + fmt(spec.penalty.gamma, 3) + ", r " + std::to_string(spec.penalty.r));

  const int levels = spec.refinements + 1;
  double dt_factor = 1.0;
  for (int k = 0; k < levels; ++k) {
    const int n = spec.mesh_n << k;
    LevelRecord rec;
    TimeStepCheck chk;
    const bool check = !spec.dt && manufactured &&
                       (config.dt_check == DtCheckScope::All ||
                        (config.dt_check == DtCheckScope::Coarsest && k == 0));
    if (spec.dt) {
      rec = run_level(spec, k, n, *spec.dt);
    } else if (!check) {
      rec = run_level(spec, k, n, dt_factor * auto_dt(scenario_mesh(spec, n)));
    } else {
      // Halve the automatic step until halving it again changes every
      // reported error by less than the tolerance. Later levels inherit the
      // accepted factor.
      chk.performed = true;
      const double dt0 = auto_dt(scenario_mesh(spec, n));
      LevelRecord coarse = run_level(spec, k, n, dt_factor * dt0);
      for (;;) {
        LevelRecord fine = run_level(spec, k, n, 0.5 * dt_factor * dt0);
        chk.max_relative_change = max_relative_change(coarse.report, fine.report);
        emit("  time-step check, level " + std::to_string(k) + ": tau " + fmt(coarse.report.tau, 3) + " vs " +
             fmt(fine.report.tau, 3) + ", max relative change " + fmt(chk.max_relative_change, 3));
        if (chk.max_relative_change < kTimeStepTolerance) break;
        if (chk.halvings == kMaxHalvings) {
          chk.passed = false;
          break;
        }
        ++chk.halvings;
        dt_factor *= 0.5;
        coarse = std::move(fine);
      }
      chk.tau = coarse.report.tau;
      if (!chk.passed) {
        res.gate_failures.emplace_back("level " + std::to_string(k) + ": time-step check did not settle below 5%");
      }
      rec = std::move(coarse);
    }
    res.dt_checks.push_back(chk);

    const RunResult& run = rec.run;
    const int nsteps = static_cast<int>(run.energy.size()) - 1;
    emit("level " + std::to_string(k) + ": " + std::to_string(rec.mesh.num_cells()) + " cells, " +
         std::to_string(rec.mesh.num_vertices()) + " vertices, " + std::to_string(rec.mesh.num_edges()) +
         " edges, " + std::to_string(run.n_dofs) + " dofs (sigma " + std::to_string(rec.spaces.sigma.n_global) +
         ", p " + std::to_string(rec.spaces.p.n_global) + ", u " + std::to_string(rec.spaces.u.n_global) +
         ", w " + std::to_string(rec.spaces.w.n_global) + "), nnz " + std::to_string(run.matrix_nonzeros));
    emit("  tau " + fmt(rec.report.tau, 4) + ", steps " + std::to_string(nsteps) + ", max solver residual " +
         fmt(run.max_solver_residual, 2) + ", max conservation residual " +
         fmt(run.max_conservation_residual, 2));
    emit("  wall: assembly " + fmt(run.assembly_seconds, 2) + " s, factorization " +
         fmt(run.factorization_seconds, 2) + " s, stepping " + fmt(run.stepping_seconds, 2) +
         " s, level total " + fmt(rec.report.walltime_s, 2) + " s");

    const std::string tag = "level " + std::to_string(k) + ": ";
    if (run.max_solver_residual > Factorization::kResidualTolerance) {
      res.gate_failures.push_back(tag + "solver residual above tolerance");
    }
    if (manufactured && run.max_conservation_residual > 10.0 * Factorization::kResidualTolerance) {
      res.gate_failures.push_back(tag + "local conservation residual above 10x solver tolerance");
    }
    bool finite = true, monotone = true;
    for (std::size_t i = 0; i < run.energy.size(); ++i) {
      finite = finite && std::isfinite(run.energy[i].parts.total());
      if (i > 0) monotone = monotone && run.energy[i].dissipation >= 0.0;
    }
    if (!finite) res.gate_failures.push_back(tag + "non-finite energy");
    if (!monotone && rec.zero_load) {
      res.gate_failures.push_back(tag + "energy increased in a zero-load run");
    }

    if (options.write_files) {
      const std::string energy_name =
          levels > 1 ? "energy_L" + std::to_string(k) + ".csv" : std::string("energy.csv");
      write_energy_csv(config.outputs / energy_name, run.energy);
      for (const Snapshot& s : run.snapshots) {
        write_vtk(config.outputs / snapshot_name(k, levels, s.t), rec.mesh, rec.spaces, s.x, s.t);
      }
    }
    if (!options.keep_states) {
      rec.run.snapshots.clear();
      rec.mesh = Mesh{};
    }
    res.levels.push_back(std::move(rec));
  }

  std::vector<ErrorReport> rows;
  for (const LevelRecord& l : res.levels) rows.push_back(l.report);
  if (manufactured && levels > 1) {
    std::vector<double> h;
    for (const ErrorReport& r : rows) h.push_back(r.h);
    std::vector<std::string> fields = study_fields();
    fields.insert(fields.end(), {"l2_dev_sigma", "skw_ratio"});
    emit("slopes between consecutive levels:");
    for (const std::string& f : fields) {
      std::vector<double> e;
      for (const ErrorReport& r : rows) e.push_back(report_value(r, f));
      std::vector<double> s;
      try {
        s = eoc(h, e);
      } catch (const Error&) {
        s.assign(h.size() - 1, std::nan(""));
      }
      std::ostringstream line;
      line << "  " << std::left << std::setw(14) << f;
      for (double v : s) line << std::right << std::setw(8) << std::fixed << std::setprecision(3) << v;
      emit(line.str());
      res.slopes[f] = s;
    }
  }
  if (manufactured) {
    emit("final-level errors:");
    const ErrorReport& r = rows.back();
    for (const std::string& f : study_fields()) emit("  " + f + " " + fmt(report_value(r, f)));
  }
  for (const std::string& g : res.gate_failures) emit("GATE FAILED: " + g);
  emit(res.ok() ? "all internal gates passed" : "internal gates failed");

  if (options.write_files) {
    write_error_csv(config.outputs / "errors.csv", rows);
    std::ofstream f(config.outputs / "run.log");
    f << log.str();
    f << "config:\n" << canonical_text(config);
    if (!f) throw Error(ErrorCode::IoError, "failed writing run.log");
  }
  return res;
}

}  // namespace poromix
