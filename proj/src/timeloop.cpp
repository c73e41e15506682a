#include "poromix/timeloop.hpp"

#include "poromix/errors.hpp"
#include "poromix/parallel.hpp"

#include <Eigen/SparseLU>
#ifdef POROMIX_HAVE_KLU
#include <Eigen/KLUSupport>
#endif

#include <chrono>
#include <cmath>
#include <sstream>

namespace poromix {

TimeGrid TimeGrid::from_dt(double t_F, double dt) {
  if (!(t_F >= 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::InvalidValue, "time grid needs t_F >= 0 and dt > 0");
  }
  TimeGrid g;
  g.t_F = t_F;
  g.N = static_cast<int>(std::ceil(t_F / dt - 1e-9));
  return g;
}

struct Factorization::Impl {
  SpMat scaled;  // the LU keeps a reference to its matrix
#ifdef POROMIX_HAVE_KLU
  Eigen::KLU<SpMat> lu;
  static constexpr const char* name = "klu";
#else
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  static constexpr const char* name = "eigen-sparselu";
#endif
};

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

const char* Factorization::backend() const { return Impl::name; }

Factorization::Factorization(const SpMat& M, const SpMat& A, double tau,
                             const std::vector<int>& constrained)
    : impl_(std::make_unique<Impl>()), constrained_(constrained) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidValue, "time step must be positive");
  if (M.rows() != A.rows() || M.cols() != A.cols() || M.rows() != M.cols()) {
    throw Error(ErrorCode::InvalidValue, "M and A must be square and of equal size");
  }
  const int n = static_cast<int>(M.rows());
  std::vector<char> fixed(n, 0);
  for (int i : constrained) fixed[i] = 1;

  SpMat S = M / tau + A;
  S.prune([&](int i, int j, double) { return !fixed[i] && !fixed[j]; });
  std::vector<Eigen::Triplet<double>> diag;
  for (int i : constrained) diag.emplace_back(i, i, 1.0);
  SpMat I(n, n);
  I.setFromTriplets(diag.begin(), diag.end());
  S_ = S + I;
  S_.makeCompressed();
  for (int k = 0; k < S_.outerSize(); ++k) {
    for (SpMat::InnerIterator it(S_, k); it; ++it) {
      if (!std::isfinite(it.value())) throw Error(ErrorCode::NonFiniteEntry, "non-finite system entry");
    }
  }

  // Symmetric diagonal equilibration; the blocks differ by many orders of
  // magnitude for physical coefficients.
  scale_ = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd d = S_.diagonal();
  for (int i = 0; i < n; ++i) {
    if (d(i) != 0.0) scale_(i) = 1.0 / std::sqrt(std::abs(d(i)));
  }
  SpMat& scaled = impl_->scaled;
  scaled = scale_.asDiagonal() * S_ * scale_.asDiagonal();
  scaled.makeCompressed();

  auto singular = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "system matrix M/tau + A is singular (tau = " << tau << ", " << n << " unknowns): " << why
        << "; check for vanishing densities together with vanishing compliance";
    return Error(ErrorCode::SingularSystem, msg.str());
  };
  if (S_.nonZeros() == 0 || scaled.norm() == 0.0) throw singular("matrix is zero");
  impl_->lu.compute(scaled);
  if (impl_->lu.info() != Eigen::Success) throw singular("factorization failed");
  const Eigen::VectorXd probe = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd y = impl_->lu.solve(probe);
  if (impl_->lu.info() != Eigen::Success || !y.allFinite()) throw singular("zero pivot");
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) {
  const double bnorm = b.norm();
  auto residual = [&](const Eigen::VectorXd& x) {
    const double r = (S_ * x - b).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  auto raw = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    const Eigen::VectorXd scaled_rhs = scale_.cwiseProduct(rhs);
    Eigen::VectorXd y = impl_->lu.solve(scaled_rhs);
    return scale_.cwiseProduct(y);
  };
  Eigen::VectorXd x = raw(b);
  double res = residual(x);
  if (!(res <= kResidualTolerance)) {
    x += raw(b - S_ * x);
    res = residual(x);
  }
  last_residual_ = res;
  max_residual_ = std::max(max_residual_, res);
  if (!(res <= kResidualTolerance)) {
    std::ostringstream msg;
    msg << "relative residual " << res << " exceeds " << kResidualTolerance;
    throw Error(ErrorCode::SolveFailure, msg.str());
  }
  return x;
}

EnergyParts energy(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& spaces,
                   const ModelParams& params, const PenaltySpec& penalty) {
  const InteractionMatrices R = build_interaction_matrices(params);
  const QuadratureRule& q = quadrature(kAssemblyQuadrature);
  const BasisTable ts = tabulate(spaces.sigma.element(), q.points);
  const BasisTable tp = tabulate(spaces.p.element(), q.points);
  const BasisTable tu = tabulate(spaces.u.element(), q.points);
  const BasisTable tw = tabulate(spaces.w.element(), q.points);
  const int nc = mesh.num_cells();
  std::vector<EnergyParts> cells(nc);

  auto combine = [&](const DofMap& map, int c, const BasisValues& b) {
    const auto dofs = map.cell(c);
    Eigen::Vector4d v = Eigen::Vector4d::Zero();
    for (int j = 0; j < map.n_local; ++j) v += x(map.offset + dofs[j].index) * b.value[j];
    return v;
  };

  parallel_for(nc, [&](int c) {
    const CellGeometry geom = cell_geometry(mesh, c);
    const double inv_eps = 1.0 / penalty.eps(mesh.cell_diameter[c]);
    EnergyParts e;
    for (std::size_t g = 0; g < q.points.size(); ++g) {
      const double wq = q.weights[g] * std::abs(geom.detJ);
      const Mat2 sigma = as_tensor(combine(spaces.sigma, c, cell_basis(spaces.sigma, c, geom, ts.at_point[g])));
      const double p = combine(spaces.p, c, cell_basis(spaces.p, c, geom, tp.at_point[g]))(0);
      const Vec2 u = combine(spaces.u, c, cell_basis(spaces.u, c, geom, tu.at_point[g])).head<2>();
      const Vec2 w = combine(spaces.w, c, cell_basis(spaces.w, c, geom, tw.at_point[g])).head<2>();
      const Mat2 sd = dev(sigma), ss = skw(sigma);
      e.dev += wq * frobenius(sd, sd) / (2.0 * params.mu);
      e.skw += wq * inv_eps * frobenius(ss, ss);
      e.kinetic += wq * (R.R1(0, 0) * u.squaredNorm() + 2.0 * R.R1(0, 1) * u.dot(w) +
                         R.R1(1, 1) * w.squaredNorm());
      const Vec2 tp2(trace(sigma), p);
      e.pressure += wq * tp2.dot(R.R2 * tp2);
    }
    cells[c] = e;
  });
  EnergyParts total;
  for (const EnergyParts& e : cells) {
    total.dev += e.dev;
    total.skw += e.skw;
    total.kinetic += e.kinetic;
    total.pressure += e.pressure;
  }
  return total;
}

EnergyMatrices::EnergyMatrices(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                               const PenaltySpec& penalty)
    : dev(assemble_M(mesh, spaces, params, penalty, kMassDev)),
      skw(assemble_M(mesh, spaces, params, penalty, kMassSkw)),
      kinetic(assemble_M(mesh, spaces, params, penalty, kMassKinetic)),
      pressure(assemble_M(mesh, spaces, params, penalty, kMassPressure)) {}

EnergyParts EnergyMatrices::operator()(const Eigen::VectorXd& x) const {
  return {x.dot(dev * x), x.dot(skw * x), x.dot(kinetic * x), x.dot(pressure * x)};
}

DiscreteState step(const DiscreteState& state, Factorization& fact, const SpMat& M,
                   const LoadVector& load, double tau, const FieldSpaces& spaces) {
  const double t_next = state.t + tau;
  if (std::abs(load.t - t_next) > 1e-9 * std::max(1.0, std::abs(t_next))) {
    throw Error(ErrorCode::InvalidValue, "load vector is not assembled at the new time level");
  }
  Eigen::VectorXd rhs = (M * state.x) / tau + load.b;
  for (int i : fact.constrained()) rhs(i) = 0.0;
  DiscreteState next;
  next.t = t_next;
  next.x = fact.solve(rhs);
  next.d_acc = state.d_acc + tau * next.x.segment(spaces.u.offset, spaces.u.n_global);
  return next;
}

DiscreteState project_initial(const Problem& problem) {
  const Mesh& mesh = problem.mesh;
  const FieldSpaces& s = problem.spaces;
  const InitialState& init = problem.initial;
  DiscreteState state = DiscreteState::zeros(s, 0.0);
  auto at0 = [](const auto& f) { return [f](const Vec2& x) { return f(x, 0.0); }; };
  if (init.sigma0) {
    state.x.segment(s.sigma.offset, s.sigma.n_global) =
        project_L2(as_components(std::function<Mat2(const Vec2&)>(at0(init.sigma0))), s.sigma, mesh);
  }
  if (init.p0) {
    state.x.segment(s.p.offset, s.p.n_global) =
        project_L2(as_components(std::function<double(const Vec2&)>(at0(init.p0))), s.p, mesh);
  }
  if (init.u0) {
    state.x.segment(s.u.offset, s.u.n_global) =
        project_L2(as_components(std::function<Vec2(const Vec2&)>(at0(init.u0))), s.u, mesh);
  }
  if (init.w0) {
    state.x.segment(s.w.offset, s.w.n_global) =
        project_L2(as_components(std::function<Vec2(const Vec2&)>(at0(init.w0))), s.w, mesh);
  }
  if (init.d0) {
    state.d_acc = project_L2(as_components(std::function<Vec2(const Vec2&)>(at0(init.d0))), s.u, mesh);
  }
  return state;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RunResult run(const Problem& problem, const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  const Mesh& mesh = problem.mesh;
  const FieldSpaces& spaces = problem.spaces;
  RunResult result;
  result.n_dofs = spaces.n_total;

  auto t0 = Clock::now();
  const BlockSystem sys = assemble_system(mesh, spaces, problem.params, problem.penalty);
  const EnergyMatrices energy_of(mesh, spaces, problem.params, problem.penalty);
  result.assembly_seconds = seconds_since(t0);

  // Loads polynomial in time: assemble at equispaced nodes, then interpolate.
  std::vector<double> nodes;
  std::vector<Eigen::VectorXd> node_loads;
  if (problem.load_time_degree >= 0 && options.grid.N > 0) {
    const int d = problem.load_time_degree;
    for (int j = 0; j <= d; ++j) {
      nodes.push_back(d == 0 ? options.grid.t_F : options.grid.t_F * j / d);
      node_loads.push_back(assemble_load(mesh, spaces, problem.loads, problem.bc, nodes.back()).b);
    }
  }
  auto load_at = [&](double t) {
    if (nodes.empty()) return assemble_load(mesh, spaces, problem.loads, problem.bc, t);
    LoadVector l;
    l.t = t;
    l.b = Eigen::VectorXd::Zero(spaces.n_total);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      double w = 1.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k != j) w *= (t - nodes[k]) / (nodes[j] - nodes[k]);
      }
      l.b += w * node_loads[j];
    }
    return l;
  };

  DiscreteState state = project_initial(problem);
  EnergyRecord first;
  first.parts = energy_of(state.x);
  result.energy.push_back(first);

  const double tau = options.grid.tau();
  std::vector<char> taken(options.snapshot_times.size(), 0);
  auto snapshot = [&](const DiscreteState& s) {
    const double half = options.grid.N > 0 ? 0.5 * tau : 1e-12;
    for (std::size_t k = 0; k < options.snapshot_times.size(); ++k) {
      if (!taken[k] && std::abs(s.t - options.snapshot_times[k]) <= half * (1 + 1e-9)) {
        result.snapshots.push_back({s.t, s.x});
        taken[k] = 1;
      }
    }
  };
  snapshot(state);
  if (options.observer) options.observer(state, 0);

  if (options.grid.N > 0) {
    t0 = Clock::now();
    Factorization fact(sys.M, sys.A, tau, spaces.constrained_dofs());
    result.factorization_seconds = seconds_since(t0);
    result.matrix_nonzeros = fact.nonzeros();

    t0 = Clock::now();
    for (int n = 1; n <= options.grid.N; ++n) {
      const double t_n = options.grid.t(n);
      LoadVector load = load_at(t_n);
      load.t = state.t + tau;
      DiscreteState next = step(state, fact, sys.M, load, tau, spaces);
      next.t = t_n;

      EnergyRecord rec;
      rec.t = t_n;
      rec.parts = energy_of(next.x);
      rec.darcy = 2.0 * tau * next.x.dot(sys.A * next.x);
      const Eigen::VectorXd delta = next.x - state.x;
      rec.increment = delta.dot(sys.M * delta);
      rec.dissipation = result.energy.back().parts.total() - rec.parts.total();
      result.energy.push_back(rec);

      if (options.conservation_check) {
        const Eigen::VectorXd g_cell = load.b.segment(spaces.p.offset, spaces.p.n_global);
        const std::vector<double> r =
            local_conservation_residual(state.x, next.x, mesh, spaces, problem.params, g_cell, tau);
        for (double v : r) result.max_conservation_residual = std::max(result.max_conservation_residual, v);
      }
      state = std::move(next);
      snapshot(state);
      if (options.observer) options.observer(state, n);
    }
    result.stepping_seconds = seconds_since(t0);
    result.max_solver_residual = fact.max_residual();
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace poromix
