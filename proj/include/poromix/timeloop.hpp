#pragma once

// Backward Euler for M x' + A x = b:
//
//   (M / tau + A) x^n = (M / tau) x^{n-1} + b(t^n).
//
// The system matrix is constant, so it is factorized once per run.

#include "poromix/assembly.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace poromix {

struct TimeGrid {
  double t_F = 0.0;
  int N = 0;

  [[nodiscard]] double tau() const { return N > 0 ? t_F / N : 0.0; }
  [[nodiscard]] double t(int n) const { return n * tau(); }
  /// Smallest N with t_F / N <= dt.
  static TimeGrid from_dt(double t_F, double dt);
};

/// Direct factorization of S = M / tau + A with the essential DOFs replaced
/// by identity rows and columns.
class Factorization {
 public:
  Factorization(const SpMat& M, const SpMat& A, double tau, const std::vector<int>& constrained);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  /// Solves S x = b; one step of iterative refinement if the relative
  /// residual exceeds the tolerance. Throws SolveFailure if it still does.
  Eigen::VectorXd solve(const Eigen::VectorXd& b);

  [[nodiscard]] const SpMat& matrix() const { return S_; }
  [[nodiscard]] double last_residual() const { return last_residual_; }
  [[nodiscard]] double max_residual() const { return max_residual_; }
  [[nodiscard]] long nonzeros() const { return S_.nonZeros(); }
  [[nodiscard]] const char* backend() const;
  [[nodiscard]] const std::vector<int>& constrained() const { return constrained_; }

  static constexpr double kResidualTolerance = 1e-10;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SpMat S_;
  Eigen::VectorXd scale_;
  std::vector<int> constrained_;
  double last_residual_ = 0.0;
  double max_residual_ = 0.0;
};

/// x^T M x split by physical origin.
struct EnergyParts {
  double dev = 0.0;       ///< (A_dev sigma, sigma) with A_dev = dev / (2 mu)
  double skw = 0.0;       ///< eps^{-1} |skw sigma|^2
  double kinetic = 0.0;   ///< R1 [u, w] . [u, w]
  double pressure = 0.0;  ///< R2 [tr sigma, p] . [tr sigma, p]
  [[nodiscard]] double total() const { return dev + skw + kinetic + pressure; }
};

/// Evaluated by quadrature on the cells, independently of the assembled M.
EnergyParts energy(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& spaces,
                   const ModelParams& params, const PenaltySpec& penalty);

/// The four parts of M, for evaluating the energy split as quadratic forms.
struct EnergyMatrices {
  SpMat dev, skw, kinetic, pressure;

  EnergyMatrices(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                 const PenaltySpec& penalty);
  [[nodiscard]] EnergyParts operator()(const Eigen::VectorXd& x) const;
};

/// One backward-Euler step; `load` must be assembled at state.t + tau.
/// Also accumulates the displacement d += tau u^n.
DiscreteState step(const DiscreteState& state, Factorization& fact, const SpMat& M,
                   const LoadVector& load, double tau, const FieldSpaces& spaces);

struct Problem {
  Mesh mesh;
  FieldSpaces spaces;
  ModelParams params;
  PenaltySpec penalty;
  LoadFunctions loads;
  BoundaryData bc;
  InitialState initial;
  /// If the loads and boundary data are polynomials of this degree in t,
  /// run() assembles them at degree + 1 times and interpolates; -1 assembles
  /// at every step.
  int load_time_degree = -1;
};

/// L2 projections of the initial data, essential DOFs zeroed.
DiscreteState project_initial(const Problem& problem);

struct EnergyRecord {
  double t = 0.0;
  EnergyParts parts;
  double darcy = 0.0;      ///< 2 tau (K^{-1} w^n, w^n)
  double increment = 0.0;  ///< (x^n - x^{n-1})^T M (x^n - x^{n-1})
  /// E^{n-1} - E^n, i.e. darcy + increment - (work done by the loads).
  double dissipation = 0.0;
};

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd x;
};

struct RunOptions {
  TimeGrid grid;
  std::vector<double> snapshot_times;
  bool conservation_check = false;
  std::function<void(const DiscreteState&, int)> observer;
};

struct RunResult {
  DiscreteState final_state;
  std::vector<EnergyRecord> energy;  ///< entry 0 is the initial state
  std::vector<Snapshot> snapshots;
  double max_solver_residual = 0.0;
  double max_conservation_residual = 0.0;
  int n_dofs = 0;
  long matrix_nonzeros = 0;
  double assembly_seconds = 0.0;
  double factorization_seconds = 0.0;
  double stepping_seconds = 0.0;
};

RunResult run(const Problem& problem, const RunOptions& options);

}  // namespace poromix
