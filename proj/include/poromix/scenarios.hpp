#pragma once

// Built-in test problems: a smooth manufactured solution on the unit square
// and an explosive point-like source in a large homogeneous medium.

#include "poromix/elements.hpp"
#include "poromix/mesh.hpp"
#include "poromix/model.hpp"
#include "poromix/timeloop.hpp"

#include <optional>
#include <string>
#include <vector>

namespace poromix {

/// Exact solution with
///   d = t^2 X(x),  X = (sin 2pi y (cos 2pi x - 1) + c S, sin 2pi x (1 - cos 2pi y) + c S),
///   p = t^2 S,     S = sin pi x sin pi y,  c = 1 / (mu + lambda),
/// closed by sigma = C eps(d) - alpha p I and w = -K grad p. All data vanish
/// on the boundary of the unit square and at t = 0.
class ManufacturedCase {
 public:
  explicit ManufacturedCase(ModelParams params);

  [[nodiscard]] const ModelParams& params() const { return params_; }

  [[nodiscard]] Vec2 d(const Vec2& x, double t) const;
  [[nodiscard]] Vec2 u(const Vec2& x, double t) const;
  [[nodiscard]] double p(const Vec2& x, double t) const;
  [[nodiscard]] Vec2 w(const Vec2& x, double t) const;
  [[nodiscard]] Mat2 sigma(const Vec2& x, double t) const;
  /// Row-wise divergence of sigma.
  [[nodiscard]] Vec2 div_sigma(const Vec2& x, double t) const;
  [[nodiscard]] double div_w(const Vec2& x, double t) const;

  [[nodiscard]] Vec2 f(const Vec2& x, double t) const;
  [[nodiscard]] Vec2 h(const Vec2& x, double t) const;
  [[nodiscard]] double g(const Vec2& x, double t) const;

  [[nodiscard]] LoadFunctions loads() const;
  [[nodiscard]] BoundaryData boundary() const;
  [[nodiscard]] InitialState initial() const;

 private:
  // Spatial parts and their derivatives.
  [[nodiscard]] Vec2 X(const Vec2& x) const;
  [[nodiscard]] Mat2 grad_X(const Vec2& x) const;  ///< (i, j) = d_j X_i
  [[nodiscard]] Vec2 lap_X(const Vec2& x) const;
  [[nodiscard]] Vec2 grad_div_X(const Vec2& x) const;
  [[nodiscard]] Vec2 grad_P(const Vec2& x) const;
  [[nodiscard]] Mat2 hess_P(const Vec2& x) const;
  [[nodiscard]] Mat2 Sigma(const Vec2& x) const;

  ModelParams params_;
  double c_ = 0.0;
};

/// Radial force S(t) (1 - |r|^2 / (4 h^2)) r / |r| for |r| < 2h, zero
/// elsewhere and at the centre, with the Ricker wavelet
///   S(t) = (1 - 2 pi^2 f0^2 (t - t0)^2) exp(-pi^2 f0^2 (t - t0)^2).
struct RickerSource {
  double f0 = 5.0;
  double t0 = 0.6;
  Vec2 center{2400.0, 2400.0};
  double h = 1.0;

  [[nodiscard]] double wavelet(double t) const;
  [[nodiscard]] Vec2 force(const Vec2& x, double t) const;
};

enum class ScenarioKind : std::uint8_t { Manufactured, Wave };

/// Everything needed to set up a run, before overrides.
struct ScenarioSpec {
  std::string name;
  ScenarioKind kind = ScenarioKind::Manufactured;
  ModelParams params;
  PenaltySpec penalty;
  Family w_family = Family::RT0;
  Rect domain;
  GridPattern pattern = GridPattern::Diagonal;
  int mesh_n = 8;        ///< cells per side on the coarsest level
  int refinements = 3;   ///< additional levels, each halving h
  double t_F = 0.5;
  std::optional<double> dt;  ///< empty: automatic choice
  double f0 = 5.0;
  double t0 = 0.6;
  std::vector<double> snapshot_times;
};

const std::vector<std::string>& scenario_names();

/// Throws UnknownScenario for names outside scenario_names().
ScenarioSpec scenario(const std::string& name);

/// Structured mesh of the scenario domain with cells_per_side^2 squares.
Mesh scenario_mesh(const ScenarioSpec& spec, int cells_per_side);

/// Loads, boundary and initial data of the scenario on a given mesh.
Problem build_problem(const ScenarioSpec& spec, Mesh mesh);

}  // namespace poromix
