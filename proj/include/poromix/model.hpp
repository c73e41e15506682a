#pragma once

// Physical coefficients and the pointwise tensor calculus shared by every
// other module. Everything here is specialised to two space dimensions.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace poromix {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr int kDim = 2;

/// Material coefficients of the low-frequency Biot system.
///
/// Densities are given in aggregate form (rho_u, rho_f, rho_w). Porosity and
/// tortuosity are optional and only used for a consistency warning.
struct ModelParams {
  double rho_u = 1.0;
  double rho_f = 0.0;
  double rho_w = 0.0;
  Mat2 K = Mat2::Identity();  ///< hydraulic conductivity, SPD
  double mu = 1.0;
  double lambda = 0.0;
  double alpha = 1.0;
  double s0 = 0.0;
  std::optional<double> phi;
  std::optional<double> nu_tort;

  /// Bulk modulus 2*mu/d + lambda.
  [[nodiscard]] double kappa() const { return 2.0 * mu / kDim + lambda; }

  /// Throws Error(InvalidValue) on a violated invariant, Error(NonPSD) if the
  /// density matrix is indefinite. Returns non-fatal consistency warnings.
  std::vector<std::string> validate() const;

  [[nodiscard]] Mat2 K_inverse() const;
};

/// R1 couples the solid and filtration accelerations, R2 the stress trace and
/// pressure rates.
struct InteractionMatrices {
  Mat2 R1;
  Mat2 R2;
};

InteractionMatrices build_interaction_matrices(const ModelParams& params);

/// Per-cell skew penalty eps(T) = gamma * h_T^r.
struct PenaltySpec {
  double gamma = 1.0;
  int r = 2;

  void validate() const;
  [[nodiscard]] double eps(double h_T) const;
};

struct TensorParts {
  double tr = 0.0;
  Mat2 dev = Mat2::Zero();
  Mat2 skw = Mat2::Zero();
};

TensorParts tensor_ops(const Mat2& tau);

[[nodiscard]] inline double trace(const Mat2& t) { return t(0, 0) + t(1, 1); }
[[nodiscard]] inline Mat2 dev(const Mat2& t) {
  return t - (trace(t) / kDim) * Mat2::Identity();
}
[[nodiscard]] inline Mat2 skw(const Mat2& t) { return 0.5 * (t - t.transpose()); }
[[nodiscard]] inline Mat2 sym(const Mat2& t) { return 0.5 * (t + t.transpose()); }
[[nodiscard]] inline double frobenius(const Mat2& a, const Mat2& b) {
  return (a.array() * b.array()).sum();
}

/// Isotropic stiffness C tau = 2 mu dev(tau) + kappa tr(tau) I.
Mat2 stiffness_apply(const ModelParams& params, const Mat2& tau);

/// Compliance A tau = dev(tau)/(2 mu) + tr(tau)/(d^2 kappa) I, the inverse of C.
Mat2 compliance_apply(const ModelParams& params, const Mat2& tau);

using ScalarField = std::function<double(const Vec2& x, double t)>;
using VectorField = std::function<Vec2(const Vec2& x, double t)>;
using TensorField = std::function<Mat2(const Vec2& x, double t)>;

/// Right-hand sides of the first-order system. Empty functions mean zero.
struct LoadFunctions {
  VectorField f;    ///< body force
  VectorField h;    ///< fluid body force
  ScalarField g;    ///< fluid source
  TensorField eta;  ///< tensor source (time derivative of the prestress)
};

/// Natural data enter the load vector; the essential data (traction on
/// Gamma_sigma, normal flux on Gamma_w) must vanish.
struct BoundaryData {
  VectorField u_d;       ///< solid velocity on Gamma_d
  ScalarField p_d;       ///< pressure on Gamma_p
  VectorField traction;  ///< must be zero if set
  ScalarField flux;      ///< must be zero if set
};

struct InitialState {
  TensorField sigma0;
  ScalarField p0;
  VectorField u0;
  VectorField w0;
  VectorField d0;
};

}  // namespace poromix
