#include "poromix/model.hpp"

#include "poromix/errors.hpp"

#include <cmath>
#include <sstream>

namespace poromix {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPSD: return "NonPSD";
    case ErrorCode::InvalidExtent: return "InvalidExtent";
    case ErrorCode::EmptyEssentialBoundary: return "EmptyEssentialBoundary";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::OutOfElement: return "OutOfElement";
    case ErrorCode::DegenerateCell: return "DegenerateCell";
    case ErrorCode::SingularLocalMass: return "SingularLocalMass";
    case ErrorCode::AssemblyOverflow: return "AssemblyOverflow";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::DegenerateRatio: return "DegenerateRatio";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
  }
  return "Unknown";
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidValue, what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<std::string> ModelParams::validate() const {
  require(finite(mu) && mu > 0.0, "mu must be positive");
  require(finite(lambda) && lambda >= 0.0, "lambda must be non-negative");
  require(finite(s0) && s0 >= 0.0, "s0 must be non-negative");
  require(finite(alpha), "alpha must be finite");
  require(finite(rho_u) && rho_u >= 0.0, "rho_u must be non-negative");
  require(finite(rho_f) && rho_f >= 0.0, "rho_f must be non-negative");
  require(finite(rho_w) && rho_w >= 0.0, "rho_w must be non-negative");
  require(K.allFinite(), "K must be finite");
  require(std::abs(K(0, 1) - K(1, 0)) <= 1e-14 * K.norm(), "K must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> eig(K);
  require(eig.eigenvalues()(0) > 0.0, "K must be positive definite");

  if (rho_u * rho_w - rho_f * rho_f < -1e-14 * (rho_u * rho_w + rho_f * rho_f)) {
    throw Error(ErrorCode::NonPSD, "density matrix R1 is indefinite (rho_u*rho_w < rho_f^2)");
  }

  std::vector<std::string> warnings;
  if (phi) {
    require(*phi > 0.0 && *phi < 1.0, "phi must lie in (0,1)");
    if (alpha <= *phi || alpha > 1.0) {
      warnings.emplace_back("Biot-Willis coefficient alpha outside (phi, 1]");
    }
    const double implied_rho_s = (rho_u - *phi * rho_f) / (1.0 - *phi);
    if (implied_rho_s <= 0.0) {
      std::ostringstream msg;
      msg << "rho_u = phi*rho_f + (1-phi)*rho_s implies non-positive rho_s = " << implied_rho_s;
      warnings.push_back(msg.str());
    }
    if (nu_tort) {
      require(*nu_tort > 1.0, "tortuosity must exceed 1");
      const double expected = rho_f * *nu_tort / *phi;
      if (std::abs(expected - rho_w) > 1e-8 * std::max(1.0, std::abs(rho_w))) {
        std::ostringstream msg;
        msg << "rho_w = " << rho_w << " differs from rho_f*nu/phi = " << expected;
        warnings.push_back(msg.str());
      }
    }
  }
  return warnings;
}

Mat2 ModelParams::K_inverse() const {
  const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
  Mat2 inv;
  inv << K(1, 1), -K(0, 1), -K(1, 0), K(0, 0);
  return inv / det;
}

InteractionMatrices build_interaction_matrices(const ModelParams& params) {
  params.validate();
  const double d = kDim;
  const double kappa = params.kappa();
  InteractionMatrices out;
  out.R1 << params.rho_u, params.rho_f, params.rho_f, params.rho_w;
  // Written entrywise so that every entry stays bounded as kappa grows.
  out.R2 << 1.0 / (d * d * kappa), params.alpha / (d * kappa),
      params.alpha / (d * kappa), params.s0 + params.alpha * params.alpha / kappa;

  for (const Mat2* m : {&out.R1, &out.R2}) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(*m);
    const double scale = std::max(1.0, m->cwiseAbs().maxCoeff());
    if (eig.eigenvalues()(0) < -1e-12 * scale) {
      throw Error(ErrorCode::NonPSD, m == &out.R1 ? "R1 has a negative eigenvalue"
                                                  : "R2 has a negative eigenvalue");
    }
  }
  return out;
}

void PenaltySpec::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0, "penalty gamma must be positive");
  require(r >= 1, "penalty exponent r must be at least 1");
}

double PenaltySpec::eps(double h_T) const { return gamma * std::pow(h_T, r); }

TensorParts tensor_ops(const Mat2& tau) {
  return TensorParts{trace(tau), dev(tau), skw(tau)};
}

Mat2 stiffness_apply(const ModelParams& params, const Mat2& tau) {
  return 2.0 * params.mu * dev(tau) + params.kappa() * trace(tau) * Mat2::Identity();
}

Mat2 compliance_apply(const ModelParams& params, const Mat2& tau) {
  return dev(tau) / (2.0 * params.mu) +
         trace(tau) / (kDim * kDim * params.kappa()) * Mat2::Identity();
}

}  // namespace poromix
