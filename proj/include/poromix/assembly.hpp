#pragma once

// Block matrices of the fully discrete system
//
//   (M / tau + A) x^n = (M / tau) x^{n-1} + b^n,   x = [sigma, p, u, w].
//
// M collects every time-derivative term (compliance, skew penalty, R1, R2);
// A holds the divergence couplings, which appear in exact +/- transpose
// pairs, plus the Darcy term (K^{-1} w, z).

#include "poromix/fespace.hpp"
#include "poromix/model.hpp"

#include <Eigen/Sparse>

#include <filesystem>
#include <vector>

namespace poromix {

using SpMat = Eigen::SparseMatrix<double>;

// Degree of the assembly quadrature; overridable at build time to check that
// results do not depend on it.
#ifndef POROMIX_ASSEMBLY_QUADRATURE
#define POROMIX_ASSEMBLY_QUADRATURE 4
#endif
inline constexpr int kAssemblyQuadrature = POROMIX_ASSEMBLY_QUADRATURE;

struct BlockSystem {
  SpMat M;
  SpMat A;
  int n_total = 0;
  std::array<int, 4> offsets{};  ///< sigma, p, u, w
};

/// Terms of M, selectable so that the energy can be split by origin.
enum MassTerm : unsigned {
  kMassDev = 1u,       ///< (dev sigma / (2 mu), dev tau)
  kMassSkw = 2u,       ///< (skw sigma / eps, skw tau)
  kMassKinetic = 4u,   ///< (R1 [u, w], [v, z])
  kMassPressure = 8u,  ///< (R2 [tr sigma, p], [tr tau, q])
  kMassAll = 15u,
};

SpMat assemble_M(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                 const PenaltySpec& penalty, unsigned terms = kMassAll);

SpMat assemble_A(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params);

BlockSystem assemble_system(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                            const PenaltySpec& penalty);

struct LoadVector {
  Eigen::VectorXd b;
  double t = 0.0;
};

/// Volume terms (eta, tau), (g, q), (f, v), (h, z) plus the boundary
/// functionals <u_d, tau n> on Gamma_d and -<p_d, z.n> on Gamma_p.
/// Throws InvalidValue if non-zero traction or flux data is supplied.
LoadVector assemble_load(const Mesh& mesh, const FieldSpaces& spaces, const LoadFunctions& loads,
                         const BoundaryData& bc, double t);

/// Per-cell residual of the discrete mass balance between two consecutive
/// states, integrated over the cell.
std::vector<double> local_conservation_residual(const Eigen::VectorXd& x_prev,
                                                const Eigen::VectorXd& x_next, double t_next,
                                                const Mesh& mesh, const FieldSpaces& spaces,
                                                const ModelParams& params, const ScalarField& g,
                                                double tau);

/// Same, with the cell integrals of g given (for instance the p block of an
/// assembled load vector).
std::vector<double> local_conservation_residual(const Eigen::VectorXd& x_prev,
                                                const Eigen::VectorXd& x_next, const Mesh& mesh,
                                                const FieldSpaces& spaces, const ModelParams& params,
                                                const Eigen::VectorXd& g_cell, double tau);

/// Matrix Market dump for debugging.
void write_matrix_market(const SpMat& m, const std::filesystem::path& path);

}  // namespace poromix
