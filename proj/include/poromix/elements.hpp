#pragma once

// Reference-triangle finite elements for the lowest-order mixed spaces.
//
// Reference triangle: vertices (0,0), (1,0), (0,1). Local edge i is opposite
// vertex i and is traversed from vertex (i+1)%3 to (i+2)%3; its outward unit
// normal is the clockwise rotation of that tangent.
//
// H(div) degrees of freedom are normal moments on edges,
//   dof(v) = \int_e v.n q_k ds,  q_0 = 1,  q_1 = 2s - 1,
// with s in [0,1] the arclength fraction along the local edge direction.

#include "poromix/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace poromix {

enum class Family : std::uint8_t {
  RT0,
  BDM1,
  TensorBDM1,  ///< two BDM1 rows, no built-in symmetry
  DG0Scalar,
  DG0Vector,
  DG1Scalar,
  DG1Vector,
};

std::string_view to_string(Family f);

enum class DofKind : std::uint8_t { EdgeMoment, CellMoment };

struct DofInfo {
  DofKind kind = DofKind::CellMoment;
  int edge = -1;    ///< local edge for edge moments
  int moment = 0;   ///< edge polynomial order q_k
  int row = 0;      ///< tensor row (TensorBDM1) or vector component (DG vector)
};

struct ReferenceElement {
  Family family = Family::DG0Scalar;
  int n_dofs = 0;
  int n_components = 1;  ///< 1 scalar, 2 vector, 4 tensor (row-major)
  bool hdiv = false;
  std::vector<DofInfo> dofs;
};

const ReferenceElement& reference_element(Family family);

struct QuadratureRule {
  int degree = 0;
  std::vector<Vec2> points;     ///< reference coordinates
  std::vector<double> weights;  ///< sum to 1/2
};

/// Symmetric Gauss rule exact to `degree` in [1, 6].
const QuadratureRule& quadrature(int degree);

/// Gauss-Legendre rule on [0,1] with n points (1..5); weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& gauss_line(int n_points);

/// Reference-coordinate point on local edge `edge` at fraction s.
Vec2 reference_edge_point(int edge, double s);

/// Values of all local basis functions at one reference point. Components
/// are flattened: scalar -> [0], vector -> [0..1], tensor -> row-major [0..3].
/// `div` holds the divergence of H(div) functions (row-wise for tensors).
struct BasisValues {
  std::vector<Eigen::Vector4d> value;
  std::vector<Eigen::Vector2d> div;
};

/// Throws OutOfElement when the point lies outside the closed triangle.
BasisValues eval_basis(const ReferenceElement& elem, const Vec2& point);

/// Matrix [dof_i(phi_j)] over the reference element; the identity for a
/// correctly dual basis.
Eigen::MatrixXd dof_matrix(const ReferenceElement& elem);

/// Affine map x = x0 + J xi of one triangle.
struct CellGeometry {
  Vec2 x0 = Vec2::Zero();
  Mat2 J = Mat2::Identity();
  double detJ = 1.0;

  /// Throws DegenerateCell when |det J| is below 1e-14 times the cell scale.
  static CellGeometry from_vertices(const Vec2& a, const Vec2& b, const Vec2& c);

  [[nodiscard]] Vec2 map(const Vec2& xi) const { return x0 + J * xi; }
  [[nodiscard]] Vec2 inverse_map(const Vec2& x) const { return J.inverse() * (x - x0); }
};

/// Contravariant Piola transform of reference values to the physical cell.
/// Scalar (DG) values are copied; vector values become J v / det J, tensors
/// are mapped row by row; divergences are divided by det J.
BasisValues piola_map(const CellGeometry& geom, const ReferenceElement& elem,
                      const BasisValues& reference);

/// Reference basis tabulated at the points of a quadrature rule.
struct BasisTable {
  std::vector<BasisValues> at_point;
};
BasisTable tabulate(const ReferenceElement& elem, const std::vector<Vec2>& points);

}  // namespace poromix
