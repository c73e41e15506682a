#pragma once

#include "poromix/elements.hpp"
#include "poromix/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace poromix {

enum class Field : std::uint8_t { Sigma, Pressure, Velocity, Filtration };

struct GlobalDof {
  int index = 0;  ///< field-local global index
  int sign = 1;
};

/// Degree-of-freedom numbering of one field.
///
/// Edge moments are numbered per edge (TensorBDM1: 4e + 2*row + k, BDM1:
/// 2e + k, RT0: e); cell moments per cell (DG0 vector: 2c + component).
/// A cell's local function equals `sign` times the global one: the zeroth
/// moment flips with the normal orientation, the first moment additionally
/// with the direction of travel along the edge.
struct DofMap {
  Field field = Field::Pressure;
  Family family = Family::DG0Scalar;
  int n_global = 0;
  int n_local = 0;
  int offset = 0;  ///< block position in the unknown vector [sigma, p, u, w]
  std::vector<GlobalDof> cell_dofs;
  std::vector<int> constrained;  ///< essential zero DOFs (field-local indices)

  [[nodiscard]] std::span<const GlobalDof> cell(int c) const {
    return {cell_dofs.data() + static_cast<std::size_t>(c) * n_local,
            static_cast<std::size_t>(n_local)};
  }
  [[nodiscard]] const ReferenceElement& element() const { return reference_element(family); }
};

struct FieldSpaces {
  DofMap sigma, p, u, w;
  int n_total = 0;

  [[nodiscard]] const DofMap& operator[](Field f) const;
  /// Offsets (in the full vector) of every essential zero DOF.
  [[nodiscard]] std::vector<int> constrained_dofs() const;
};

/// Sigma = TensorBDM1, p = DG0, u = DG0 vector, w = RT0 or BDM1. Only the
/// lowest order is implemented; any other degree throws UnsupportedDegree.
FieldSpaces build_dofmaps(const Mesh& mesh, Family w_family, int degree = 0);

/// Coefficient vector plus the displacement accumulated by backward Euler.
struct DiscreteState {
  Eigen::VectorXd x;
  Eigen::VectorXd d_acc;  ///< u-block layout
  double t = 0.0;

  static DiscreteState zeros(const FieldSpaces& spaces, double t = 0.0);
  [[nodiscard]] Eigen::VectorXd block(const DofMap& map) const {
    return x.segment(map.offset, map.n_global);
  }
};

/// Physical basis of one field on one cell, signs included.
BasisValues cell_basis(const DofMap& map, int cell, const CellGeometry& geom,
                       const BasisValues& reference);

CellGeometry cell_geometry(const Mesh& mesh, int cell);

/// Flattened components: scalar [0], vector [0..1], tensor row-major [0..3].
using ComponentField = std::function<Eigen::Vector4d(const Vec2& x)>;

ComponentField as_components(const std::function<double(const Vec2&)>& f);
ComponentField as_components(const std::function<Vec2(const Vec2&)>& f);
ComponentField as_components(const std::function<Mat2(const Vec2&)>& f);

/// Global L2 projection onto the field's space (essential DOFs held at 0).
Eigen::VectorXd project_L2(const ComponentField& f, const DofMap& map, const Mesh& mesh,
                           int quad_degree = 6);

struct FieldValue {
  Eigen::Vector4d value = Eigen::Vector4d::Zero();
  Eigen::Vector2d div = Eigen::Vector2d::Zero();
};

/// Evaluates the field with coefficients `coeffs` (field block only) at the
/// physical point x of cell `cell`; throws OutOfElement if x is outside it.
FieldValue evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const DofMap& map,
                    const Mesh& mesh, int cell, const Vec2& x);

/// Same, at a reference point of the cell.
FieldValue evaluate_reference(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const DofMap& map,
                              const Mesh& mesh, int cell, const Vec2& xi);

inline Mat2 as_tensor(const Eigen::Vector4d& v) {
  Mat2 m;
  m << v(0), v(1), v(2), v(3);
  return m;
}
inline Eigen::Vector4d flatten(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

}  // namespace poromix
