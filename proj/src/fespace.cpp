#include "poromix/fespace.hpp"

#include "poromix/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>

namespace poromix {

const DofMap& FieldSpaces::operator[](Field f) const {
  switch (f) {
    case Field::Sigma: return sigma;
    case Field::Pressure: return p;
    case Field::Velocity: return u;
    case Field::Filtration: return w;
  }
  return sigma;
}

std::vector<int> FieldSpaces::constrained_dofs() const {
  std::vector<int> out;
  for (const DofMap* m : {&sigma, &p, &u, &w}) {
    for (int i : m->constrained) out.push_back(m->offset + i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Direction sign of local edge i relative to the global lower->higher order.
int travel_sign(const Mesh& mesh, int cell, int i) {
  const auto& v = mesh.cells[cell];
  return v[(i + 1) % 3] < v[(i + 2) % 3] ? 1 : -1;
}

DofMap make_map(const Mesh& mesh, Field field, Family family) {
  DofMap map;
  map.field = field;
  map.family = family;
  const ReferenceElement& elem = reference_element(family);
  map.n_local = elem.n_dofs;
  const int ne = mesh.num_edges();
  const int nc = mesh.num_cells();
  switch (family) {
    case Family::TensorBDM1: map.n_global = 4 * ne; break;
    case Family::BDM1: map.n_global = 2 * ne; break;
    case Family::RT0: map.n_global = ne; break;
    case Family::DG0Scalar: map.n_global = nc; break;
    case Family::DG0Vector: map.n_global = 2 * nc; break;
    default:
      throw Error(ErrorCode::UnsupportedDegree,
                  std::string("family ") + std::string(to_string(family)) + " has no global numbering");
  }
  map.cell_dofs.resize(static_cast<std::size_t>(nc) * map.n_local);
  for (int c = 0; c < nc; ++c) {
    for (int j = 0; j < map.n_local; ++j) {
      const DofInfo& dof = elem.dofs[j];
      GlobalDof g;
      if (dof.kind == DofKind::EdgeMoment) {
        const CellEdge& ref = mesh.cell_edges[c][dof.edge];
        g.sign = ref.sign * (dof.moment == 1 ? travel_sign(mesh, c, dof.edge) : 1);
        switch (family) {
          case Family::TensorBDM1: g.index = 4 * ref.edge + 2 * dof.row + dof.moment; break;
          case Family::BDM1: g.index = 2 * ref.edge + dof.moment; break;
          default: g.index = ref.edge; break;
        }
      } else {
        g.index = family == Family::DG0Vector ? 2 * c + dof.row : c;
      }
      map.cell_dofs[static_cast<std::size_t>(c) * map.n_local + j] = g;
    }
  }
  return map;
}

}  // namespace

FieldSpaces build_dofmaps(const Mesh& mesh, Family w_family, int degree) {
  if (degree != 0) {
    throw Error(ErrorCode::UnsupportedDegree,
                "polynomial degree " + std::to_string(degree) + " is not supported (only l = 0)");
  }
  if (w_family != Family::RT0 && w_family != Family::BDM1) {
    throw Error(ErrorCode::InvalidValue, "filtration space must be RT0 or BDM1");
  }
  FieldSpaces s;
  s.sigma = make_map(mesh, Field::Sigma, Family::TensorBDM1);
  s.p = make_map(mesh, Field::Pressure, Family::DG0Scalar);
  s.u = make_map(mesh, Field::Velocity, Family::DG0Vector);
  s.w = make_map(mesh, Field::Filtration, w_family);
  s.p.offset = s.sigma.n_global;
  s.u.offset = s.p.offset + s.p.n_global;
  s.w.offset = s.u.offset + s.u.n_global;
  s.n_total = s.w.offset + s.w.n_global;

  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary(e)) continue;
    const BoundaryTag& tag = mesh.edge_tags[e];
    if (tag.mech == MechanicalTag::Gsigma) {
      for (int k = 0; k < 4; ++k) s.sigma.constrained.push_back(4 * e + k);
    }
    if (tag.flow == FlowTag::Gw) {
      if (w_family == Family::RT0) {
        s.w.constrained.push_back(e);
      } else {
        s.w.constrained.push_back(2 * e);
        s.w.constrained.push_back(2 * e + 1);
      }
    }
  }
  return s;
}

DiscreteState DiscreteState::zeros(const FieldSpaces& spaces, double t) {
  DiscreteState s;
  s.x = Eigen::VectorXd::Zero(spaces.n_total);
  s.d_acc = Eigen::VectorXd::Zero(spaces.u.n_global);
  s.t = t;
  return s;
}

CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  const auto& v = mesh.cells[cell];
  return CellGeometry::from_vertices(mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]]);
}

BasisValues cell_basis(const DofMap& map, int cell, const CellGeometry& geom,
                       const BasisValues& reference) {
  BasisValues out = piola_map(geom, map.element(), reference);
  const auto dofs = map.cell(cell);
  for (int j = 0; j < map.n_local; ++j) {
    if (dofs[j].sign < 0) {
      out.value[j] = -out.value[j];
      out.div[j] = -out.div[j];
    }
  }
  return out;
}

ComponentField as_components(const std::function<double(const Vec2&)>& f) {
  return [f](const Vec2& x) { return Eigen::Vector4d(f(x), 0, 0, 0); };
}

ComponentField as_components(const std::function<Vec2(const Vec2&)>& f) {
  return [f](const Vec2& x) {
    const Vec2 v = f(x);
    return Eigen::Vector4d(v.x(), v.y(), 0, 0);
  };
}

ComponentField as_components(const std::function<Mat2(const Vec2&)>& f) {
  return [f](const Vec2& x) { return flatten(f(x)); };
}

Eigen::VectorXd project_L2(const ComponentField& f, const DofMap& map, const Mesh& mesh,
                           int quad_degree) {
  const QuadratureRule& q = quadrature(quad_degree);
  const ReferenceElement& elem = map.element();
  const BasisTable table = tabulate(elem, q.points);
  const int nc = elem.n_components;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_cells()) * map.n_local * map.n_local);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(map.n_global);
  std::vector<char> fixed(map.n_global, 0);
  for (int i : map.constrained) fixed[i] = 1;

  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geom = cell_geometry(mesh, c);
    const auto dofs = map.cell(c);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(map.n_local, map.n_local);
    Eigen::VectorXd local_rhs = Eigen::VectorXd::Zero(map.n_local);
    for (std::size_t g = 0; g < q.points.size(); ++g) {
      const BasisValues b = cell_basis(map, c, geom, table.at_point[g]);
      const double w = q.weights[g] * std::abs(geom.detJ);
      const Eigen::Vector4d fv = f(geom.map(q.points[g]));
      for (int i = 0; i < map.n_local; ++i) {
        local_rhs(i) += w * fv.head(nc).dot(b.value[i].head(nc));
        for (int j = 0; j < map.n_local; ++j) {
          local(i, j) += w * b.value[i].head(nc).dot(b.value[j].head(nc));
        }
      }
    }
    for (int i = 0; i < map.n_local; ++i) {
      const int gi = dofs[i].index;
      if (fixed[gi]) continue;
      rhs(gi) += local_rhs(i);
      for (int j = 0; j < map.n_local; ++j) {
        const int gj = dofs[j].index;
        if (fixed[gj]) continue;
        trips.emplace_back(gi, gj, local(i, j));
      }
    }
  }
  for (int i : map.constrained) trips.emplace_back(i, i, 1.0);

  Eigen::SparseMatrix<double> mass(map.n_global, map.n_global);
  mass.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(mass);
  if (solver.info() != Eigen::Success || (solver.vectorD().array() <= 0.0).any()) {
    throw Error(ErrorCode::SingularLocalMass, "mass matrix of field is not positive definite");
  }
  Eigen::VectorXd x = solver.solve(rhs);
  for (int i : map.constrained) x(i) = 0.0;
  return x;
}

FieldValue evaluate_reference(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const DofMap& map,
                              const Mesh& mesh, int cell, const Vec2& xi) {
  const CellGeometry geom = cell_geometry(mesh, cell);
  const BasisValues b = cell_basis(map, cell, geom, eval_basis(map.element(), xi));
  const auto dofs = map.cell(cell);
  FieldValue out;
  for (int j = 0; j < map.n_local; ++j) {
    const double c = coeffs(dofs[j].index);
    out.value += c * b.value[j];
    out.div += c * b.div[j];
  }
  return out;
}

FieldValue evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const DofMap& map,
                    const Mesh& mesh, int cell, const Vec2& x) {
  const CellGeometry geom = cell_geometry(mesh, cell);
  return evaluate_reference(coeffs, map, mesh, cell, geom.inverse_map(x));
}

}  // namespace poromix
