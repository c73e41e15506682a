#include "poromix/elements.hpp"

#include "poromix/errors.hpp"

#include <array>
#include <cmath>

namespace poromix {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::RT0: return "RT0";
    case Family::BDM1: return "BDM1";
    case Family::TensorBDM1: return "TensorBDM1";
    case Family::DG0Scalar: return "DG0scalar";
    case Family::DG0Vector: return "DG0vector";
    case Family::DG1Scalar: return "DG1scalar";
    case Family::DG1Vector: return "DG1vector";
  }
  return "unknown";
}

namespace {

const std::array<Vec2, 3> kRefVertices{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

// ---------------------------------------------------------------------------
// Quadrature tables

void add_orbit_centroid(QuadratureRule& q, double w) {
  q.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  q.weights.push_back(w);
}

// Barycentric orbit (a, b, b) with b = (1-a)/2.
void add_orbit_3(QuadratureRule& q, double a, double w) {
  const double b = 0.5 * (1.0 - a);
  q.points.emplace_back(b, b);
  q.points.emplace_back(a, b);
  q.points.emplace_back(b, a);
  for (int i = 0; i < 3; ++i) q.weights.push_back(w);
}

// Barycentric orbit (a, b, c), all distinct.
void add_orbit_6(QuadratureRule& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c},
                                                    {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& l : perms) {
    q.points.emplace_back(l[1], l[2]);
    q.weights.push_back(w);
  }
}

QuadratureRule make_rule(int degree) {
  QuadratureRule q;
  q.degree = degree;
  // Dunavant rules, weights normalised to unit area then halved below.
  switch (degree) {
    case 1:
      add_orbit_centroid(q, 1.0);
      break;
    case 2:
      add_orbit_3(q, 2.0 / 3.0, 1.0 / 3.0);
      break;
    case 3:
    case 4:
      add_orbit_3(q, 0.108103018168070, 0.223381589678011);
      add_orbit_3(q, 0.816847572980459, 0.109951743655322);
      break;
    case 5:
      add_orbit_centroid(q, 0.225);
      add_orbit_3(q, 0.059715871789770, 0.132394152788506);
      add_orbit_3(q, 0.797426985353087, 0.125939180544827);
      break;
    case 6:
      add_orbit_3(q, 0.501426509658179, 0.116786275726379);
      add_orbit_3(q, 0.873821971016996, 0.050844906370207);
      add_orbit_6(q, 0.053145049844817, 0.310352451033784, 0.082851075618374);
      break;
    default:
      throw Error(ErrorCode::UnsupportedDegree,
                  "quadrature degree " + std::to_string(degree) + " not in [1, 6]");
  }
  for (double& w : q.weights) w *= 0.5;
  return q;
}

LineRule make_line_rule(int n) {
  // Golub-Welsch on the Legendre Jacobi matrix, mapped to [0,1].
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k, k - 1) = T(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
  LineRule r;
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    r.points.push_back(0.5 * (eig.eigenvalues()(i) + 1.0));
    r.weights.push_back(v0 * v0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Primal polynomial sets for the H(div) families

struct PrimalValue {
  Vec2 v;
  double div;
};

std::vector<PrimalValue> primal_rt0(const Vec2& p) {
  return {{Vec2(1, 0), 0.0}, {Vec2(0, 1), 0.0}, {Vec2(p.x(), p.y()), 2.0}};
}

std::vector<PrimalValue> primal_bdm1(const Vec2& p) {
  return {{Vec2(1, 0), 0.0},       {Vec2(p.x(), 0), 1.0}, {Vec2(p.y(), 0), 0.0},
          {Vec2(0, 1), 0.0},       {Vec2(0, p.x()), 0.0}, {Vec2(0, p.y()), 1.0}};
}

double edge_weight(int moment, double s) { return moment == 0 ? 1.0 : 2.0 * s - 1.0; }

struct EdgeFrame {
  Vec2 a, t, n;
  double length;
};

EdgeFrame reference_edge(int i) {
  EdgeFrame f;
  f.a = kRefVertices[(i + 1) % 3];
  f.t = kRefVertices[(i + 2) % 3] - f.a;
  f.length = f.t.norm();
  f.n = Vec2(f.t.y(), -f.t.x()) / f.length;
  return f;
}

// Coefficients of the dual basis in the primal set: phi_j = sum_m P_m C(m, j).
template <typename Primal>
Eigen::MatrixXd dual_coefficients(Primal primal, int n_edge_moments) {
  const int n = 3 * n_edge_moments;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const LineRule& line = gauss_line(3);
  for (int i = 0; i < 3; ++i) {
    const EdgeFrame e = reference_edge(i);
    for (int k = 0; k < n_edge_moments; ++k) {
      const int row = n_edge_moments * i + k;
      for (std::size_t g = 0; g < line.points.size(); ++g) {
        const double s = line.points[g];
        const auto vals = primal(e.a + s * e.t);
        for (int j = 0; j < n; ++j) {
          D(row, j) += line.weights[g] * e.length * vals[j].v.dot(e.n) * edge_weight(k, s);
        }
      }
    }
  }
  return D.inverse();
}

const Eigen::MatrixXd& rt0_coefficients() {
  static const Eigen::MatrixXd C = dual_coefficients(primal_rt0, 1);
  return C;
}

const Eigen::MatrixXd& bdm1_coefficients() {
  static const Eigen::MatrixXd C = dual_coefficients(primal_bdm1, 2);
  return C;
}

template <typename Primal>
void hdiv_values(Primal primal, const Eigen::MatrixXd& C, const Vec2& p,
                 std::vector<Vec2>& v, std::vector<double>& div) {
  const auto vals = primal(p);
  const int n = static_cast<int>(C.cols());
  v.assign(n, Vec2::Zero());
  div.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      v[j] += C(m, j) * vals[m].v;
      div[j] += C(m, j) * vals[m].div;
    }
  }
}

ReferenceElement make_element(Family family) {
  ReferenceElement e;
  e.family = family;
  switch (family) {
    case Family::RT0:
      e.n_dofs = 3;
      e.n_components = 2;
      e.hdiv = true;
      for (int i = 0; i < 3; ++i) e.dofs.push_back({DofKind::EdgeMoment, i, 0, 0});
      break;
    case Family::BDM1:
      e.n_dofs = 6;
      e.n_components = 2;
      e.hdiv = true;
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) e.dofs.push_back({DofKind::EdgeMoment, i, k, 0});
      }
      break;
    case Family::TensorBDM1:
      e.n_dofs = 12;
      e.n_components = 4;
      e.hdiv = true;
      for (int r = 0; r < 2; ++r) {
        for (int i = 0; i < 3; ++i) {
          for (int k = 0; k < 2; ++k) e.dofs.push_back({DofKind::EdgeMoment, i, k, r});
        }
      }
      break;
    case Family::DG0Scalar:
      e.n_dofs = 1;
      e.dofs.push_back({DofKind::CellMoment, -1, 0, 0});
      break;
    case Family::DG0Vector:
      e.n_dofs = 2;
      e.n_components = 2;
      for (int c = 0; c < 2; ++c) e.dofs.push_back({DofKind::CellMoment, -1, 0, c});
      break;
    case Family::DG1Scalar:
      e.n_dofs = 3;
      for (int i = 0; i < 3; ++i) e.dofs.push_back({DofKind::CellMoment, -1, i, 0});
      break;
    case Family::DG1Vector:
      e.n_dofs = 6;
      e.n_components = 2;
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 3; ++i) e.dofs.push_back({DofKind::CellMoment, -1, i, c});
      }
      break;
  }
  return e;
}

}  // namespace

const ReferenceElement& reference_element(Family family) {
  static const std::array<ReferenceElement, 7> elements{
      make_element(Family::RT0),        make_element(Family::BDM1),
      make_element(Family::TensorBDM1), make_element(Family::DG0Scalar),
      make_element(Family::DG0Vector),  make_element(Family::DG1Scalar),
      make_element(Family::DG1Vector)};
  return elements[static_cast<std::size_t>(family)];
}

const QuadratureRule& quadrature(int degree) {
  if (degree < 1 || degree > 6) {
    throw Error(ErrorCode::UnsupportedDegree,
                "quadrature degree " + std::to_string(degree) + " not in [1, 6]");
  }
  static const std::array<QuadratureRule, 6> rules{make_rule(1), make_rule(2), make_rule(3),
                                                   make_rule(4), make_rule(5), make_rule(6)};
  return rules[degree - 1];
}

const LineRule& gauss_line(int n_points) {
  if (n_points < 1 || n_points > 5) {
    throw Error(ErrorCode::UnsupportedDegree, "line rule supports 1..5 points");
  }
  static const std::array<LineRule, 5> rules{make_line_rule(1), make_line_rule(2),
                                             make_line_rule(3), make_line_rule(4),
                                             make_line_rule(5)};
  return rules[n_points - 1];
}

Vec2 reference_edge_point(int edge, double s) {
  const Vec2& a = kRefVertices[(edge + 1) % 3];
  const Vec2& b = kRefVertices[(edge + 2) % 3];
  return a + s * (b - a);
}

BasisValues eval_basis(const ReferenceElement& elem, const Vec2& point) {
  constexpr double tol = 1e-12;
  if (point.x() < -tol || point.y() < -tol || point.x() + point.y() > 1.0 + tol ||
      !point.allFinite()) {
    throw Error(ErrorCode::OutOfElement, "point outside the reference triangle");
  }
  BasisValues out;
  out.value.assign(elem.n_dofs, Eigen::Vector4d::Zero());
  out.div.assign(elem.n_dofs, Eigen::Vector2d::Zero());
  const double l0 = 1.0 - point.x() - point.y();
  const std::array<double, 3> bary{l0, point.x(), point.y()};

  std::vector<Vec2> v;
  std::vector<double> div;
  switch (elem.family) {
    case Family::RT0:
    case Family::BDM1: {
      if (elem.family == Family::RT0) {
        hdiv_values(primal_rt0, rt0_coefficients(), point, v, div);
      } else {
        hdiv_values(primal_bdm1, bdm1_coefficients(), point, v, div);
      }
      for (int j = 0; j < elem.n_dofs; ++j) {
        out.value[j].head<2>() = v[j];
        out.div[j](0) = div[j];
      }
      break;
    }
    case Family::TensorBDM1: {
      hdiv_values(primal_bdm1, bdm1_coefficients(), point, v, div);
      for (int r = 0; r < 2; ++r) {
        for (int m = 0; m < 6; ++m) {
          const int j = 6 * r + m;
          out.value[j](2 * r) = v[m].x();
          out.value[j](2 * r + 1) = v[m].y();
          out.div[j](r) = div[m];
        }
      }
      break;
    }
    case Family::DG0Scalar:
      out.value[0](0) = 1.0;
      break;
    case Family::DG0Vector:
      out.value[0](0) = 1.0;
      out.value[1](1) = 1.0;
      break;
    case Family::DG1Scalar:
      for (int i = 0; i < 3; ++i) out.value[i](0) = bary[i];
      break;
    case Family::DG1Vector:
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 3; ++i) out.value[3 * c + i](c) = bary[i];
      }
      break;
  }
  return out;
}

Eigen::MatrixXd dof_matrix(const ReferenceElement& elem) {
  const int n = elem.n_dofs;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const LineRule& line = gauss_line(3);
  const QuadratureRule& q = quadrature(2);
  for (int i = 0; i < n; ++i) {
    const DofInfo& dof = elem.dofs[i];
    if (dof.kind == DofKind::EdgeMoment) {
      const EdgeFrame e = reference_edge(dof.edge);
      for (std::size_t g = 0; g < line.points.size(); ++g) {
        const double s = line.points[g];
        const BasisValues b = eval_basis(elem, e.a + s * e.t);
        const double w = line.weights[g] * e.length * edge_weight(dof.moment, s);
        for (int j = 0; j < n; ++j) {
          const Vec2 row(b.value[j](2 * dof.row), b.value[j](2 * dof.row + 1));
          D(i, j) += w * row.dot(e.n);
        }
      }
    } else if (elem.family == Family::DG1Scalar || elem.family == Family::DG1Vector) {
      const BasisValues b = eval_basis(elem, kRefVertices[dof.moment]);
      for (int j = 0; j < n; ++j) D(i, j) = b.value[j](dof.row);
    } else {
      for (std::size_t g = 0; g < q.points.size(); ++g) {
        const BasisValues b = eval_basis(elem, q.points[g]);
        for (int j = 0; j < n; ++j) D(i, j) += q.weights[g] / 0.5 * b.value[j](dof.row);
      }
    }
  }
  return D;
}

CellGeometry CellGeometry::from_vertices(const Vec2& a, const Vec2& b, const Vec2& c) {
  CellGeometry g;
  g.x0 = a;
  g.J.col(0) = b - a;
  g.J.col(1) = c - a;
  g.detJ = g.J.determinant();
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
  if (!(std::abs(g.detJ) > 1e-14 * scale)) {
    throw Error(ErrorCode::DegenerateCell, "affine map has vanishing Jacobian");
  }
  return g;
}

BasisValues piola_map(const CellGeometry& geom, const ReferenceElement& elem,
                      const BasisValues& reference) {
  if (!elem.hdiv) return reference;
  BasisValues out = reference;
  const double inv_det = 1.0 / geom.detJ;
  const int rows = elem.n_components == 4 ? 2 : 1;
  for (int j = 0; j < elem.n_dofs; ++j) {
    for (int r = 0; r < rows; ++r) {
      const Vec2 ref(reference.value[j](2 * r), reference.value[j](2 * r + 1));
      const Vec2 phys = geom.J * ref * inv_det;
      out.value[j](2 * r) = phys.x();
      out.value[j](2 * r + 1) = phys.y();
    }
    out.div[j] = reference.div[j] * inv_det;
  }
  return out;
}

BasisTable tabulate(const ReferenceElement& elem, const std::vector<Vec2>& points) {
  BasisTable t;
  t.at_point.reserve(points.size());
  for (const auto& p : points) t.at_point.push_back(eval_basis(elem, p));
  return t;
}

}  // namespace poromix
