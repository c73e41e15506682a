#include "poromix/assembly.hpp"

#include "poromix/errors.hpp"
#include "poromix/parallel.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <cmath>

namespace poromix {

namespace {

// Cell-local ordering [sigma | p | u | w], mirroring the global block order.
struct LocalLayout {
  std::array<const DofMap*, 4> maps{};
  std::array<int, 4> begin{};
  int size = 0;

  explicit LocalLayout(const FieldSpaces& s) : maps{&s.sigma, &s.p, &s.u, &s.w} {
    for (int f = 0; f < 4; ++f) {
      begin[f] = size;
      size += maps[f]->n_local;
    }
  }

  void global_indices(int cell, std::vector<int>& out) const {
    out.resize(size);
    for (int f = 0; f < 4; ++f) {
      const auto dofs = maps[f]->cell(cell);
      for (int j = 0; j < maps[f]->n_local; ++j) out[begin[f] + j] = maps[f]->offset + dofs[j].index;
    }
  }
};

struct FieldTables {
  std::array<BasisTable, 4> table;
};

FieldTables tabulate_fields(const FieldSpaces& s, const QuadratureRule& q) {
  return FieldTables{{tabulate(s.sigma.element(), q.points), tabulate(s.p.element(), q.points),
                      tabulate(s.u.element(), q.points), tabulate(s.w.element(), q.points)}};
}

struct CellMatrix {
  Eigen::MatrixXd m;
};

void check_finite(const Eigen::MatrixXd& m, int cell) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFiniteEntry, "non-finite local matrix entry in cell " + std::to_string(cell));
  }
}

template <typename LocalKernel>
SpMat assemble_global(const Mesh& mesh, const FieldSpaces& spaces, LocalKernel kernel) {
  const LocalLayout layout(spaces);
  const int nc = mesh.num_cells();
  std::vector<CellMatrix> locals(nc);
  parallel_for(nc, [&](int c) {
    locals[c].m = kernel(c, layout);
    check_finite(locals[c].m, c);
  });

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nc) * layout.size * layout.size / 2);
  std::vector<int> idx;
  for (int c = 0; c < nc; ++c) {
    layout.global_indices(c, idx);
    for (int i = 0; i < layout.size; ++i) {
      if (idx[i] < 0 || idx[i] >= spaces.n_total) {
        throw Error(ErrorCode::AssemblyOverflow, "global index out of range");
      }
      for (int j = 0; j < layout.size; ++j) {
        const double v = locals[c].m(i, j);
        if (v != 0.0) trips.emplace_back(idx[i], idx[j], v);
      }
    }
  }
  SpMat out(spaces.n_total, spaces.n_total);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

Mat2 tensor_of(const Eigen::Vector4d& v) { return as_tensor(v); }

}  // namespace

SpMat assemble_M(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                 const PenaltySpec& penalty, unsigned terms) {
  penalty.validate();
  const InteractionMatrices R = build_interaction_matrices(params);
  const QuadratureRule& q = quadrature(kAssemblyQuadrature);
  const FieldTables tables = tabulate_fields(spaces, q);
  const double c_dev = (terms & kMassDev) ? 1.0 / (2.0 * params.mu) : 0.0;
  const double c_skw = (terms & kMassSkw) ? 1.0 : 0.0;
  const Mat2 R1 = (terms & kMassKinetic) ? R.R1 : Mat2::Zero();
  const Mat2 R2 = (terms & kMassPressure) ? R.R2 : Mat2::Zero();

  return assemble_global(mesh, spaces, [&](int c, const LocalLayout& L) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L.size, L.size);
    const CellGeometry geom = cell_geometry(mesh, c);
    const double inv_eps = c_skw / penalty.eps(mesh.cell_diameter[c]);
    const int ns = spaces.sigma.n_local, nu = spaces.u.n_local, nw = spaces.w.n_local;
    const int bs = L.begin[0], bp = L.begin[1], bu = L.begin[2], bw = L.begin[3];

    std::vector<Mat2> dev_s(ns), skw_s(ns);
    std::vector<double> tr_s(ns);
    for (std::size_t g = 0; g < q.points.size(); ++g) {
      const double wq = q.weights[g] * std::abs(geom.detJ);
      const BasisValues S = cell_basis(spaces.sigma, c, geom, tables.table[0].at_point[g]);
      const BasisValues U = cell_basis(spaces.u, c, geom, tables.table[2].at_point[g]);
      const BasisValues W = cell_basis(spaces.w, c, geom, tables.table[3].at_point[g]);
      const double qv = tables.table[1].at_point[g].value[0](0);
      for (int i = 0; i < ns; ++i) {
        const Mat2 t = tensor_of(S.value[i]);
        dev_s[i] = dev(t);
        skw_s[i] = skw(t);
        tr_s[i] = trace(t);
      }
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) {
          m(bs + i, bs + j) += wq * (c_dev * frobenius(dev_s[i], dev_s[j]) +
                                     inv_eps * frobenius(skw_s[i], skw_s[j]) +
                                     R2(0, 0) * tr_s[i] * tr_s[j]);
        }
        m(bs + i, bp) += wq * R2(0, 1) * tr_s[i] * qv;
        m(bp, bs + i) += wq * R2(1, 0) * qv * tr_s[i];
      }
      m(bp, bp) += wq * R2(1, 1) * qv * qv;

      for (int i = 0; i < nu; ++i) {
        const Vec2 vi = U.value[i].head<2>();
        for (int j = 0; j < nu; ++j) m(bu + i, bu + j) += wq * R1(0, 0) * vi.dot(U.value[j].head<2>());
        for (int j = 0; j < nw; ++j) {
          const double vz = vi.dot(W.value[j].head<2>());
          m(bu + i, bw + j) += wq * R1(0, 1) * vz;
          m(bw + j, bu + i) += wq * R1(1, 0) * vz;
        }
      }
      for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < nw; ++j) {
          m(bw + i, bw + j) += wq * R1(1, 1) * W.value[i].head<2>().dot(W.value[j].head<2>());
        }
      }
    }
    return m;
  });
}

SpMat assemble_A(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params) {
  params.validate();
  const QuadratureRule& q = quadrature(kAssemblyQuadrature);
  const FieldTables tables = tabulate_fields(spaces, q);
  const Mat2 Kinv = params.K_inverse();

  return assemble_global(mesh, spaces, [&](int c, const LocalLayout& L) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L.size, L.size);
    const CellGeometry geom = cell_geometry(mesh, c);
    const int ns = spaces.sigma.n_local, nu = spaces.u.n_local, nw = spaces.w.n_local;
    const int bs = L.begin[0], bp = L.begin[1], bu = L.begin[2], bw = L.begin[3];
    for (std::size_t g = 0; g < q.points.size(); ++g) {
      const double wq = q.weights[g] * std::abs(geom.detJ);
      const BasisValues S = cell_basis(spaces.sigma, c, geom, tables.table[0].at_point[g]);
      const BasisValues U = cell_basis(spaces.u, c, geom, tables.table[2].at_point[g]);
      const BasisValues W = cell_basis(spaces.w, c, geom, tables.table[3].at_point[g]);
      const double qv = tables.table[1].at_point[g].value[0](0);
      // +(u, div tau) in the sigma rows, -(div sigma, v) in the u rows.
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < nu; ++j) {
          const double v = wq * U.value[j].head<2>().dot(S.div[i]);
          m(bs + i, bu + j) += v;
          m(bu + j, bs + i) -= v;
        }
      }
      // +(div w, q) in the p row, -(p, div z) in the w rows.
      for (int j = 0; j < nw; ++j) {
        const double v = wq * W.div[j](0) * qv;
        m(bp, bw + j) += v;
        m(bw + j, bp) -= v;
      }
      for (int i = 0; i < nw; ++i) {
        const Vec2 zi = W.value[i].head<2>();
        for (int j = 0; j < nw; ++j) m(bw + i, bw + j) += wq * zi.dot(Kinv * W.value[j].head<2>());
      }
    }
    return m;
  });
}

BlockSystem assemble_system(const Mesh& mesh, const FieldSpaces& spaces, const ModelParams& params,
                            const PenaltySpec& penalty) {
  BlockSystem sys;
  sys.M = assemble_M(mesh, spaces, params, penalty);
  sys.A = assemble_A(mesh, spaces, params);
  sys.n_total = spaces.n_total;
  sys.offsets = {spaces.sigma.offset, spaces.p.offset, spaces.u.offset, spaces.w.offset};
  return sys;
}

LoadVector assemble_load(const Mesh& mesh, const FieldSpaces& spaces, const LoadFunctions& loads,
                         const BoundaryData& bc, double t) {
  LoadVector out;
  out.t = t;
  out.b = Eigen::VectorXd::Zero(spaces.n_total);
  const QuadratureRule& q = quadrature(kAssemblyQuadrature);
  const FieldTables tables = tabulate_fields(spaces, q);
  const int ns = spaces.sigma.n_local, nu = spaces.u.n_local, nw = spaces.w.n_local;
  const bool any_volume = loads.f || loads.h || loads.g || loads.eta;

  if (any_volume) {
    const int nc = mesh.num_cells();
    const LocalLayout L(spaces);
    std::vector<Eigen::VectorXd> locals(nc);
    parallel_for(nc, [&](int c) {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(L.size);
      const CellGeometry geom = cell_geometry(mesh, c);
      for (std::size_t g = 0; g < q.points.size(); ++g) {
        const double wq = q.weights[g] * std::abs(geom.detJ);
        const Vec2 x = geom.map(q.points[g]);
        if (loads.eta) {
          const Mat2 eta = loads.eta(x, t);
          const BasisValues S = cell_basis(spaces.sigma, c, geom, tables.table[0].at_point[g]);
          for (int i = 0; i < ns; ++i) b(L.begin[0] + i) += wq * frobenius(eta, tensor_of(S.value[i]));
        }
        if (loads.g) b(L.begin[1]) += wq * loads.g(x, t) * tables.table[1].at_point[g].value[0](0);
        if (loads.f) {
          const Vec2 f = loads.f(x, t);
          const BasisValues U = cell_basis(spaces.u, c, geom, tables.table[2].at_point[g]);
          for (int i = 0; i < nu; ++i) b(L.begin[2] + i) += wq * f.dot(U.value[i].head<2>());
        }
        if (loads.h) {
          const Vec2 h = loads.h(x, t);
          const BasisValues W = cell_basis(spaces.w, c, geom, tables.table[3].at_point[g]);
          for (int i = 0; i < nw; ++i) b(L.begin[3] + i) += wq * h.dot(W.value[i].head<2>());
        }
      }
      locals[c] = std::move(b);
    });
    std::vector<int> idx;
    for (int c = 0; c < nc; ++c) {
      L.global_indices(c, idx);
      for (int i = 0; i < L.size; ++i) out.b(idx[i]) += locals[c](i);
    }
  }

  const LineRule& line = gauss_line(3);
  for (int e : mesh.boundary_edges()) {
    const BoundaryTag& tag = mesh.edge_tags[e];
    const int c = mesh.edge_cells[e][0];
    int local_edge = 0;
    for (int i = 0; i < 3; ++i) {
      if (mesh.cell_edges[c][i].edge == e) local_edge = i;
    }
    const CellGeometry geom = cell_geometry(mesh, c);
    const Vec2 n = mesh.edge_normal(e);
    const double len = mesh.edge_length(e);
    for (std::size_t g = 0; g < line.points.size(); ++g) {
      const Vec2 xi = reference_edge_point(local_edge, line.points[g]);
      const Vec2 x = geom.map(xi);
      const double wl = line.weights[g] * len;
      if (tag.mech == MechanicalTag::Gsigma && bc.traction && bc.traction(x, t).norm() != 0.0) {
        throw Error(ErrorCode::InvalidValue, "non-zero traction on Gamma_sigma is not supported");
      }
      if (tag.flow == FlowTag::Gw && bc.flux && bc.flux(x, t) != 0.0) {
        throw Error(ErrorCode::InvalidValue, "non-zero normal flux on Gamma_w is not supported");
      }
      if (tag.mech == MechanicalTag::Gd && bc.u_d) {
        const Vec2 ud = bc.u_d(x, t);
        const BasisValues S = cell_basis(spaces.sigma, c, geom, eval_basis(spaces.sigma.element(), xi));
        const auto dofs = spaces.sigma.cell(c);
        for (int i = 0; i < ns; ++i) {
          const Vec2 tn = tensor_of(S.value[i]) * n;
          out.b(spaces.sigma.offset + dofs[i].index) += wl * ud.dot(tn);
        }
      }
      if (tag.flow == FlowTag::Gp && bc.p_d) {
        const double pd = bc.p_d(x, t);
        const BasisValues W = cell_basis(spaces.w, c, geom, eval_basis(spaces.w.element(), xi));
        const auto dofs = spaces.w.cell(c);
        for (int i = 0; i < nw; ++i) {
          out.b(spaces.w.offset + dofs[i].index) -= wl * pd * W.value[i].head<2>().dot(n);
        }
      }
    }
  }
  for (int i : spaces.constrained_dofs()) out.b(i) = 0.0;
  if (!out.b.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "non-finite load vector");
  return out;
}

std::vector<double> local_conservation_residual(const Eigen::VectorXd& x_prev,
                                                const Eigen::VectorXd& x_next, double t_next,
                                                const Mesh& mesh, const FieldSpaces& spaces,
                                                const ModelParams& params, const ScalarField& g,
                                                double tau) {
  const QuadratureRule& q = quadrature(kAssemblyQuadrature);
  Eigen::VectorXd g_cell = Eigen::VectorXd::Zero(mesh.num_cells());
  if (g) {
    parallel_for(mesh.num_cells(), [&](int c) {
      const CellGeometry geom = cell_geometry(mesh, c);
      double s = 0.0;
      for (std::size_t k = 0; k < q.points.size(); ++k) {
        s += q.weights[k] * std::abs(geom.detJ) * g(geom.map(q.points[k]), t_next);
      }
      g_cell(c) = s;
    });
  }
  return local_conservation_residual(x_prev, x_next, mesh, spaces, params, g_cell, tau);
}

std::vector<double> local_conservation_residual(const Eigen::VectorXd& x_prev,
                                                const Eigen::VectorXd& x_next, const Mesh& mesh,
                                                const FieldSpaces& spaces, const ModelParams& params,
                                                const Eigen::VectorXd& g_cell, double tau) {
  if (g_cell.size() != mesh.num_cells()) {
    throw Error(ErrorCode::InvalidValue, "one source integral per cell expected");
  }
  const InteractionMatrices R = build_interaction_matrices(params);
  // Trace and divergence are affine on a cell, so the midpoint rule is exact.
  const std::vector<Vec2> centroid{Vec2(1.0 / 3.0, 1.0 / 3.0)};
  const BasisTable sig = tabulate(spaces.sigma.element(), centroid);
  const BasisTable wt = tabulate(spaces.w.element(), centroid);
  const Eigen::VectorXd dx = (x_next - x_prev) / tau;
  std::vector<double> out(mesh.num_cells(), 0.0);
  parallel_for(mesh.num_cells(), [&](int c) {
    const CellGeometry geom = cell_geometry(mesh, c);
    const double area = 0.5 * std::abs(geom.detJ);
    const auto sd = spaces.sigma.cell(c);
    const auto wd = spaces.w.cell(c);
    const int pc = spaces.p.offset + spaces.p.cell(c)[0].index;
    const BasisValues S = cell_basis(spaces.sigma, c, geom, sig.at_point[0]);
    const BasisValues W = cell_basis(spaces.w, c, geom, wt.at_point[0]);
    double tr_rate = 0.0;
    for (int i = 0; i < spaces.sigma.n_local; ++i) {
      tr_rate += dx(spaces.sigma.offset + sd[i].index) * (S.value[i](0) + S.value[i](3));
    }
    double div_w = 0.0;
    for (int i = 0; i < spaces.w.n_local; ++i) div_w += x_next(spaces.w.offset + wd[i].index) * W.div[i](0);
    out[c] = std::abs(area * (R.R2(1, 1) * dx(pc) + R.R2(1, 0) * tr_rate + div_w) - g_cell(c));
  });
  return out;
}

void write_matrix_market(const SpMat& m, const std::filesystem::path& path) {
  if (!Eigen::saveMarket(m, path.string())) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
}

}  // namespace poromix
