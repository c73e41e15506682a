#include "poromix/postproc.hpp"

#include "poromix/errors.hpp"
#include "poromix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace poromix {

namespace {

struct Squares {
  double u = 0, w = 0, sigma = 0, dev_sigma = 0, p = 0, div_sigma = 0, div_w = 0, skw = 0, sigma_h = 0;
};

// Sum of coefficient * basis over one cell, value and divergence.
FieldValue combine(const Eigen::VectorXd& x, const DofMap& map, int c, const BasisValues& b) {
  FieldValue v;
  const auto dofs = map.cell(c);
  for (int j = 0; j < map.n_local; ++j) {
    const double a = x(map.offset + dofs[j].index);
    v.value += a * b.value[j];
    v.div += a * b.div[j];
  }
  return v;
}

Squares integrate(const Eigen::VectorXd& x, double t, const ExactFields* exact, const Mesh& mesh,
                  const FieldSpaces& s) {
  const QuadratureRule& q = quadrature(kErrorQuadrature);
  const BasisTable ts = tabulate(s.sigma.element(), q.points);
  const BasisTable tp = tabulate(s.p.element(), q.points);
  const BasisTable tu = tabulate(s.u.element(), q.points);
  const BasisTable tw = tabulate(s.w.element(), q.points);
  std::vector<Squares> cells(mesh.num_cells());
  parallel_for(mesh.num_cells(), [&](int c) {
    const CellGeometry geom = cell_geometry(mesh, c);
    Squares sq;
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const double wq = q.weights[k] * std::abs(geom.detJ);
      const Vec2 xp = geom.map(q.points[k]);
      const FieldValue sig = combine(x, s.sigma, c, cell_basis(s.sigma, c, geom, ts.at_point[k]));
      const Mat2 sh = as_tensor(sig.value);
      const Mat2 ss = skw(sh);
      sq.skw += wq * frobenius(ss, ss);
      sq.sigma_h += wq * frobenius(sh, sh);
      if (!exact) continue;
      const FieldValue ph = combine(x, s.p, c, cell_basis(s.p, c, geom, tp.at_point[k]));
      const FieldValue uh = combine(x, s.u, c, cell_basis(s.u, c, geom, tu.at_point[k]));
      const FieldValue wh = combine(x, s.w, c, cell_basis(s.w, c, geom, tw.at_point[k]));
      const Mat2 es = sh - (exact->sigma ? exact->sigma(xp, t) : Mat2::Zero());
      const double ep = ph.value(0) - (exact->p ? exact->p(xp, t) : 0.0);
      const Vec2 eu = uh.value.head<2>() - (exact->u ? exact->u(xp, t) : Vec2::Zero());
      const Vec2 ew = wh.value.head<2>() - (exact->w ? exact->w(xp, t) : Vec2::Zero());
      const Vec2 eds = sig.div - (exact->div_sigma ? exact->div_sigma(xp, t) : Vec2::Zero());
      const double edw = wh.div(0) - (exact->div_w ? exact->div_w(xp, t) : 0.0);
      sq.sigma += wq * frobenius(es, es);
      const Mat2 eds_dev = dev(es);
      sq.dev_sigma += wq * frobenius(eds_dev, eds_dev);
      sq.p += wq * ep * ep;
      sq.u += wq * eu.squaredNorm();
      sq.w += wq * ew.squaredNorm();
      sq.div_sigma += wq * eds.squaredNorm();
      sq.div_w += wq * edw * edw;
    }
    cells[c] = sq;
  });
  Squares total;
  for (const Squares& c : cells) {
    total.u += c.u;
    total.w += c.w;
    total.sigma += c.sigma;
    total.dev_sigma += c.dev_sigma;
    total.p += c.p;
    total.div_sigma += c.div_sigma;
    total.div_w += c.div_w;
    total.skw += c.skw;
    total.sigma_h += c.sigma_h;
  }
  return total;
}

double safe_ratio(double num, double den) {
  return std::sqrt(num) / std::max(std::sqrt(den), std::numeric_limits<double>::min());
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

ErrorReport error_norms(const Eigen::VectorXd& x, double t, const ExactFields& exact, const Mesh& mesh,
                        const FieldSpaces& spaces) {
  const Squares sq = integrate(x, t, &exact, mesh, spaces);
  const double dx = mesh.extent.x1 - mesh.extent.x0, dy = mesh.extent.y1 - mesh.extent.y0;
  const double h_omega2 = dx * dx + dy * dy;
  ErrorReport r;
  r.l2_u = std::sqrt(sq.u);
  r.l2_w = std::sqrt(sq.w);
  r.l2_sigma = std::sqrt(sq.sigma);
  r.l2_dev_sigma = std::sqrt(sq.dev_sigma);
  r.l2_p = std::sqrt(sq.p);
  r.l2_div_sigma = std::sqrt(sq.div_sigma);
  r.l2_div_w = std::sqrt(sq.div_w);
  r.hdiv_sigma = std::sqrt(sq.sigma + h_omega2 * sq.div_sigma);
  r.hdiv_w = std::sqrt(sq.w + h_omega2 * sq.div_w);
  r.hdiv_sigma_unw = std::sqrt(sq.sigma + sq.div_sigma);
  r.hdiv_w_unw = std::sqrt(sq.w + sq.div_w);
  r.skw_ratio = safe_ratio(sq.skw, sq.sigma_h);
  return r;
}

double skw_diagnostic(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& spaces) {
  const Squares sq = integrate(x, 0.0, nullptr, mesh, spaces);
  return safe_ratio(sq.skw, sq.sigma_h);
}

std::vector<double> eoc(const std::vector<double>& h, const std::vector<double>& errors) {
  if (h.size() != errors.size()) throw Error(ErrorCode::InvalidValue, "eoc: size mismatch");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0)) {
      throw Error(ErrorCode::InvalidValue, "eoc: errors must be strictly positive");
    }
    if (h[i] == h[i + 1] || !(h[i] > 0.0) || !(h[i + 1] > 0.0)) {
      throw Error(ErrorCode::DegenerateRatio, "eoc: consecutive mesh sizes must differ");
    }
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(h[i] / h[i + 1]));
  }
  return out;
}

CellFields cell_fields(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& s) {
  const int nc = mesh.num_cells();
  CellFields out;
  out.velocity_magnitude.resize(nc);
  out.velocity_y.resize(nc);
  out.pressure.resize(nc);
  out.skw_sigma.resize(nc);
  out.dev_sigma.resize(nc);
  const Vec2 centroid_ref(1.0 / 3.0, 1.0 / 3.0);
  const BasisValues rs = eval_basis(s.sigma.element(), centroid_ref);
  const BasisValues rp = eval_basis(s.p.element(), centroid_ref);
  const BasisValues ru = eval_basis(s.u.element(), centroid_ref);
  parallel_for(nc, [&](int c) {
    const CellGeometry geom = cell_geometry(mesh, c);
    const Vec2 u = combine(x, s.u, c, cell_basis(s.u, c, geom, ru)).value.head<2>();
    const Mat2 sig = as_tensor(combine(x, s.sigma, c, cell_basis(s.sigma, c, geom, rs)).value);
    out.velocity_magnitude[c] = u.norm();
    out.velocity_y[c] = u.y();
    out.pressure[c] = combine(x, s.p, c, cell_basis(s.p, c, geom, rp)).value(0);
    out.skw_sigma[c] = skw(sig).norm();
    out.dev_sigma[c] = dev(sig).norm();
  });
  return out;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  const Rect& r = mesh.extent;
  nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells()) / 2.0)));
  x0_ = r.x0;
  y0_ = r.y0;
  dx_ = (r.x1 - r.x0) / nb_;
  dy_ = (r.y1 - r.y0) / nb_;
  buckets_.assign(static_cast<std::size_t>(nb_) * nb_, {});
  auto clamp = [this](double v) { return std::clamp(static_cast<int>(std::floor(v)), 0, nb_ - 1); };
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (int v : mesh.cells[c]) {
      lo_x = std::min(lo_x, mesh.vertices[v].x());
      hi_x = std::max(hi_x, mesh.vertices[v].x());
      lo_y = std::min(lo_y, mesh.vertices[v].y());
      hi_y = std::max(hi_y, mesh.vertices[v].y());
    }
    for (int j = clamp((lo_y - y0_) / dy_); j <= clamp((hi_y - y0_) / dy_); ++j) {
      for (int i = clamp((lo_x - x0_) / dx_); i <= clamp((hi_x - x0_) / dx_); ++i) {
        buckets_[static_cast<std::size_t>(j) * nb_ + i].push_back(c);
      }
    }
  }
}

int CellLocator::find(const Vec2& x) const {
  const int i = static_cast<int>(std::floor((x.x() - x0_) / dx_));
  const int j = static_cast<int>(std::floor((x.y() - y0_) / dy_));
  if (i < -1 || j < -1 || i > nb_ || j > nb_) return -1;
  const auto& bucket =
      buckets_[static_cast<std::size_t>(std::clamp(j, 0, nb_ - 1)) * nb_ + std::clamp(i, 0, nb_ - 1)];
  int best = -1;
  double best_min = -1e300;
  for (int c : bucket) {
    const Vec2& a = mesh_->vertices[mesh_->cells[c][0]];
    const Vec2& b = mesh_->vertices[mesh_->cells[c][1]];
    const Vec2& d = mesh_->vertices[mesh_->cells[c][2]];
    Mat2 J;
    J << b - a, d - a;
    const Vec2 xi = J.inverse() * (x - a);
    const double lam = std::min({1.0 - xi.x() - xi.y(), xi.x(), xi.y()});
    if (lam > best_min) {
      best_min = lam;
      best = c;
    }
  }
  return best_min >= -1e-10 ? best : -1;
}

ReflectionDefect reflection_defect(const Mesh& mesh, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != mesh.num_cells()) {
    throw Error(ErrorCode::InvalidValue, "reflection_defect: one value per cell expected");
  }
  const CellLocator loc(mesh);
  const Rect& r = mesh.extent;
  double peak = 0.0, lr = 0.0, ud = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 x = mesh.centroid(c);
    const int c_lr = loc.find({r.x0 + r.x1 - x.x(), x.y()});
    const int c_ud = loc.find({x.x(), r.y0 + r.y1 - x.y()});
    if (c_lr < 0 || c_ud < 0) throw Error(ErrorCode::OutOfElement, "reflection_defect: mirror point lost");
    lr = std::max(lr, std::abs(f[c] - f[c_lr]));
    ud = std::max(ud, std::abs(f[c] - f[c_ud]));
  }
  if (peak == 0.0) return {};
  return {lr / peak, ud / peak};
}

double boundary_ratio(const Mesh& mesh, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != mesh.num_cells()) {
    throw Error(ErrorCode::InvalidValue, "boundary_ratio: one value per cell expected");
  }
  std::vector<char> on_boundary(mesh.num_vertices(), 0);
  for (int e : mesh.boundary_edges()) {
    on_boundary[mesh.edges[e][0]] = 1;
    on_boundary[mesh.edges[e][1]] = 1;
  }
  double peak = 0.0, edge = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double v = std::abs(f[c]);
    peak = std::max(peak, v);
    const auto& cell = mesh.cells[c];
    if (on_boundary[cell[0]] || on_boundary[cell[1]] || on_boundary[cell[2]]) edge = std::max(edge, v);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

const std::vector<std::string>& error_csv_columns() {
  static const std::vector<std::string> cols{
      "scenario",   "level",      "one_over_h", "tau",          "ndofs",        "l2_u",
      "l2_w",       "l2_sigma",   "l2_p",       "hdiv_sigma",   "hdiv_w",       "skw_ratio",
      "energy_final", "walltime_s", "hdiv_sigma_unw", "hdiv_w_unw", "l2_dev_sigma"};
  return cols;
}

void write_error_csv(const std::filesystem::path& path, const std::vector<ErrorReport>& rows) {
  std::ofstream out = open_output(path);
  const auto& cols = error_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const ErrorReport& r : rows) {
    out << r.scenario << ',' << r.level << ',' << r.one_over_h << ',' << r.tau << ',' << r.ndofs << ','
        << r.l2_u << ',' << r.l2_w << ',' << r.l2_sigma << ',' << r.l2_p << ',' << r.hdiv_sigma << ','
        << r.hdiv_w << ',' << r.skw_ratio << ',' << r.energy_final << ',' << r.walltime_s << ','
        << r.hdiv_sigma_unw << ',' << r.hdiv_w_unw << ',' << r.l2_dev_sigma << '\n';
  }
  close_output(out, path);
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyRecord>& trace) {
  std::ofstream out = open_output(path);
  out << "t,E_total,E_dev,E_skw,E_kinetic,E_pressure,dissipation_increment\n";
  for (const EnergyRecord& r : trace) {
    out << r.t << ',' << r.parts.total() << ',' << r.parts.dev << ',' << r.parts.skw << ','
        << r.parts.kinetic << ',' << r.parts.pressure << ',' << r.dissipation << '\n';
  }
  close_output(out, path);
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const FieldSpaces& spaces,
               const Eigen::VectorXd& x, double t) {
  const CellFields f = cell_fields(x, mesh, spaces);
  std::ofstream out = open_output(path);
  const int nc = mesh.num_cells();
  out << "# vtk DataFile Version 2.0\n";
  out << "poromix snapshot t=" << t << '\n';
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const auto& c : mesh.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) out << "5\n";
  out << "CELL_DATA " << nc << '\n';
  auto scalars = [&](const char* name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double a : v) out << a << '\n';
  };
  scalars("velocity_magnitude", f.velocity_magnitude);
  scalars("velocity_y", f.velocity_y);
  scalars("pressure", f.pressure);
  scalars("skw_sigma", f.skw_sigma);
  scalars("dev_sigma", f.dev_sigma);
  close_output(out, path);
}

}  // namespace poromix
