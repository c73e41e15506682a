#include "poromix/mesh.hpp"

#include "poromix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <utility>

namespace poromix {

double Mesh::edge_length(int e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

Vec2 Mesh::edge_midpoint(int e) const {
  return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]);
}

Vec2 Mesh::centroid(int c) const {
  const auto& v = cells[c];
  return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) / 3.0;
}

Vec2 Mesh::edge_normal(int e) const {
  const int c = edge_cells[e][0];
  const auto& v = cells[c];
  for (int i = 0; i < 3; ++i) {
    if (cell_edges[c][i].edge != e) continue;
    const Vec2 t = vertices[v[(i + 2) % 3]] - vertices[v[(i + 1) % 3]];
    return Vec2(t.y(), -t.x()).normalized();
  }
  return Vec2::Zero();
}

std::vector<int> Mesh::boundary_edges() const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (is_boundary(e)) out.push_back(e);
  }
  return out;
}

Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  const int nv = mesh.num_vertices();
  const int nc = mesh.num_cells();

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  if (nv > 0) {
    xmin = xmax = mesh.vertices[0].x();
    ymin = ymax = mesh.vertices[0].y();
  }
  for (const auto& p : mesh.vertices) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  mesh.extent = Rect{xmin, ymin, xmax, ymax};

  mesh.cell_area.resize(nc);
  mesh.cell_diameter.resize(nc);
  for (int c = 0; c < nc; ++c) {
    auto& v = mesh.cells[c];
    for (int idx : v) {
      if (idx < 0 || idx >= nv) throw Error(ErrorCode::InvalidValue, "cell vertex out of range");
    }
    const Vec2 a = mesh.vertices[v[1]] - mesh.vertices[v[0]];
    const Vec2 b = mesh.vertices[v[2]] - mesh.vertices[v[0]];
    double twice_area = a.x() * b.y() - a.y() * b.x();
    const double scale = std::max({a.squaredNorm(), b.squaredNorm(), (b - a).squaredNorm()});
    if (std::abs(twice_area) <= 1e-14 * scale) {
      throw Error(ErrorCode::DegenerateCell, "cell " + std::to_string(c) + " has zero area");
    }
    if (twice_area < 0) {
      std::swap(v[1], v[2]);
      twice_area = -twice_area;
    }
    mesh.cell_area[c] = 0.5 * twice_area;
    mesh.cell_diameter[c] = std::sqrt(scale);
  }

  // Sorted edge list keyed by (lower, higher) vertex pair.
  std::vector<std::array<int, 2>> all;
  all.reserve(3 * static_cast<std::size_t>(nc));
  for (const auto& v : mesh.cells) {
    for (int i = 0; i < 3; ++i) {
      int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      all.push_back({a, b});
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  mesh.edges = std::move(all);

  auto find_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const std::array<int, 2> key{a, b};
    auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(), key);
    return static_cast<int>(it - mesh.edges.begin());
  };

  const int ne = mesh.num_edges();
  mesh.edge_cells.assign(ne, {-1, -1});
  mesh.cell_edges.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& v = mesh.cells[c];
    for (int i = 0; i < 3; ++i) {
      const int e = find_edge(v[(i + 1) % 3], v[(i + 2) % 3]);
      auto& owners = mesh.edge_cells[e];
      int sign = 1;
      if (owners[0] < 0) {
        owners[0] = c;
      } else if (owners[1] < 0) {
        owners[1] = c;
        sign = -1;
      } else {
        throw Error(ErrorCode::InvalidValue, "non-conforming mesh: edge shared by three cells");
      }
      mesh.cell_edges[c][i] = CellEdge{e, sign};
    }
  }
  mesh.edge_tags.assign(ne, BoundaryTag{});
  return mesh;
}

Mesh generate_structured(int nx, int ny, const Rect& rect, GridPattern pattern) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidExtent, "nx and ny must be at least 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) {
    throw Error(ErrorCode::InvalidExtent, "degenerate rectangle");
  }
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  const double dx = (rect.x1 - rect.x0) / nx;
  const double dy = (rect.y1 - rect.y0) / ny;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Snap the last row/column to the exact extent.
      const double x = i == nx ? rect.x1 : rect.x0 + i * dx;
      const double y = j == ny ? rect.y1 : rect.y0 + j * dy;
      vertices.emplace_back(x, y);
    }
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<std::size_t>(nx) * ny);
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  // Crisscross centre vertices follow the grid vertices, square by square.
  const int n_grid = static_cast<int>(vertices.size());
  if (pattern == GridPattern::Crisscross) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        vertices.push_back(0.25 * (vertices[vid(i, j)] + vertices[vid(i + 1, j)] + vertices[vid(i, j + 1)] +
                                   vertices[vid(i + 1, j + 1)]));
      }
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if (pattern == GridPattern::Crisscross) {
        const int c = n_grid + j * nx + i;
        cells.push_back({v00, v10, c});
        cells.push_back({v10, v11, c});
        cells.push_back({v11, v01, c});
        cells.push_back({v01, v00, c});
        continue;
      }
      const bool flip = pattern == GridPattern::UnionJack && ((i + j) % 2 == 1);
      if (!flip) {
        cells.push_back({v00, v10, v11});
        cells.push_back({v00, v11, v01});
      } else {
        cells.push_back({v00, v10, v01});
        cells.push_back({v10, v11, v01});
      }
    }
  }
  Mesh mesh = build_mesh(std::move(vertices), std::move(cells));
  mesh.extent = rect;
  return classify_boundary(std::move(mesh), all_dirichlet_rule());
}

BoundaryRule all_dirichlet_rule() {
  return [](const Vec2&, const Vec2&) { return BoundaryTag{MechanicalTag::Gd, FlowTag::Gp}; };
}

Mesh classify_boundary(Mesh mesh, const BoundaryRule& rule) {
  double gd = 0.0, gp = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary(e)) {
      mesh.edge_tags[e] = BoundaryTag{};
      continue;
    }
    BoundaryTag tag = rule(mesh.edge_midpoint(e), mesh.edge_normal(e));
    if (tag.mech == MechanicalTag::None || tag.flow == FlowTag::None) {
      throw Error(ErrorCode::InvalidValue, "boundary rule left an edge untagged");
    }
    mesh.edge_tags[e] = tag;
    if (tag.mech == MechanicalTag::Gd) gd += mesh.edge_length(e);
    if (tag.flow == FlowTag::Gp) gp += mesh.edge_length(e);
  }
  if (gd <= 0.0) throw Error(ErrorCode::EmptyEssentialBoundary, "Gamma_d has zero length");
  if (gp <= 0.0) throw Error(ErrorCode::EmptyEssentialBoundary, "Gamma_p has zero length");
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Vec2> vertices = mesh.vertices;
  vertices.reserve(nv + mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) vertices.push_back(mesh.edge_midpoint(e));

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<std::size_t>(mesh.num_cells()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& v = mesh.cells[c];
    const auto& ce = mesh.cell_edges[c];
    // Midpoint of the edge opposite vertex i.
    const int m0 = nv + ce[0].edge, m1 = nv + ce[1].edge, m2 = nv + ce[2].edge;
    cells.push_back({v[0], m2, m1});
    cells.push_back({m2, v[1], m0});
    cells.push_back({m1, m0, v[2]});
    cells.push_back({m0, m1, m2});
  }
  Mesh fine = build_mesh(std::move(vertices), std::move(cells));
  fine.extent = mesh.extent;
  for (int e = 0; e < fine.num_edges(); ++e) {
    if (!fine.is_boundary(e)) continue;
    // A boundary child edge joins an old vertex to the midpoint of its parent.
    const int mid = std::max(fine.edges[e][0], fine.edges[e][1]);
    fine.edge_tags[e] = mesh.edge_tags[mid - nv];
  }
  return fine;
}

MeshSize mesh_size(const Mesh& mesh) {
  if (mesh.cells.empty()) throw Error(ErrorCode::InvalidValue, "empty mesh");
  const auto [lo, hi] = std::minmax_element(mesh.cell_diameter.begin(), mesh.cell_diameter.end());
  return MeshSize{*hi, *lo};
}

MeshAudit audit(const Mesh& mesh) {
  MeshAudit out;
  out.euler_characteristic = mesh.num_vertices() - mesh.num_edges() + mesh.num_cells();
  for (double a : mesh.cell_area) out.areas_positive = out.areas_positive && a > 0.0;

  std::vector<int> count(mesh.num_edges(), 0), sign_sum(mesh.num_edges(), 0);
  for (const auto& ce : mesh.cell_edges) {
    for (const auto& ref : ce) {
      ++count[ref.edge];
      sign_sum[ref.edge] += ref.sign;
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (count[e] < 1 || count[e] > 2) out.conforming = false;
    if (count[e] == 2 && sign_sum[e] != 0) out.signs_paired = false;
    if (count[e] == 1 && sign_sum[e] != 1) out.signs_paired = false;
    if (!mesh.is_boundary(e)) continue;
    const double len = mesh.edge_length(e);
    out.boundary_length += len;
    const auto& tag = mesh.edge_tags[e];
    if (tag.mech == MechanicalTag::Gd) out.mech_gd_length += len;
    if (tag.mech == MechanicalTag::Gsigma) out.mech_gsigma_length += len;
    if (tag.flow == FlowTag::Gp) out.flow_gp_length += len;
    if (tag.flow == FlowTag::Gw) out.flow_gw_length += len;
    if (tag.mech == MechanicalTag::None || tag.flow == FlowTag::None) ++out.untagged_boundary_edges;
  }
  return out;
}

void write_mesh_ascii(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << std::setprecision(17);
  out << "# nodes " << mesh.num_vertices() << "\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << i << ' ' << mesh.vertices[i].x() << ' ' << mesh.vertices[i].y() << "\n";
  }
  out << "# elements " << mesh.num_cells() << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& v = mesh.cells[c];
    out << c << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace poromix
