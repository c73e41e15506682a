#pragma once

#include "poromix/model.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace poromix {

enum class MechanicalTag : std::uint8_t { None, Gd, Gsigma };
enum class FlowTag : std::uint8_t { None, Gp, Gw };

struct BoundaryTag {
  MechanicalTag mech = MechanicalTag::None;
  FlowTag flow = FlowTag::None;
};

/// How each square of a structured grid is split. Diagonal uses the SW-NE
/// diagonal; UnionJack alternates the diagonal in a checkerboard, which makes
/// the mesh mirror-symmetric about both mid-lines when nx and ny are even;
/// Crisscross uses both diagonals (four triangles around a centre vertex).
enum class GridPattern : std::uint8_t { Diagonal, UnionJack, Crisscross };

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Reference to a cell's local edge. Local edge i is opposite local vertex i
/// and runs from vertex (i+1)%3 to (i+2)%3. `sign` is +1 when the cell's
/// outward normal coincides with the global edge normal.
struct CellEdge {
  int edge = -1;
  int sign = 1;
};

/// Conforming triangulation. Cells are counter-clockwise; edges are stored
/// as (lower, higher) global vertex pairs in lexicographic order. The global
/// normal of an interior edge points out of its lower-indexed cell; on the
/// boundary it points outward.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<CellEdge, 3>> cell_edges;
  std::vector<std::array<int, 2>> edge_cells;  ///< second entry -1 on the boundary
  std::vector<BoundaryTag> edge_tags;          ///< meaningful on boundary edges only
  std::vector<double> cell_diameter;
  std::vector<double> cell_area;
  Rect extent;  ///< bounding rectangle of the generating grid

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_cells() const { return static_cast<int>(cells.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges.size()); }
  [[nodiscard]] bool is_boundary(int e) const { return edge_cells[e][1] < 0; }
  [[nodiscard]] double edge_length(int e) const;
  /// Unit global normal of edge e.
  [[nodiscard]] Vec2 edge_normal(int e) const;
  [[nodiscard]] Vec2 edge_midpoint(int e) const;
  [[nodiscard]] Vec2 centroid(int c) const;
  [[nodiscard]] std::vector<int> boundary_edges() const;
};

/// Builds topology, orientation and geometry from raw vertex/cell lists.
/// Cells given clockwise are reordered; degenerate cells throw.
Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

/// Splits the rectangle into nx*ny squares, two triangles each. Boundary
/// edges are tagged Gd/Gp.
Mesh generate_structured(int nx, int ny, const Rect& rect,
                         GridPattern pattern = GridPattern::Diagonal);

using BoundaryRule = std::function<BoundaryTag(const Vec2& midpoint, const Vec2& normal)>;

/// Tags every boundary edge with the rule; throws EmptyEssentialBoundary when
/// Gamma_d or Gamma_p ends up with zero length.
Mesh classify_boundary(Mesh mesh, const BoundaryRule& rule);

BoundaryRule all_dirichlet_rule();

/// Red refinement: every triangle split into four similar ones, boundary
/// tags inherited from the parent edge.
Mesh refine_uniform(const Mesh& mesh);

struct MeshSize {
  double h = 0.0;
  double h_min = 0.0;
};

MeshSize mesh_size(const Mesh& mesh);

struct MeshAudit {
  bool conforming = true;         ///< every edge shared by at most two cells
  bool signs_paired = true;       ///< interior edges see +1 and -1
  bool areas_positive = true;
  int euler_characteristic = 0;   ///< V - E + C
  double mech_gd_length = 0.0, mech_gsigma_length = 0.0;
  double flow_gp_length = 0.0, flow_gw_length = 0.0;
  double boundary_length = 0.0;
  int untagged_boundary_edges = 0;
};

MeshAudit audit(const Mesh& mesh);

/// ASCII node/element listing for debugging.
void write_mesh_ascii(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace poromix
