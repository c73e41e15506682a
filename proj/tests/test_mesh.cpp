#include "poromix/mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace poromix;
using poromix::testing::code_of;

namespace {

double total_area(const Mesh& m) {
  double a = 0.0;
  for (double v : m.cell_area) a += v;
  return a;
}

void expect_valid(const Mesh& m, double area) {
  const MeshAudit a = audit(m);
  EXPECT_TRUE(a.conforming);
  EXPECT_TRUE(a.signs_paired);
  EXPECT_TRUE(a.areas_positive);
  EXPECT_EQ(a.euler_characteristic, 1);
  EXPECT_EQ(a.untagged_boundary_edges, 0);
  EXPECT_NEAR(total_area(m), area, 1e-12 * area);
  EXPECT_NEAR(a.mech_gd_length + a.mech_gsigma_length, a.boundary_length, 1e-12 * a.boundary_length);
  EXPECT_NEAR(a.flow_gp_length + a.flow_gw_length, a.boundary_length, 1e-12 * a.boundary_length);
}

// Cells as sorted vertex coordinate triples, for comparing meshes as sets.
std::set<std::vector<long>> cell_set(const Mesh& m, bool mirror_x) {
  std::set<std::vector<long>> out;
  for (const auto& c : m.cells) {
    std::vector<long> key;
    std::vector<std::pair<long, long>> pts;
    for (int v : c) {
      double x = m.vertices[v].x();
      if (mirror_x) x = m.extent.x0 + m.extent.x1 - x;
      pts.emplace_back(std::lround(x * 1e6), std::lround(m.vertices[v].y() * 1e6));
    }
    std::sort(pts.begin(), pts.end());
    for (auto [a, b] : pts) {
      key.push_back(a);
      key.push_back(b);
    }
    out.insert(key);
  }
  return out;
}

}  // namespace

TEST(Structured, SingleSquare) {
  const Mesh m = generate_structured(1, 1, Rect{});
  EXPECT_EQ(m.num_vertices(), 4);
  EXPECT_EQ(m.num_edges(), 5);
  EXPECT_EQ(m.num_cells(), 2);
  expect_valid(m, 1.0);
}

TEST(Structured, TwoByTwoEulerCount) {
  const Mesh m = generate_structured(2, 2, Rect{});
  EXPECT_EQ(m.num_vertices(), 9);
  EXPECT_EQ(m.num_edges(), 16);
  EXPECT_EQ(m.num_cells(), 8);
  expect_valid(m, 1.0);
}

TEST(Structured, AllPatternsValid) {
  const Rect r{-1.0, 2.0, 3.0, 4.5};
  for (GridPattern p : {GridPattern::Diagonal, GridPattern::UnionJack, GridPattern::Crisscross}) {
    for (int n : {1, 3, 8}) expect_valid(generate_structured(n, n + 1, r, p), 4.0 * 2.5);
  }
}

TEST(Structured, CrisscrossCounts) {
  const int n = 5;
  const Mesh m = generate_structured(n, n, Rect{}, GridPattern::Crisscross);
  EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1) + n * n);
  EXPECT_EQ(m.num_cells(), 4 * n * n);
  EXPECT_EQ(m.num_edges(), 2 * n * (n + 1) + 4 * n * n);
  EXPECT_NEAR(mesh_size(m).h, 1.0 / n, 1e-15);
}

TEST(Structured, CounterClockwiseCells) {
  const Mesh m = generate_structured(4, 3, Rect{}, GridPattern::UnionJack);
  for (const auto& c : m.cells) {
    const Vec2 a = m.vertices[c[1]] - m.vertices[c[0]], b = m.vertices[c[2]] - m.vertices[c[0]];
    EXPECT_GT(a.x() * b.y() - a.y() * b.x(), 0.0);
  }
}

TEST(Structured, MeshSizeIsDiagonal) {
  for (int n : {1, 4, 7}) {
    const MeshSize s = mesh_size(generate_structured(n, n, Rect{}));
    EXPECT_NEAR(s.h, std::sqrt(2.0) / n, 1e-15);
    EXPECT_NEAR(s.h_min, std::sqrt(2.0) / n, 1e-15);
  }
}

TEST(Structured, LargeWaveMeshCellCount) {
  const Mesh m = generate_structured(245, 245, Rect{0.0, 0.0, 4800.0, 4800.0});
  EXPECT_EQ(m.num_cells(), 120050);
  EXPECT_NEAR(mesh_size(m).h, 4800.0 * std::sqrt(2.0) / 245.0, 1e-9);
  EXPECT_NEAR(mesh_size(m).h, 27.7, 0.05);
}

TEST(Structured, UnionJackIsMirrorSymmetric) {
  const Mesh m = generate_structured(6, 6, Rect{0.0, 0.0, 4800.0, 4800.0}, GridPattern::UnionJack);
  EXPECT_EQ(cell_set(m, false), cell_set(m, true));
  const Mesh d = generate_structured(6, 6, Rect{0.0, 0.0, 4800.0, 4800.0});
  EXPECT_NE(cell_set(d, false), cell_set(d, true));
}

TEST(Structured, DegenerateInputsRejected) {
  EXPECT_EQ(code_of([] { generate_structured(0, 2, Rect{}); }), ErrorCode::InvalidExtent);
  EXPECT_EQ(code_of([] { generate_structured(2, 2, Rect{0, 0, 0, 1}); }), ErrorCode::InvalidExtent);
  EXPECT_EQ(code_of([] { generate_structured(2, 2, Rect{0, 1, 1, 0}); }), ErrorCode::InvalidExtent);
}

TEST(Orientation, InteriorEdgeNormalsLeaveLowerCell) {
  const Mesh m = generate_structured(3, 3, Rect{}, GridPattern::Crisscross);
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto [c0, c1] = m.edge_cells[e];
    const Vec2 n = m.edge_normal(e);
    EXPECT_NEAR(n.norm(), 1.0, 1e-14);
    if (c1 < 0) {
      const Vec2 mid = m.edge_midpoint(e);
      EXPECT_GT(n.dot(mid - m.centroid(c0)), 0.0);
    } else {
      EXPECT_LT(c0, c1);
      EXPECT_GT(n.dot(m.centroid(c1) - m.centroid(c0)), 0.0);
    }
  }
}

TEST(Orientation, EdgesStoredSorted) {
  const Mesh m = generate_structured(3, 2, Rect{});
  for (const auto& e : m.edges) EXPECT_LT(e[0], e[1]);
  EXPECT_TRUE(std::is_sorted(m.edges.begin(), m.edges.end()));
}

TEST(BuildMesh, ClockwiseCellsReordered) {
  const Mesh m = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
  EXPECT_NEAR(m.cell_area[0], 0.5, 1e-15);
  EXPECT_TRUE(audit(m).areas_positive);
}

TEST(BuildMesh, DegenerateCellThrows) {
  EXPECT_EQ(code_of([] { build_mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}); }), ErrorCode::DegenerateCell);
}

TEST(Classify, AllDirichlet) {
  const Mesh m = classify_boundary(generate_structured(3, 3, Rect{}), all_dirichlet_rule());
  const MeshAudit a = audit(m);
  EXPECT_NEAR(a.mech_gd_length, 4.0, 1e-14);
  EXPECT_NEAR(a.flow_gp_length, 4.0, 1e-14);
  EXPECT_EQ(a.mech_gsigma_length, 0.0);
  EXPECT_EQ(a.flow_gw_length, 0.0);
}

TEST(Classify, BottomTraction) {
  const Mesh m = classify_boundary(generate_structured(4, 4, Rect{}), [](const Vec2& mid, const Vec2&) {
    BoundaryTag t;
    t.mech = mid.y() < 1e-12 ? MechanicalTag::Gsigma : MechanicalTag::Gd;
    t.flow = FlowTag::Gp;
    return t;
  });
  const MeshAudit a = audit(m);
  EXPECT_NEAR(a.mech_gsigma_length, 1.0, 1e-14);
  EXPECT_NEAR(a.mech_gd_length, 3.0, 1e-14);
  EXPECT_NEAR(a.mech_gd_length + a.mech_gsigma_length, a.boundary_length, 1e-14);
}

TEST(Classify, EmptyPressureBoundaryRejected) {
  auto rule = [](const Vec2&, const Vec2&) { return BoundaryTag{MechanicalTag::Gd, FlowTag::Gw}; };
  EXPECT_EQ(code_of([&] { classify_boundary(generate_structured(2, 2, Rect{}), rule); }),
            ErrorCode::EmptyEssentialBoundary);
}

TEST(Refine, CountsSizeAndTags) {
  const Mesh coarse = classify_boundary(generate_structured(1, 1, Rect{}), [](const Vec2& mid, const Vec2&) {
    BoundaryTag t;
    t.mech = mid.x() < 1e-12 ? MechanicalTag::Gsigma : MechanicalTag::Gd;
    t.flow = FlowTag::Gp;
    return t;
  });
  const Mesh fine = refine_uniform(coarse);
  EXPECT_EQ(fine.num_cells(), 8);
  EXPECT_EQ(mesh_size(fine).h, 0.5 * mesh_size(coarse).h);
  expect_valid(fine, 1.0);
  EXPECT_NEAR(audit(fine).mech_gsigma_length, 1.0, 1e-14);
  const Mesh finer = refine_uniform(fine);
  EXPECT_EQ(finer.num_cells(), 32);
  expect_valid(finer, 1.0);
}

TEST(Export, AsciiListing) {
  const Mesh m = generate_structured(2, 1, Rect{});
  const auto path = std::filesystem::temp_directory_path() / "poromix_mesh_listing.txt";
  write_mesh_ascii(m, path);
  EXPECT_GT(std::filesystem::file_size(path), 0u);
  std::filesystem::remove(path);
}
