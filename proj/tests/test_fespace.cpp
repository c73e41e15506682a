#include "poromix/fespace.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace poromix;
using poromix::testing::code_of;

namespace {

Mesh mixed_boundary_mesh(int n) {
  return classify_boundary(generate_structured(n, n, Rect{}, GridPattern::UnionJack),
                           [](const Vec2& mid, const Vec2&) {
                             BoundaryTag t;
                             t.mech = mid.y() > 1.0 - 1e-12 ? MechanicalTag::Gsigma : MechanicalTag::Gd;
                             t.flow = mid.x() < 1e-12 ? FlowTag::Gw : FlowTag::Gp;
                             return t;
                           });
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

// Point on the segment between two vertices of edge e at fraction s.
Vec2 edge_point(const Mesh& m, int e, double s) {
  return (1.0 - s) * m.vertices[m.edges[e][0]] + s * m.vertices[m.edges[e][1]];
}

}  // namespace

TEST(Counts, TwoByTwo) {
  const Mesh m = generate_structured(2, 2, Rect{});
  const FieldSpaces rt = build_dofmaps(m, Family::RT0);
  EXPECT_EQ(rt.sigma.n_global, 64);
  EXPECT_EQ(rt.p.n_global, 8);
  EXPECT_EQ(rt.u.n_global, 16);
  EXPECT_EQ(rt.w.n_global, 16);
  EXPECT_EQ(rt.n_total, 104);
  EXPECT_EQ(build_dofmaps(m, Family::BDM1).n_total, 120);
}

TEST(Counts, SingleSquare) {
  EXPECT_EQ(build_dofmaps(generate_structured(1, 1, Rect{}), Family::RT0).n_total, 31);
}

TEST(Counts, BlockOffsets) {
  const FieldSpaces s = build_dofmaps(generate_structured(3, 2, Rect{}), Family::BDM1);
  EXPECT_EQ(s.sigma.offset, 0);
  EXPECT_EQ(s.p.offset, s.sigma.n_global);
  EXPECT_EQ(s.u.offset, s.p.offset + s.p.n_global);
  EXPECT_EQ(s.w.offset, s.u.offset + s.u.n_global);
  EXPECT_EQ(s.n_total, s.w.offset + s.w.n_global);
  EXPECT_EQ(&s[Field::Filtration], &s.w);
}

TEST(Counts, Rejections) {
  const Mesh m = generate_structured(1, 1, Rect{});
  EXPECT_EQ(code_of([&] { build_dofmaps(m, Family::RT0, 1); }), ErrorCode::UnsupportedDegree);
  EXPECT_EQ(code_of([&] { build_dofmaps(m, Family::DG0Vector); }), ErrorCode::InvalidValue);
}

TEST(Constraints, FollowBoundaryTags) {
  const Mesh m = mixed_boundary_mesh(4);
  const FieldSpaces rt = build_dofmaps(m, Family::RT0);
  const FieldSpaces bdm = build_dofmaps(m, Family::BDM1);
  EXPECT_EQ(rt.sigma.constrained.size(), 4u * 4u);
  EXPECT_EQ(rt.w.constrained.size(), 4u);
  EXPECT_EQ(bdm.w.constrained.size(), 8u);
  EXPECT_EQ(rt.constrained_dofs().size(), 20u);
  for (int d : rt.constrained_dofs()) EXPECT_LT(d, rt.n_total);
  EXPECT_TRUE(build_dofmaps(generate_structured(2, 2, Rect{}), Family::RT0).constrained_dofs().empty());
}

TEST(Numbering, Deterministic) {
  const Mesh m = mixed_boundary_mesh(3);
  const FieldSpaces a = build_dofmaps(m, Family::BDM1), b = build_dofmaps(m, Family::BDM1);
  ASSERT_EQ(a.sigma.cell_dofs.size(), b.sigma.cell_dofs.size());
  for (std::size_t i = 0; i < a.sigma.cell_dofs.size(); ++i) {
    EXPECT_EQ(a.sigma.cell_dofs[i].index, b.sigma.cell_dofs[i].index);
    EXPECT_EQ(a.sigma.cell_dofs[i].sign, b.sigma.cell_dofs[i].sign);
  }
}

TEST(Numbering, InteriorEdgeSignsPair) {
  const Mesh m = generate_structured(3, 3, Rect{}, GridPattern::Crisscross);
  const FieldSpaces s = build_dofmaps(m, Family::RT0);
  std::vector<int> sum(s.w.n_global, 0), count(s.w.n_global, 0);
  for (int c = 0; c < m.num_cells(); ++c) {
    for (const GlobalDof& g : s.w.cell(c)) {
      sum[g.index] += g.sign;
      ++count[g.index];
    }
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    EXPECT_EQ(count[e], m.is_boundary(e) ? 1 : 2);
    EXPECT_EQ(sum[e], m.is_boundary(e) ? 1 : 0);
  }
}

// Random H(div) fields have continuous normal traces across every interior
// edge; the tangential part of BDM1 generally jumps.
TEST(Conformity, NormalTraceContinuous) {
  const Mesh m = generate_structured(3, 3, Rect{}, GridPattern::UnionJack);
  const FieldSpaces s = build_dofmaps(m, Family::BDM1);
  const Eigen::VectorXd sig = random_vector(s.sigma.n_global, 1);
  const Eigen::VectorXd w = random_vector(s.w.n_global, 2);
  double max_tangent_jump = 0.0;
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.is_boundary(e)) continue;
    const auto [c0, c1] = m.edge_cells[e];
    const Vec2 n = m.edge_normal(e), t(-n.y(), n.x());
    for (double f : {0.0, 0.3, 0.77, 1.0}) {
      const Vec2 x = edge_point(m, e, f);
      const FieldValue a = evaluate(w, s.w, m, c0, x), b = evaluate(w, s.w, m, c1, x);
      EXPECT_NEAR(a.value.head<2>().dot(n), b.value.head<2>().dot(n), 1e-12);
      max_tangent_jump = std::max(max_tangent_jump, std::abs((a.value - b.value).head<2>().dot(t)));
      const Mat2 sa = as_tensor(evaluate(sig, s.sigma, m, c0, x).value);
      const Mat2 sb = as_tensor(evaluate(sig, s.sigma, m, c1, x).value);
      EXPECT_LT((sa * n - sb * n).norm(), 1e-12);
    }
  }
  EXPECT_GT(max_tangent_jump, 1e-3);
}

TEST(Projection, ReproducesPolynomialsInTheSpace) {
  const Mesh m = generate_structured(3, 2, Rect{0.0, 0.0, 2.0, 1.0}, GridPattern::Crisscross);
  const FieldSpaces s = build_dofmaps(m, Family::BDM1);
  const FieldSpaces rt = build_dofmaps(m, Family::RT0);
  const auto linear = [](const Vec2& x) { return Vec2(1.0 + 2.0 * x.x() - x.y(), 0.5 * x.x() + 3.0 * x.y()); };
  const auto rt_field = [](const Vec2& x) { return Vec2(0.3 + 0.7 * x.x(), -1.0 + 0.7 * x.y()); };
  const auto tensor = [](const Vec2& x) {
    Mat2 a;
    a << x.x(), 2.0 - x.y(), 0.5 + x.y(), -x.x() + x.y();
    return a;
  };
  const auto constant = [](const Vec2&) { return 2.5; };
  const Eigen::VectorXd cw = project_L2(as_components(std::function<Vec2(const Vec2&)>(linear)), s.w, m);
  const Eigen::VectorXd crt = project_L2(as_components(std::function<Vec2(const Vec2&)>(rt_field)), rt.w, m);
  const Eigen::VectorXd cs = project_L2(as_components(std::function<Mat2(const Vec2&)>(tensor)), s.sigma, m);
  const Eigen::VectorXd cp = project_L2(as_components(std::function<double(const Vec2&)>(constant)), s.p, m);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < m.num_cells(); ++c) {
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) std::tie(a, b) = std::pair(1.0 - a, 1.0 - b);
    const Vec2 xi(a, b);
    const Vec2 x = cell_geometry(m, c).map(xi);
    const FieldValue fw = evaluate_reference(cw, s.w, m, c, xi);
    EXPECT_LT((fw.value.head<2>() - linear(x)).norm(), 1e-12);
    EXPECT_NEAR(fw.div(0), 5.0, 1e-11);
    EXPECT_LT((evaluate_reference(crt, rt.w, m, c, xi).value.head<2>() - rt_field(x)).norm(), 1e-12);
    EXPECT_LT((as_tensor(evaluate_reference(cs, s.sigma, m, c, xi).value) - tensor(x)).norm(), 1e-12);
    EXPECT_NEAR(evaluate_reference(cp, s.p, m, c, xi).value(0), 2.5, 1e-14);
  }
}

TEST(Projection, Idempotent) {
  const Mesh m = generate_structured(3, 3, Rect{}, GridPattern::UnionJack);
  const FieldSpaces s = build_dofmaps(m, Family::BDM1);
  const auto f = [](const Vec2& x) { return Vec2(std::sin(3.0 * x.x()) * x.y(), std::exp(x.x() - x.y())); };
  const Eigen::VectorXd c1 = project_L2(as_components(std::function<Vec2(const Vec2&)>(f)), s.w, m);
  // Project the discrete field again, evaluated on the cell containing each point.
  const Eigen::VectorXd c2 = project_L2(
      [&](const Vec2& x) -> Eigen::Vector4d {
        for (int c = 0; c < m.num_cells(); ++c) {
          const Vec2 xi = cell_geometry(m, c).inverse_map(x);
          if (xi.x() > 1e-9 && xi.y() > 1e-9 && xi.x() + xi.y() < 1.0 - 1e-9) {
            return evaluate(c1, s.w, m, c, x).value;
          }
        }
        ADD_FAILURE() << "quadrature point not strictly inside any cell";
        return Eigen::Vector4d::Zero();
      },
      s.w, m);
  EXPECT_LT((c1 - c2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, EssentialDofsHeldAtZero) {
  const Mesh m = mixed_boundary_mesh(3);
  const FieldSpaces s = build_dofmaps(m, Family::RT0);
  const auto f = [](const Vec2&) { return Vec2(1.0, 1.0); };
  const Eigen::VectorXd c = project_L2(as_components(std::function<Vec2(const Vec2&)>(f)), s.w, m);
  for (int d : s.w.constrained) EXPECT_EQ(c(d), 0.0);
}

TEST(Evaluate, OutsideCellRejected) {
  const Mesh m = generate_structured(2, 2, Rect{});
  const FieldSpaces s = build_dofmaps(m, Family::RT0);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(s.w.n_global);
  const Vec2 far = m.centroid(m.num_cells() - 1);
  EXPECT_EQ(code_of([&] { evaluate(w, s.w, m, 0, far); }), ErrorCode::OutOfElement);
  EXPECT_NO_THROW(evaluate(w, s.w, m, 0, m.centroid(0)));
}

TEST(State, ZerosHasMatchingBlocks) {
  const FieldSpaces s = build_dofmaps(generate_structured(2, 2, Rect{}), Family::BDM1);
  const DiscreteState st = DiscreteState::zeros(s, 0.25);
  EXPECT_EQ(st.x.size(), s.n_total);
  EXPECT_EQ(st.d_acc.size(), s.u.n_global);
  EXPECT_EQ(st.block(s.w).size(), s.w.n_global);
  EXPECT_EQ(st.t, 0.25);
}
