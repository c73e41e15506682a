#include "poromix/scenarios.hpp"

#include "poromix/errors.hpp"

#include <cmath>
#include <numbers>

namespace poromix {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

ManufacturedCase::ManufacturedCase(ModelParams params) : params_(std::move(params)) {
  params_.validate();
  c_ = 1.0 / (params_.mu + params_.lambda);
}

Vec2 ManufacturedCase::X(const Vec2& x) const {
  const double S = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  return {std::sin(2 * kPi * x.y()) * (std::cos(2 * kPi * x.x()) - 1.0) + c_ * S,
          std::sin(2 * kPi * x.x()) * (1.0 - std::cos(2 * kPi * x.y())) + c_ * S};
}

Vec2 ManufacturedCase::grad_P(const Vec2& x) const {
  return {kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
          kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y())};
}

Mat2 ManufacturedCase::hess_P(const Vec2& x) const {
  const double S = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  const double C = std::cos(kPi * x.x()) * std::cos(kPi * x.y());
  Mat2 H;
  H << -kPi * kPi * S, kPi * kPi * C, kPi * kPi * C, -kPi * kPi * S;
  return H;
}

Mat2 ManufacturedCase::grad_X(const Vec2& x) const {
  const double sx2 = std::sin(2 * kPi * x.x()), cx2 = std::cos(2 * kPi * x.x());
  const double sy2 = std::sin(2 * kPi * x.y()), cy2 = std::cos(2 * kPi * x.y());
  const Vec2 gS = grad_P(x);
  Mat2 G;
  G(0, 0) = -2 * kPi * sy2 * sx2 + c_ * gS.x();
  G(0, 1) = 2 * kPi * cy2 * (cx2 - 1.0) + c_ * gS.y();
  G(1, 0) = 2 * kPi * cx2 * (1.0 - cy2) + c_ * gS.x();
  G(1, 1) = 2 * kPi * sx2 * sy2 + c_ * gS.y();
  return G;
}

Vec2 ManufacturedCase::lap_X(const Vec2& x) const {
  const double sx2 = std::sin(2 * kPi * x.x()), cx2 = std::cos(2 * kPi * x.x());
  const double sy2 = std::sin(2 * kPi * x.y()), cy2 = std::cos(2 * kPi * x.y());
  const double S = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  const double k2 = 4 * kPi * kPi;
  return {-k2 * sy2 * (2.0 * cx2 - 1.0) - 2 * kPi * kPi * c_ * S,
          k2 * sx2 * (2.0 * cy2 - 1.0) - 2 * kPi * kPi * c_ * S};
}

// div X = c (S_x + S_y); the trigonometric parts cancel.
Vec2 ManufacturedCase::grad_div_X(const Vec2& x) const {
  const Mat2 H = hess_P(x);
  return c_ * Vec2(H(0, 0) + H(0, 1), H(1, 0) + H(1, 1));
}

Mat2 ManufacturedCase::Sigma(const Vec2& x) const {
  const Mat2 G = grad_X(x);
  const double S = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  return 2.0 * params_.mu * sym(G) + (params_.lambda * G.trace() - params_.alpha * S) * Mat2::Identity();
}

Vec2 ManufacturedCase::d(const Vec2& x, double t) const { return t * t * X(x); }
Vec2 ManufacturedCase::u(const Vec2& x, double t) const { return 2.0 * t * X(x); }
double ManufacturedCase::p(const Vec2& x, double t) const {
  return t * t * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
}
Vec2 ManufacturedCase::w(const Vec2& x, double t) const { return -t * t * (params_.K * grad_P(x)); }
Mat2 ManufacturedCase::sigma(const Vec2& x, double t) const { return t * t * Sigma(x); }

Vec2 ManufacturedCase::div_sigma(const Vec2& x, double t) const {
  const Vec2 v = params_.mu * lap_X(x) + (params_.mu + params_.lambda) * grad_div_X(x) -
                 params_.alpha * grad_P(x);
  return t * t * v;
}

double ManufacturedCase::div_w(const Vec2& x, double t) const {
  return -t * t * (params_.K * hess_P(x)).trace();
}

Vec2 ManufacturedCase::f(const Vec2& x, double t) const {
  return 2.0 * params_.rho_u * X(x) - 2.0 * t * params_.rho_f * (params_.K * grad_P(x)) - div_sigma(x, t);
}

Vec2 ManufacturedCase::h(const Vec2& x, double t) const {
  return 2.0 * params_.rho_f * X(x) - 2.0 * t * params_.rho_w * (params_.K * grad_P(x));
}

double ManufacturedCase::g(const Vec2& x, double t) const {
  const double kappa = params_.kappa();
  const double a = params_.alpha;
  const double dp = 2.0 * t * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  const double dtr = 2.0 * t * Sigma(x).trace();
  return (params_.s0 + a * a / kappa) * dp + a / (kDim * kappa) * dtr + div_w(x, t);
}

LoadFunctions ManufacturedCase::loads() const {
  LoadFunctions l;
  l.f = [mc = *this](const Vec2& x, double t) { return mc.f(x, t); };
  l.h = [mc = *this](const Vec2& x, double t) { return mc.h(x, t); };
  l.g = [mc = *this](const Vec2& x, double t) { return mc.g(x, t); };
  return l;
}

BoundaryData ManufacturedCase::boundary() const { return {}; }

InitialState ManufacturedCase::initial() const { return {}; }

double RickerSource::wavelet(double t) const {
  const double a = kPi * kPi * f0 * f0 * (t - t0) * (t - t0);
  return (1.0 - 2.0 * a) * std::exp(-a);
}

Vec2 RickerSource::force(const Vec2& x, double t) const {
  const Vec2 r = x - center;
  const double n = r.norm();
  if (n == 0.0 || n >= 2.0 * h) return Vec2::Zero();
  return wavelet(t) * (1.0 - n * n / (4.0 * h * h)) * (r / n);
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"convergence", "robust_incompressible",
                                              "robust_nodensity", "wave"};
  return names;
}

namespace {

ModelParams convergence_params() {
  ModelParams p;
  p.mu = 1.0;
  p.lambda = 10.0;
  p.s0 = 0.002;
  p.alpha = 1.0;
  p.K = Mat2::Identity();
  p.rho_u = 1.0;
  p.rho_f = 0.25;
  p.rho_w = 1.0;
  return p;
}

}  // namespace

ScenarioSpec scenario(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  if (name == "convergence" || name == "robust_incompressible" || name == "robust_nodensity") {
    s.kind = ScenarioKind::Manufactured;
    s.params = convergence_params();
    s.domain = Rect{0.0, 0.0, 1.0, 1.0};
    s.pattern = GridPattern::Crisscross;
    s.mesh_n = 8;
    s.refinements = 3;
    s.t_F = 0.5;
    if (name == "robust_incompressible") {
      s.params.s0 = 0.0;
      s.params.lambda = 1e6;
    } else if (name == "robust_nodensity") {
      s.params.rho_f = 0.0;
      s.params.rho_w = 0.0;
      s.w_family = Family::BDM1;
    }
    return s;
  }
  if (name == "wave") {
    s.kind = ScenarioKind::Wave;
    ModelParams& p = s.params;
    p.mu = 7.2073e9;
    p.lambda = 4.3738e9;
    p.s0 = 1.462e-10;
    p.alpha = 0.029;
    p.K = 6.6667e-10 * Mat2::Identity();
    p.rho_u = 1700.0;
    p.rho_f = 950.0;
    p.rho_w = 4750.0;
    s.w_family = Family::BDM1;
    s.domain = Rect{0.0, 0.0, 4800.0, 4800.0};
    s.pattern = GridPattern::UnionJack;
    s.mesh_n = 96;
    s.refinements = 0;
    s.t_F = 1.0;
    s.dt = 0.005;
    s.f0 = 5.0;
    s.t0 = 0.6;
    s.snapshot_times = {0.8, 0.9, 1.0};
    return s;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

Mesh scenario_mesh(const ScenarioSpec& spec, int cells_per_side) {
  return generate_structured(cells_per_side, cells_per_side, spec.domain, spec.pattern);
}

Problem build_problem(const ScenarioSpec& spec, Mesh mesh) {
  Problem pr;
  pr.params = spec.params;
  pr.penalty = spec.penalty;
  pr.spaces = build_dofmaps(mesh, spec.w_family);
  if (spec.kind == ScenarioKind::Manufactured) {
    const ManufacturedCase mc(spec.params);
    pr.loads = mc.loads();
    pr.bc = mc.boundary();
    pr.initial = mc.initial();
    pr.load_time_degree = 2;
  } else {
    RickerSource src;
    src.f0 = spec.f0;
    src.t0 = spec.t0;
    src.center = Vec2(0.5 * (spec.domain.x0 + spec.domain.x1), 0.5 * (spec.domain.y0 + spec.domain.y1));
    src.h = mesh_size(mesh).h;
    pr.loads.f = [src](const Vec2& x, double t) { return src.force(x, t); };
  }
  pr.mesh = std::move(mesh);
  return pr;
}

}  // namespace poromix
