#include "opinn/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "opinn/sampler.hpp"

namespace opinn {

namespace {

constexpr double kPi = 3.14159265358979323846;

DiffBundle constant_field(int dim, double v) {
  DiffBundle b;
  b.dim = dim;
  b.value = v;
  return b;
}

DiffBundle bundle1(double v, double dx, double dxx) {
  DiffBundle b;
  b.dim = 1;
  b.value = v;
  b.grad[0] = dx;
  b.hess(0, 0) = dxx;
  return b;
}

// ---- 1D Poisson problems (phi1..phi3): g = 0, eta = x(1-x) ----

DiffBundle eta_unit_interval(double x, double) {
  DiffBundle b = bundle1(x * (1.0 - x), 1.0 - 2.0 * x, -2.0);
  return b;
}

DiffBundle obstacle1(double x, double) {
  if (x <= 0.25) return bundle1(100.0 * x * x, 200.0 * x, 200.0);
  if (x <= 0.75) return bundle1(100.0 * x * (1.0 - x) - 12.5, 100.0 - 200.0 * x, -200.0);
  return bundle1(100.0 * (1.0 - x) * (1.0 - x), -200.0 * (1.0 - x), 200.0);
}

DiffBundle exact1(double x, double) {
  const double a = 100.0 - 50.0 * std::sqrt(2.0);
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  if (x <= c) return bundle1(a * x, a, 0.0);
  if (x <= 1.0 - c) return bundle1(100.0 * x * (1.0 - x) - 12.5, 100.0 - 200.0 * x, -200.0);
  return bundle1(a * (1.0 - x), -a, 0.0);
}

DiffBundle obstacle2(double x, double) {
  if (x <= 0.25) {
    const double w = 2.0 * kPi;
    return bundle1(10.0 * std::sin(w * x), 10.0 * w * std::cos(w * x),
                   -10.0 * w * w * std::sin(w * x));
  }
  if (x <= 0.75) {
    const double t = kPi * (4.0 * x - 1.0);
    return bundle1(5.0 * std::cos(t) + 5.0, -20.0 * kPi * std::sin(t),
                   -80.0 * kPi * kPi * std::cos(t));
  }
  const double w = 2.0 * kPi;
  const double u = 1.0 - x;
  return bundle1(10.0 * std::sin(w * u), -10.0 * w * std::cos(w * u),
                 -10.0 * w * w * std::sin(w * u));
}

DiffBundle exact2(double x, double y) {
  if (x <= 0.25 || x >= 0.75) return obstacle2(x, y);
  return bundle1(10.0, 0.0, 0.0);
}

DiffBundle obstacle3(double x, double) {
  if (x >= 0.15 && x < 0.2) return bundle1(5.0 * x - 0.75, 5.0, 0.0);
  if (x >= 0.2 && x <= 0.8) return bundle1(1.0, 0.0, 0.0);
  if (x > 0.8 && x <= 0.85) return bundle1(-5.0 * x + 4.25, -5.0, 0.0);
  return bundle1(0.0, 0.0, 0.0);
}

// ---- 1D membrane problem (phi4) ----

DiffBundle lift_g4(double x, double) { return bundle1(5.0 * (1.0 - x) + 10.0 * x, 5.0, 0.0); }

DiffBundle obstacle4(double x, double) {
  const double t = x + 1.0;
  const double a = kPi * t * t;
  const double s2 = std::sin(2.0 * a);
  return bundle1(10.0 * std::sin(a) * std::sin(a), 20.0 * kPi * t * s2,
                 20.0 * kPi * s2 + 80.0 * kPi * kPi * t * t * std::cos(2.0 * a));
}

// ---- 2D radially symmetric problem (phi5) on [-2,2]^2 ----

double beta_coeff() {
  static const double c = [] {
    const double b = solve_beta();
    return b * b / std::sqrt(1.0 - b * b);
  }();
  return c;
}

DiffBundle obstacle5(double x, double y) {
  DiffBundle b;
  b.dim = 2;
  const double r2 = x * x + y * y;
  if (r2 <= 1.0) {
    const double w = 1.0 - r2;
    const double sw = std::sqrt(w);
    b.value = sw;
    if (w > 1e-14) {
      b.grad << -x / sw, -y / sw;
      const double w32 = sw * w;
      b.hess(0, 0) = -1.0 / sw - x * x / w32;
      b.hess(1, 1) = -1.0 / sw - y * y / w32;
      b.hess(0, 1) = b.hess(1, 0) = -x * y / w32;
    }
  } else {
    b.value = -1.0;
  }
  return b;
}

DiffBundle exact5(double x, double y) {
  const double beta = solve_beta();
  const double r2 = x * x + y * y;
  if (r2 <= beta * beta) return obstacle5(x, y);  // contact: the spherical cap
  const double c = beta_coeff();
  DiffBundle b;
  b.dim = 2;
  b.value = -c * 0.5 * std::log(r2 / 4.0);
  b.grad << -c * x / r2, -c * y / r2;
  const double r4 = r2 * r2;
  b.hess(0, 0) = -c * (y * y - x * x) / r4;
  b.hess(1, 1) = -c * (x * x - y * y) / r4;
  b.hess(0, 1) = b.hess(1, 0) = 2.0 * c * x * y / r4;
  return b;
}

DiffBundle lift_g5(double x, double y) {
  const double c = beta_coeff();
  auto L = [](double t) { return 0.5 * std::log((t * t + 4.0) / 4.0); };
  DiffBundle b;
  b.dim = 2;
  b.value = -c * (L(x) + L(y)) + c * 0.5 * std::log(2.0);
  b.grad << -c * x / (x * x + 4.0), -c * y / (y * y + 4.0);
  const double dx = x * x + 4.0, dy = y * y + 4.0;
  b.hess(0, 0) = -c * (4.0 - x * x) / (dx * dx);
  b.hess(1, 1) = -c * (4.0 - y * y) / (dy * dy);
  return b;
}

DiffBundle eta5(double x, double y) {
  const double px = x * x - 4.0, py = y * y - 4.0;
  DiffBundle b;
  b.dim = 2;
  b.value = px * py;
  b.grad << 2.0 * x * py, 2.0 * y * px;
  b.hess(0, 0) = 2.0 * py;
  b.hess(1, 1) = 2.0 * px;
  b.hess(0, 1) = b.hess(1, 0) = 4.0 * x * y;
  return b;
}

// ---- 2D p-Laplacian problem (phi6) on [0,2]^2 ----

DiffBundle obstacle6(double x, double) {
  DiffBundle b;
  b.dim = 2;
  b.value = (x >= 0.5 && x <= 1.5) ? 1.0 : 0.0;
  return b;
}

DiffBundle exact6(double x, double) {
  constexpr double c1 = 7.75086, c2 = 9.75086, c3 = 11.50434;
  DiffBundle b;
  b.dim = 2;
  if (x < 0.5) {
    const double t = x + c1;
    b.value = 0.75 * std::pow(t, 4.0 / 3.0) - c3;
    b.grad[0] = std::cbrt(t);
    b.hess(0, 0) = (1.0 / 3.0) * std::pow(t, -2.0 / 3.0);
  } else if (x <= 1.5) {
    b.value = 1.0;
  } else {
    const double t = c2 - x;
    b.value = 0.75 * std::pow(t, 4.0 / 3.0) - c3;
    b.grad[0] = -std::cbrt(t);
    b.hess(0, 0) = (1.0 / 3.0) * std::pow(t, -2.0 / 3.0);
  }
  return b;
}

DiffBundle eta6(double x, double) {
  DiffBundle b;
  b.dim = 2;
  b.value = x * (2.0 - x);
  b.grad[0] = 2.0 - 2.0 * x;
  b.hess(0, 0) = -2.0;
  return b;
}

std::vector<ProblemSpec> build_catalog() {
  std::vector<ProblemSpec> all;

  const AnalyticField zero1 = [](double, double) { return constant_field(1, 0.0); };
  const AnalyticField zero2 = [](double, double) { return constant_field(2, 0.0); };
  const AnalyticField eta01 = eta_unit_interval;

  {
    ProblemSpec p;
    p.id = "phi1";
    p.domain = interval(0.0, 1.0);
    p.op = OperatorTag::laplace1d;
    p.source = zero1;
    p.obstacle = obstacle1;
    p.lift = {zero1, eta01};
    p.exact = exact1;
    p.hyper = {5000, 3, 24, 3.8e-3};
    all.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.id = "phi2";
    p.domain = interval(0.0, 1.0);
    p.op = OperatorTag::laplace1d;
    p.source = zero1;
    p.obstacle = obstacle2;
    p.lift = {zero1, eta01};
    p.exact = exact2;
    p.hyper = {5000, 3, 24, 8.5e-3};
    all.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.id = "phi3";
    p.domain = interval(0.0, 1.0);
    p.op = OperatorTag::laplace1d;
    p.source = zero1;
    p.obstacle = obstacle3;
    p.lift = {zero1, eta01};
    p.hyper = {6300, 6, 24, 1.7e-3};
    all.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.id = "phi4";
    p.domain = interval(0.0, 1.0);
    p.op = OperatorTag::membrane1d;
    p.source = zero1;
    p.obstacle = obstacle4;
    p.lift = {lift_g4, eta01};
    p.hyper = {5000, 3, 24, 4e-5};
    all.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.id = "phi5";
    p.domain = square(-2.0, 2.0, -2.0, 2.0);
    p.op = OperatorTag::laplace2d;
    p.source = zero2;
    p.obstacle = obstacle5;
    p.lift = {lift_g5, eta5};
    p.exact = exact5;
    p.hyper = {10000, 3, 24, 2e-3};
    all.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.id = "phi6";
    p.domain = square(0.0, 2.0, 0.0, 2.0);
    p.op = OperatorTag::plaplace2d;
    p.p_exponent = 4;
    p.source = zero2;
    p.obstacle = obstacle6;
    p.lift = {zero2, eta6};
    p.exact = exact6;
    p.hyper = {15000, 6, 24, 2.5e-3};
    p.enforced = EnforcedBoundary::x_edges_only;
    all.push_back(std::move(p));
  }
  return all;
}

}  // namespace

const std::vector<ProblemSpec>& catalog() {
  static const std::vector<ProblemSpec> all = build_catalog();
  return all;
}

const ProblemSpec& problem_by_id(const std::string& id) {
  for (const auto& p : catalog())
    if (p.id == id) return p;
  throw std::invalid_argument("unknown problem id: " + id);
}

double obstacle_eval(const std::string& id, double x, double y) {
  const ProblemSpec& p = problem_by_id(id);
  if (!p.domain.contains_closure(x, y))
    throw std::domain_error("obstacle_eval: point outside domain closure");
  return p.obstacle(x, y).value;
}

std::optional<double> exact_eval(const std::string& id, double x, double y) {
  const ProblemSpec& p = problem_by_id(id);
  if (!p.exact) return std::nullopt;
  return (*p.exact)(x, y).value;
}

double solve_beta() {
  static const double beta = [] {
    auto h = [](double b) { return b * b * (1.0 - std::log(b / 2.0)) - 1.0; };
    auto dh = [](double b) { return 2.0 * b * (1.0 - std::log(b / 2.0)) - b; };
    double lo = 0.5, hi = 1.0, b = 0.7;
    for (int it = 0; it < 200; ++it) {
      const double hb = h(b);
      if (std::abs(hb) < 1e-15) break;
      (hb < 0.0 ? lo : hi) = b;
      double step = hb / dh(b);
      double next = b - step;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
      b = next;
    }
    return b;
  }();
  return beta;
}

Mat perimeter_samples(const Domain& domain, Index m) {
  if (domain.dim == 1) {
    Mat pts(1, m);
    for (Index i = 0; i < m; ++i) pts(0, i) = (i % 2 == 0) ? domain.lo[0] : domain.hi[0];
    return pts;
  }
  const double wx = domain.hi[0] - domain.lo[0];
  const double wy = domain.hi[1] - domain.lo[1];
  const double per = 2.0 * (wx + wy);
  Mat pts(2, m);
  for (Index i = 0; i < m; ++i) {
    double t = per * static_cast<double>(i) / static_cast<double>(m);
    if (t < wx) {
      pts.col(i) << domain.lo[0] + t, domain.lo[1];
    } else if (t < wx + wy) {
      pts.col(i) << domain.hi[0], domain.lo[1] + (t - wx);
    } else if (t < 2.0 * wx + wy) {
      pts.col(i) << domain.hi[0] - (t - wx - wy), domain.hi[1];
    } else {
      pts.col(i) << domain.lo[0], domain.hi[1] - (t - 2.0 * wx - wy);
    }
  }
  return pts;
}

Mat boundary_samples(const ProblemSpec& problem, Index m) {
  if (problem.domain.dim == 1 || problem.enforced == EnforcedBoundary::all_edges)
    return perimeter_samples(problem.domain, m);
  // x-edges only: alternate the two edges, y swept uniformly on each
  const Domain& d = problem.domain;
  Mat pts(2, m);
  const Index per_edge = (m + 1) / 2;
  for (Index i = 0; i < m; ++i) {
    const Index j = i / 2;
    const double frac = per_edge > 1 ? static_cast<double>(j) / static_cast<double>(per_edge - 1) : 0.5;
    pts.col(i) << (i % 2 == 0 ? d.lo[0] : d.hi[0]), d.lo[1] + (d.hi[1] - d.lo[1]) * frac;
  }
  return pts;
}

double solution_scale(const ProblemSpec& problem) {
  const Index res = problem.domain.dim == 1 ? 1001 : 201;
  const Mat grid = eval_grid(problem.domain, res);
  double mx = -1e300, mn = 1e300;
  for (Index i = 0; i < grid.cols(); ++i) {
    const double v = problem.obstacle(grid(0, i), problem.domain.dim == 2 ? grid(1, i) : 0.0).value;
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  const Mat bnd = boundary_samples(problem, 200);
  for (Index i = 0; i < bnd.cols(); ++i) {
    const double v = problem.lift.g(bnd(0, i), problem.domain.dim == 2 ? bnd(1, i) : 0.0).value;
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  return mx - mn;
}

}  // namespace opinn
