#include "opinn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace opinn {

namespace {

constexpr long kMaxSweeps = 1000000;

void finalize_contact_1d(GridSolution& sol) {
  const Index n = sol.n;
  const double scale = std::max(1.0, sol.values.cwiseAbs().maxCoeff());
  sol.contact.assign(n, 0);
  for (Index i = 0; i < n; ++i)
    sol.contact[i] = std::abs(sol.values[i] - sol.phi[i]) <= 1e-10 * scale ? 1 : 0;
  std::vector<double> fb;
  for (Index i = 0; i + 1 < n; ++i)
    if (sol.contact[i] != sol.contact[i + 1])
      fb.push_back(0.5 * (sol.points(0, i) + sol.points(0, i + 1)));
  sol.free_boundary.resize(1, static_cast<Index>(fb.size()));
  for (size_t k = 0; k < fb.size(); ++k) sol.free_boundary(0, static_cast<Index>(k)) = fb[k];
}

}  // namespace

GridSolution psor_1d(const Scalar1D& obstacle, double g0, double g1, Index n, double omega,
                     double tol_iter) {
  if (n < 3) throw std::invalid_argument("psor_1d: n must be >= 3");
  if (!(omega > 1.0 && omega < 2.0)) throw std::invalid_argument("psor_1d: need 1 < omega < 2");
  const double h = 1.0 / static_cast<double>(n - 1);

  GridSolution sol;
  sol.dim = 1;
  sol.n = n;
  sol.points.resize(1, n);
  sol.phi.resize(n);
  sol.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * h;
    sol.points(0, i) = x;
    sol.phi[i] = obstacle(x);
    sol.values[i] = std::max(sol.phi[i], g0 + (g1 - g0) * x);
  }
  sol.values[0] = g0;
  sol.values[n - 1] = g1;

  Vec& u = sol.values;
  long sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (Index i = 1; i + 1 < n; ++i) {
      const double gs = 0.5 * (u[i - 1] + u[i + 1]);
      const double cand = u[i] + omega * (gs - u[i]);
      const double next = std::max(sol.phi[i], cand);
      change = std::max(change, std::abs(next - u[i]));
      u[i] = next;
    }
    if (change < 0.25 * tol_iter) break;  // margin keeps residual < tol_iter/h^2
  }
  sol.iterations = sweep + 1;

  double rmax = 0.0;
  for (Index i = 1; i + 1 < n; ++i)
    if (u[i] > sol.phi[i] + 1e-10)
      rmax = std::max(rmax, std::abs((-u[i - 1] + 2.0 * u[i] - u[i + 1]) / (h * h)));
  sol.residual_norm = rmax;
  if (sweep >= kMaxSweeps)
    throw std::runtime_error("psor_1d: no convergence in 1e6 sweeps, residual " +
                             std::to_string(rmax));
  finalize_contact_1d(sol);
  return sol;
}

GridSolution psor_2d(const Scalar2D& obstacle, const Scalar2D& boundary_data,
                     const Domain& domain, Index n, double omega, double tol_iter) {
  if (n < 3) throw std::invalid_argument("psor_2d: n must be >= 3");
  if (!(omega > 1.0 && omega < 2.0)) throw std::invalid_argument("psor_2d: need 1 < omega < 2");
  const double hx = (domain.hi[0] - domain.lo[0]) / static_cast<double>(n - 1);
  const double hy = (domain.hi[1] - domain.lo[1]) / static_cast<double>(n - 1);
  if (std::abs(hx - hy) > 1e-14)
    throw std::invalid_argument("psor_2d: requires a square grid");

  GridSolution sol;
  sol.dim = 2;
  sol.n = n;
  const Index m = n * n;
  sol.points.resize(2, m);
  sol.phi.resize(m);
  sol.values.resize(m);

  auto at = [&](Index ix, Index iy) { return iy * n + ix; };
  double gsum = 0.0;
  Index gcount = 0;
  for (Index iy = 0; iy < n; ++iy)
    for (Index ix = 0; ix < n; ++ix) {
      const double x = domain.lo[0] + static_cast<double>(ix) * hx;
      const double y = domain.lo[1] + static_cast<double>(iy) * hy;
      const Index id = at(ix, iy);
      sol.points.col(id) << x, y;
      sol.phi[id] = obstacle(x, y);
      if (ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1) {
        sol.values[id] = boundary_data(x, y);
        gsum += sol.values[id];
        ++gcount;
      }
    }
  const double gmean = gsum / static_cast<double>(gcount);
  for (Index iy = 1; iy + 1 < n; ++iy)
    for (Index ix = 1; ix + 1 < n; ++ix)
      sol.values[at(ix, iy)] = std::max(sol.phi[at(ix, iy)], gmean);

  Vec& u = sol.values;
  long sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (Index iy = 1; iy + 1 < n; ++iy)
      for (Index ix = 1; ix + 1 < n; ++ix) {
        const Index id = at(ix, iy);
        const double gs =
            0.25 * (u[id - 1] + u[id + 1] + u[id - n] + u[id + n]);
        const double cand = u[id] + omega * (gs - u[id]);
        const double next = std::max(sol.phi[id], cand);
        change = std::max(change, std::abs(next - u[id]));
        u[id] = next;
      }
    if (change < 0.25 * tol_iter) break;
  }
  sol.iterations = sweep + 1;

  const double h2 = hx * hx;
  double rmax = 0.0;
  for (Index iy = 1; iy + 1 < n; ++iy)
    for (Index ix = 1; ix + 1 < n; ++ix) {
      const Index id = at(ix, iy);
      if (u[id] > sol.phi[id] + 1e-10)
        rmax = std::max(rmax,
                        std::abs((4.0 * u[id] - u[id - 1] - u[id + 1] - u[id - n] - u[id + n]) / h2));
    }
  sol.residual_norm = rmax;
  if (sweep >= kMaxSweeps)
    throw std::runtime_error("psor_2d: no convergence in 1e6 sweeps, residual " +
                             std::to_string(rmax));

  const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
  sol.contact.assign(m, 0);
  for (Index i = 0; i < m; ++i)
    sol.contact[i] = std::abs(u[i] - sol.phi[i]) <= 1e-10 * scale ? 1 : 0;
  std::vector<double> fbx, fby;
  for (Index iy = 0; iy < n; ++iy)
    for (Index ix = 0; ix + 1 < n; ++ix)
      if (sol.contact[at(ix, iy)] != sol.contact[at(ix + 1, iy)]) {
        fbx.push_back(0.5 * (sol.points(0, at(ix, iy)) + sol.points(0, at(ix + 1, iy))));
        fby.push_back(sol.points(1, at(ix, iy)));
      }
  for (Index ix = 0; ix < n; ++ix)
    for (Index iy = 0; iy + 1 < n; ++iy)
      if (sol.contact[at(ix, iy)] != sol.contact[at(ix, iy + 1)]) {
        fbx.push_back(sol.points(0, at(ix, iy)));
        fby.push_back(0.5 * (sol.points(1, at(ix, iy)) + sol.points(1, at(ix, iy + 1))));
      }
  sol.free_boundary.resize(2, static_cast<Index>(fbx.size()));
  for (size_t k = 0; k < fbx.size(); ++k)
    sol.free_boundary.col(static_cast<Index>(k)) << fbx[k], fby[k];
  return sol;
}

// The discrete minimizer of the polyline length above point obstacles is the
// upper convex hull of {(x_0,g0), (x_i,phi_i), (x_{n-1},g1)} (a convex kink
// could always be straightened without leaving the feasible set). The hull
// gives an exact feasible warm start; the projected-gradient loop below then
// verifies stationarity and polishes roundoff. Cold-started descent cannot
// traverse the slope-weighted stiffness of this energy within the iteration
// cap at fine resolutions.
static Vec taut_string_start(const Vec& x, const Vec& phi, double g0, double g1) {
  const Index n = x.size();
  Vec v = phi;
  v[0] = g0;
  v[n - 1] = g1;
  std::vector<Index> hull;
  auto keeps_concave = [&](Index a, Index b, Index c) {
    // pop b unless the turn a->b->c is strictly concave (right turn)
    return (x[b] - x[a]) * (v[c] - v[a]) - (x[c] - x[a]) * (v[b] - v[a]) < 0.0;
  };
  for (Index i = 0; i < n; ++i) {
    while (hull.size() >= 2 && !keeps_concave(hull[hull.size() - 2], hull.back(), i))
      hull.pop_back();
    hull.push_back(i);
  }
  Vec u(n);
  for (size_t seg = 0; seg + 1 < hull.size(); ++seg) {
    const Index a = hull[seg], b = hull[seg + 1];
    u[a] = v[a];
    for (Index i = a + 1; i < b; ++i)
      u[i] = v[a] + (v[b] - v[a]) * (x[i] - x[a]) / (x[b] - x[a]);
  }
  u[n - 1] = v[n - 1];
  return u;
}

GridSolution membrane_oracle(const Scalar1D& obstacle, double g0, double g1, Index n) {
  if (n < 3) throw std::invalid_argument("membrane_oracle: n must be >= 3");
  const double h = 1.0 / static_cast<double>(n - 1);

  GridSolution sol;
  sol.dim = 1;
  sol.n = n;
  sol.points.resize(1, n);
  sol.phi.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * h;
    sol.points(0, i) = x;
    sol.phi[i] = obstacle(x);
  }
  sol.values = taut_string_start(sol.points.row(0).transpose(), sol.phi, g0, g1);
  for (Index i = 1; i + 1 < n; ++i) sol.values[i] = std::max(sol.values[i], sol.phi[i]);

  Vec& u = sol.values;
  auto energy = [&](const Vec& v) {
    double e = 0.0;
    for (Index i = 0; i + 1 < n; ++i) {
      const double s = (v[i + 1] - v[i]) / h;
      e += h * std::sqrt(1.0 + s * s);
    }
    return e;
  };
  auto gradient = [&](const Vec& v, Vec& g) {
    g.setZero(n);
    for (Index i = 1; i + 1 < n; ++i) {
      const double sl = (v[i] - v[i - 1]) / h;
      const double sr = (v[i + 1] - v[i]) / h;
      g[i] = sl / std::sqrt(1.0 + sl * sl) - sr / std::sqrt(1.0 + sr * sr);
    }
  };
  auto project = [&](Vec& v) {
    for (Index i = 1; i + 1 < n; ++i) v[i] = std::max(v[i], sol.phi[i]);
  };

  Vec g(n), g_prev(n), u_prev(n), trial(n);
  gradient(u, g);
  double f = energy(u);
  double alpha = 1.0;
  bool use_bb1 = true;
  std::deque<double> recent{f};  // nonmonotone Armijo reference window
  long iter = 0;
  double pg_norm = 0.0;
  for (; iter < kMaxSweeps; ++iter) {
    // projected-gradient stationarity with unit step
    pg_norm = 0.0;
    for (Index i = 1; i + 1 < n; ++i) {
      const double moved = std::max(sol.phi[i], u[i] - g[i]);
      pg_norm = std::max(pg_norm, std::abs(u[i] - moved));
    }
    if (pg_norm < 1e-8) break;

    // backtracking along the projection arc
    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double t = 1.0;
    double f_new = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      trial = u - (t * alpha) * g;
      project(trial);
      trial[0] = g0;
      trial[n - 1] = g1;
      f_new = energy(trial);
      if (f_new <= f_ref + 1e-4 * g.dot(trial - u)) break;
      t *= 0.5;
    }
    u_prev = u;
    g_prev = g;
    u = trial;
    f = f_new;
    gradient(u, g);
    recent.push_back(f);
    if (recent.size() > 10) recent.pop_front();

    // alternating Barzilai-Borwein step lengths
    const Vec s = u - u_prev;
    const Vec y = g - g_prev;
    const double sy = s.dot(y);
    const double bb = use_bb1 ? s.dot(s) / sy : sy / y.dot(y);
    use_bb1 = !use_bb1;
    alpha = (sy > 1e-16 && std::isfinite(bb) && bb > 0.0)
                ? std::min(1e10, std::max(1e-10, bb))
                : alpha * 2.0;
  }
  sol.iterations = iter;
  sol.residual_norm = pg_norm;
  if (iter >= kMaxSweeps)
    throw std::runtime_error("membrane_oracle: no convergence in 1e6 iterations");

  // projection semantics: contact nodes carry the obstacle value exactly
  for (Index i = 1; i + 1 < n; ++i)
    if (std::abs(u[i] - sol.phi[i]) <= 1e-9) u[i] = sol.phi[i];
  finalize_contact_1d(sol);
  return sol;
}

}  // namespace opinn
