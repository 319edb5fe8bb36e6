#include "opinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opinn/autodiff.hpp"
#include "opinn/loss.hpp"
#include "opinn/residuals.hpp"

namespace opinn {

double default_contact_delta(const ProblemSpec& problem) {
  return 1e-3 * solution_scale(problem);
}

ContactSet contact_set(const Vec& values, const Vec& obstacle_values, double delta,
                       const Mat& grid, Index resolution) {
  if (values.size() != obstacle_values.size() || values.size() != grid.cols())
    throw std::invalid_argument("contact_set: array sizes disagree");
  if (delta <= 0.0) throw std::invalid_argument("contact_set: delta must be positive");
  const Index m = values.size();
  ContactSet cs;
  cs.mask.assign(m, 0);
  for (Index i = 0; i < m; ++i)
    cs.mask[i] = std::abs(values[i] - obstacle_values[i]) <= delta ? 1 : 0;

  const int dim = static_cast<int>(grid.rows());
  std::vector<double> fbx, fby;
  if (dim == 1) {
    for (Index i = 0; i + 1 < m; ++i)
      if (cs.mask[i] != cs.mask[i + 1]) {
        fbx.push_back(0.5 * (grid(0, i) + grid(0, i + 1)));
        fby.push_back(0.0);
      }
  } else {
    const Index n = resolution;
    auto at = [&](Index ix, Index iy) { return iy * n + ix; };
    for (Index iy = 0; iy < n; ++iy)
      for (Index ix = 0; ix + 1 < n; ++ix)
        if (cs.mask[at(ix, iy)] != cs.mask[at(ix + 1, iy)]) {
          fbx.push_back(0.5 * (grid(0, at(ix, iy)) + grid(0, at(ix + 1, iy))));
          fby.push_back(grid(1, at(ix, iy)));
        }
    for (Index ix = 0; ix < n; ++ix)
      for (Index iy = 0; iy + 1 < n; ++iy)
        if (cs.mask[at(ix, iy)] != cs.mask[at(ix, iy + 1)]) {
          fbx.push_back(grid(0, at(ix, iy)));
          fby.push_back(0.5 * (grid(1, at(ix, iy)) + grid(1, at(ix, iy + 1))));
        }
  }
  cs.free_boundary.resize(dim, static_cast<Index>(fbx.size()));
  for (size_t k = 0; k < fbx.size(); ++k) {
    cs.free_boundary(0, static_cast<Index>(k)) = fbx[k];
    if (dim == 2) cs.free_boundary(1, static_cast<Index>(k)) = fby[k];
  }
  return cs;
}

static Vec lifted_values(const NetworkParams& net, const ProblemSpec& problem, const Mat& grid) {
  JetEvaluator ev(net.arch);
  const JetBatch& raw = ev.forward(net, grid, 0);
  const int d = problem.domain.dim;
  Vec out(grid.cols());
  for (Index i = 0; i < grid.cols(); ++i) {
    const double x = grid(0, i), y = d == 2 ? grid(1, i) : 0.0;
    out[i] = problem.lift.g(x, y).value + problem.lift.eta(x, y).value * raw.value[i];
  }
  return out;
}

ErrorReport error_map_from_values(const Vec& u_hat, const ProblemSpec& problem, const Mat& grid,
                                  const Vec& u_ref, double contact_delta) {
  if (u_hat.size() != grid.cols() || u_ref.size() != grid.cols())
    throw std::invalid_argument("error_map: value array does not match grid");
  ErrorReport rep;
  rep.grid = grid;
  rep.u_hat = u_hat;
  rep.u_ref = u_ref;
  rep.contact_delta = contact_delta > 0.0 ? contact_delta : default_contact_delta(problem);

  const int d = problem.domain.dim;
  const Index m = grid.cols();
  rep.phi.resize(m);
  for (Index i = 0; i < m; ++i)
    rep.phi[i] = problem.obstacle(grid(0, i), d == 2 ? grid(1, i) : 0.0).value;
  rep.abs_err = (u_hat - u_ref).cwiseAbs();

  rep.linf = 0.0;
  rep.feasibility_min = 1e300;
  for (Index i = 0; i < m; ++i) {
    if (rep.abs_err[i] > rep.linf) {
      rep.linf = rep.abs_err[i];
      rep.linf_location << grid(0, i), d == 2 ? grid(1, i) : 0.0;
    }
    rep.feasibility_min = std::min(rep.feasibility_min, u_hat[i] - rep.phi[i]);
  }
  rep.contact.assign(m, 0);
  for (Index i = 0; i < m; ++i)
    rep.contact[i] = std::abs(u_hat[i] - rep.phi[i]) <= rep.contact_delta ? 1 : 0;
  return rep;
}

ErrorReport error_map(const NetworkParams& net, const ProblemSpec& problem, const Mat& grid,
                      const Vec* u_ref_override, double contact_delta) {
  const int d = problem.domain.dim;
  Vec u_ref;
  if (u_ref_override != nullptr) {
    u_ref = *u_ref_override;
  } else if (problem.exact) {
    u_ref.resize(grid.cols());
    for (Index i = 0; i < grid.cols(); ++i)
      u_ref[i] = (*problem.exact)(grid(0, i), d == 2 ? grid(1, i) : 0.0).value;
  } else {
    throw std::invalid_argument("error_map: no exact solution for " + problem.id +
                                "; supply an oracle reference");
  }

  ErrorReport rep = error_map_from_values(lifted_values(net, problem, grid), problem, grid,
                                          u_ref, contact_delta);

  const Mat bnd = boundary_samples(problem, 200);
  rep.boundary_max_err = 0.0;
  for (Index i = 0; i < bnd.cols(); ++i) {
    const double x = bnd(0, i), y = d == 2 ? bnd(1, i) : 0.0;
    const DiffBundle ub = lifted_eval(net, problem.lift, problem.domain, x, y);
    rep.boundary_max_err =
        std::max(rep.boundary_max_err, std::abs(ub.value - problem.lift.g(x, y).value));
  }
  if (problem.enforced == EnforcedBoundary::x_edges_only) {
    rep.y_edge_max_err = 0.0;
    const Index ny = 100;
    for (Index i = 0; i < ny; ++i) {
      const double x = problem.domain.lo[0] +
                       (problem.domain.hi[0] - problem.domain.lo[0]) *
                           static_cast<double>(i) / static_cast<double>(ny - 1);
      for (const double y : {problem.domain.lo[1], problem.domain.hi[1]}) {
        const DiffBundle ub = lifted_eval(net, problem.lift, problem.domain, x, y);
        rep.y_edge_max_err =
            std::max(rep.y_edge_max_err, std::abs(ub.value - problem.lift.g(x, y).value));
      }
    }
  }
  return rep;
}

ComplementaritySummary complementarity_report(const NetworkParams& net,
                                              const ProblemSpec& problem, const Mat& grid,
                                              double delta) {
  const int d = problem.domain.dim;
  // interior points only
  std::vector<Index> interior;
  for (Index i = 0; i < grid.cols(); ++i)
    if (problem.domain.strictly_inside(grid(0, i), d == 2 ? grid(1, i) : 0.0))
      interior.push_back(i);
  Mat Xi(d, static_cast<Index>(interior.size()));
  for (size_t k = 0; k < interior.size(); ++k) Xi.col(static_cast<Index>(k)) = grid.col(interior[k]);

  const PointBatch batch = make_batch(problem, Xi);
  JetEvaluator ev(net.arch);
  const JetBatch& raw = ev.forward(net, Xi, 2);
  const JetBatch hat = apply_lift(raw, batch);
  const ResidualBatch rb = residual_batch(problem.op, problem.p_exponent, hat);

  ComplementaritySummary sum;
  std::vector<double> off;
  sum.min_residual = 1e300;
  for (Index i = 0; i < Xi.cols(); ++i) {
    const double gap = hat.value[i] - batch.phi[i];
    sum.min_residual = std::min(sum.min_residual, rb.R[i]);
    if (gap < 0.0 && std::abs(gap) > delta) {
      ++sum.feasibility_violations;
      continue;  // infeasible points are excluded from non-contact statistics
    }
    if (gap > delta) off.push_back(std::abs(rb.R[i]));
  }
  sum.offcontact_count = static_cast<Index>(off.size());
  if (!off.empty()) {
    std::sort(off.begin(), off.end());
    const size_t mid = off.size() / 2;
    sum.median_abs_residual_offcontact =
        off.size() % 2 == 1 ? off[mid] : 0.5 * (off[mid - 1] + off[mid]);
    sum.max_abs_residual_offcontact = off.back();
  }
  return sum;
}

Vec interpolate_oracle(const GridSolution& sol, const Domain& domain, const Mat& grid) {
  Vec out(grid.cols());
  const Index n = sol.n;
  if (sol.dim == 1) {
    const double h = 1.0 / static_cast<double>(n - 1);
    for (Index i = 0; i < grid.cols(); ++i) {
      const double x = grid(0, i);
      const double t = x / h;
      const Index i0 = std::min<Index>(n - 2, std::max<Index>(0, static_cast<Index>(t)));
      const double w = t - static_cast<double>(i0);
      out[i] = (1.0 - w) * sol.values[i0] + w * sol.values[i0 + 1];
    }
    return out;
  }
  const double hx = (domain.hi[0] - domain.lo[0]) / static_cast<double>(n - 1);
  const double hy = (domain.hi[1] - domain.lo[1]) / static_cast<double>(n - 1);
  for (Index i = 0; i < grid.cols(); ++i) {
    const double tx = (grid(0, i) - domain.lo[0]) / hx;
    const double ty = (grid(1, i) - domain.lo[1]) / hy;
    const Index ix = std::min<Index>(n - 2, std::max<Index>(0, static_cast<Index>(tx)));
    const Index iy = std::min<Index>(n - 2, std::max<Index>(0, static_cast<Index>(ty)));
    const double wx = tx - static_cast<double>(ix);
    const double wy = ty - static_cast<double>(iy);
    auto v = [&](Index a, Index b) { return sol.values[b * n + a]; };
    out[i] = (1.0 - wx) * (1.0 - wy) * v(ix, iy) + wx * (1.0 - wy) * v(ix + 1, iy) +
             (1.0 - wx) * wy * v(ix, iy + 1) + wx * wy * v(ix + 1, iy + 1);
  }
  return out;
}

}  // namespace opinn
