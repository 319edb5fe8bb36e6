#pragma once

#include <cmath>
#include <functional>

#include "opinn/autodiff.hpp"
#include "opinn/network.hpp"
#include "opinn/rng.hpp"

namespace opinn::testing {

// Glorot-style random parameters plus non-zero random biases so nothing
// degenerate hides a sign error.
inline NetworkParams random_net(const Architecture& arch, uint64_t seed) {
  NetworkParams p = init_params(arch, seed);
  Xoshiro256 rng(seed ^ 0x5bd1e995u);
  for (auto& b : p.biases)
    for (Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.5, 0.5);
  return p;
}

// 4th-order central difference of a scalar function of theta.
inline double fd_derivative(const std::function<double(double)>& f, double t0, double h) {
  return (f(t0 - 2.0 * h) - 8.0 * f(t0 - h) + 8.0 * f(t0 + h) - f(t0 + 2.0 * h)) / (12.0 * h);
}

inline double raw_value(const NetworkParams& net, double x, double y = 0.0) {
  Mat X(net.arch.input_dim, 1);
  X(0, 0) = x;
  if (net.arch.input_dim == 2) X(1, 0) = y;
  return forward_jet(net, X, 0).value[0];
}

// 4th-order central differences of the raw network value w.r.t. inputs.
// (2nd-order stencils at h = 1e-4 bottom out near eps/h^2 ~ 2e-8 absolute,
// which is too coarse to certify 1e-6 relative agreement on small Hessians.)
inline double fd_grad_x(const NetworkParams& net, double x, double y, int axis, double h = 1e-3) {
  auto at = [&](double t) { return axis == 0 ? raw_value(net, t, y) : raw_value(net, x, t); };
  const double c = axis == 0 ? x : y;
  return (at(c - 2.0 * h) - 8.0 * at(c - h) + 8.0 * at(c + h) - at(c + 2.0 * h)) / (12.0 * h);
}

inline double fd_hess(const NetworkParams& net, double x, double y, int a, int b,
                      double h = 1e-3) {
  if (a == b) {
    auto at = [&](double t) { return a == 0 ? raw_value(net, t, y) : raw_value(net, x, t); };
    const double c = a == 0 ? x : y;
    return (-at(c - 2.0 * h) + 16.0 * at(c - h) - 30.0 * at(c) + 16.0 * at(c + h) -
            at(c + 2.0 * h)) /
           (12.0 * h * h);
  }
  // nested 4th-order first derivatives for the mixed partial
  auto dy_at = [&](double xx) {
    return (raw_value(net, xx, y - 2.0 * h) - 8.0 * raw_value(net, xx, y - h) +
            8.0 * raw_value(net, xx, y + h) - raw_value(net, xx, y + 2.0 * h)) /
           (12.0 * h);
  };
  return (dy_at(x - 2.0 * h) - 8.0 * dy_at(x - h) + 8.0 * dy_at(x + h) - dy_at(x + 2.0 * h)) /
         (12.0 * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-12, std::abs(want));
}

}  // namespace opinn::testing
