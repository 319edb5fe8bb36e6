#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opinn/types.hpp"

namespace opinn {

// Fully-connected tanh MLP: `layers` hidden layers of `nodes` units each,
// tanh activations, one linear output unit.
struct Architecture {
  int input_dim = 1;
  int layers = 3;
  int nodes = 24;

  Index param_count() const;
  void validate() const;  // throws std::invalid_argument
};

// Per-layer weights and biases. weight[l] has shape rows(l) x cols(l);
// the flat ordering used everywhere (optimizers, snapshots, gradients) is
// layer-major: W^1 row-major, b^1, W^2 row-major, b^2, ...
struct NetworkParams {
  Architecture arch;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int layer_count() const { return arch.layers + 1; }
};

// Hard-boundary lift u_hat(x) = g(x) + eta(x) * u(x). Both fields carry
// analytic first and second derivatives.
struct BoundaryLift {
  AnalyticField g;
  AnalyticField eta;
};

NetworkParams init_params(const Architecture& arch, uint64_t seed);
NetworkParams zeros_like(const Architecture& arch);

Vec flatten(const NetworkParams& params);
NetworkParams unflatten(const Architecture& arch, const Vec& theta);
void unflatten_into(const Vec& theta, NetworkParams& params);

// JSON snapshot <-> params (format "opinn-params-v1").
std::string serialize_params(const NetworkParams& params);
NetworkParams deserialize_params(const std::string& json_text);

// Single-point lifted evaluation u_hat = g + eta*u with full jet.
// Throws std::domain_error if x is outside the domain closure.
struct ProblemSpec;  // problems.hpp
DiffBundle lifted_eval(const NetworkParams& net, const BoundaryLift& lift,
                       const Domain& domain, double x, double y = 0.0);

}  // namespace opinn
