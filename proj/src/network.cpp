#include "opinn/network.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "opinn/autodiff.hpp"
#include "opinn/rng.hpp"

namespace opinn {

void Architecture::validate() const {
  if (input_dim != 1 && input_dim != 2)
    throw std::invalid_argument("Architecture: input_dim must be 1 or 2");
  // layers == 0 is a bare linear map, allowed for the evaluation engine;
  // training configurations require at least one hidden layer.
  if (layers < 0) throw std::invalid_argument("Architecture: layers must be >= 0");
  if (nodes < 1) throw std::invalid_argument("Architecture: nodes must be >= 1");
}

Index Architecture::param_count() const {
  Index count = 0;
  int fan_in = input_dim;
  for (int l = 0; l < layers; ++l) {
    count += static_cast<Index>(nodes) * fan_in + nodes;
    fan_in = nodes;
  }
  count += fan_in + 1;  // linear output unit
  return count;
}

static void layer_shape(const Architecture& arch, int l, int& rows, int& cols) {
  const int last = arch.layers;
  rows = (l == last) ? 1 : arch.nodes;
  cols = (l == 0) ? arch.input_dim : arch.nodes;
}

NetworkParams zeros_like(const Architecture& arch) {
  arch.validate();
  NetworkParams p;
  p.arch = arch;
  p.weights.resize(arch.layers + 1);
  p.biases.resize(arch.layers + 1);
  for (int l = 0; l <= arch.layers; ++l) {
    int rows, cols;
    layer_shape(arch, l, rows, cols);
    p.weights[l] = Mat::Zero(rows, cols);
    p.biases[l] = Vec::Zero(rows);
  }
  return p;
}

NetworkParams init_params(const Architecture& arch, uint64_t seed) {
  NetworkParams p = zeros_like(arch);
  Xoshiro256 rng(seed);
  for (int l = 0; l <= arch.layers; ++l) {
    Mat& W = p.weights[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    for (Index r = 0; r < W.rows(); ++r)
      for (Index c = 0; c < W.cols(); ++c)
        W(r, c) = rng.uniform(-limit, limit);
    // biases stay zero
  }
  return p;
}

Vec flatten(const NetworkParams& params) {
  Vec theta(params.arch.param_count());
  Index at = 0;
  for (int l = 0; l <= params.arch.layers; ++l) {
    const Mat& W = params.weights[l];
    for (Index r = 0; r < W.rows(); ++r)
      for (Index c = 0; c < W.cols(); ++c) theta[at++] = W(r, c);
    const Vec& b = params.biases[l];
    theta.segment(at, b.size()) = b;
    at += b.size();
  }
  return theta;
}

void unflatten_into(const Vec& theta, NetworkParams& params) {
  if (theta.size() != params.arch.param_count())
    throw std::invalid_argument("unflatten: parameter vector length mismatch");
  Index at = 0;
  for (int l = 0; l <= params.arch.layers; ++l) {
    Mat& W = params.weights[l];
    for (Index r = 0; r < W.rows(); ++r)
      for (Index c = 0; c < W.cols(); ++c) W(r, c) = theta[at++];
    Vec& b = params.biases[l];
    b = theta.segment(at, b.size());
    at += b.size();
  }
}

NetworkParams unflatten(const Architecture& arch, const Vec& theta) {
  NetworkParams p = zeros_like(arch);
  unflatten_into(theta, p);
  return p;
}

std::string serialize_params(const NetworkParams& params) {
  nlohmann::json j;
  j["format"] = "opinn-params-v1";
  j["input_dim"] = params.arch.input_dim;
  j["layers"] = params.arch.layers;
  j["nodes"] = params.arch.nodes;
  const Vec theta = flatten(params);
  j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return j.dump(2);
}

NetworkParams deserialize_params(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.contains("format") || j["format"] != "opinn-params-v1")
    throw std::invalid_argument("params snapshot: unknown format");
  Architecture arch;
  arch.input_dim = j.at("input_dim").get<int>();
  arch.layers = j.at("layers").get<int>();
  arch.nodes = j.at("nodes").get<int>();
  arch.validate();
  const auto values = j.at("theta").get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != arch.param_count())
    throw std::invalid_argument("params snapshot: theta length does not match architecture");
  Vec theta = Eigen::Map<const Vec>(values.data(), static_cast<Index>(values.size()));
  return unflatten(arch, theta);
}

DiffBundle lifted_eval(const NetworkParams& net, const BoundaryLift& lift,
                       const Domain& domain, double x, double y) {
  if (!domain.contains_closure(x, y))
    throw std::domain_error("lifted_eval: point outside domain closure");
  const DiffBundle u = eval_with_input_derivs(net, x, y);
  const DiffBundle g = lift.g(x, y);
  const DiffBundle eta = lift.eta(x, y);
  const int d = net.arch.input_dim;

  DiffBundle out;
  out.dim = d;
  out.value = g.value + eta.value * u.value;
  for (int j = 0; j < d; ++j)
    out.grad[j] = g.grad[j] + eta.grad[j] * u.value + eta.value * u.grad[j];
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      out.hess(j, k) = g.hess(j, k) + eta.hess(j, k) * u.value +
                       eta.grad[j] * u.grad[k] + eta.grad[k] * u.grad[j] +
                       eta.value * u.hess(j, k);
  return out;
}

}  // namespace opinn
