#pragma once

#include <vector>

#include "opinn/network.hpp"
#include "opinn/types.hpp"

namespace opinn {

// Exact derivatives of the raw network u(x;theta).
//
// Forward propagates, per layer, the value together with first and second
// input-derivative channels (a 2-jet):
//   Z   = W a + b,          S^j = W p^j,          T^jk = W q^jk,
//   a'  = tanh(Z),          p^j = tanh'(Z) .* S^j,
//   q^jk = tanh''(Z) .* S^j .* S^k + tanh'(Z) .* T^jk.
// backward() runs the adjoint of that recurrence, so parameter gradients of
// any scalar functional of (value, grad, hess) are exact to rounding.
// All channels of a batch are stacked side by side so each layer is a
// single GEMM.
class JetEvaluator {
 public:
  explicit JetEvaluator(const Architecture& arch);

  // order: 0 value only, 1 adds gradient, 2 adds Hessian channels.
  const JetBatch& forward(const NetworkParams& params, const Mat& X, int order = 2);
  const JetBatch& jets() const { return out_; }

  // seed_* = partials of the scalar objective w.r.t. the raw jets produced
  // by the last forward() (mixed channel counted once). Flat gradient in
  // canonical flatten() order.
  Vec backward(const NetworkParams& params, const Vec& seed_value,
               const Mat& seed_grad, const Mat& seed_hess) const;

 private:
  int channel_cols() const;
  void build_input_stack(int layer, Mat& dest) const;

  Architecture arch_;
  int order_ = 2;
  Index n_ = 0;
  Mat X_;
  // per hidden layer: value block = tanh(Z), derivative blocks = pre-activation S, T
  std::vector<Mat> state_;
  std::vector<Mat> in_stacks_;  // cached layer inputs, reused by backward()
  Mat out_stack_;
  JetBatch out_;
  mutable Mat zbar_, adj_;
  mutable Eigen::ArrayXXd d1_, d2_;
  mutable NetworkParams grads_;
};

JetBatch forward_jet(const NetworkParams& params, const Mat& X, int order = 2);

DiffBundle eval_with_input_derivs(const NetworkParams& params, const Vec& x);
DiffBundle eval_with_input_derivs(const NetworkParams& params, double x, double y = 0.0);

}  // namespace opinn
