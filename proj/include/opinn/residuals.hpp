#pragma once

#include "opinn/problems.hpp"
#include "opinn/types.hpp"

namespace opinn {

// PDE residual R(x) = N[u_hat](x) - f(x) from the jet of u_hat:
//   laplace1d    R = -u_xx
//   membrane1d   R = -u_xx * (1 + u_x^2)^(-3/2)
//   laplace2d    R = -(u_xx + u_yy)
//   plaplace2d   R = -div(|grad u|^(p-2) grad u) + 1, expanded for p = 4
double residual(OperatorTag tag, int p_exponent, const DiffBundle& b);

// Batched residual with partials w.r.t. the jet channels of u_hat, used to
// seed the reverse pass. Gradient rows are zero for the linear operators.
struct ResidualBatch {
  Vec R;          // N
  Mat dR_dgrad;   // dim x N
  Mat dR_dhess;   // hess_channels(dim) x N
};
ResidualBatch residual_batch(OperatorTag tag, int p_exponent, const JetBatch& lifted);

}  // namespace opinn
