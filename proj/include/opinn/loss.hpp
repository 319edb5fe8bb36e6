#pragma once

#include <vector>

#include "opinn/autodiff.hpp"
#include "opinn/problems.hpp"
#include "opinn/types.hpp"

namespace opinn {

// Heaviside gate with H(0) = 1; frozen per evaluation, no derivative flows
// through it.
inline int heaviside(double v) { return v >= 0.0 ? 1 : 0; }

struct LossBreakdown {
  double total = 0.0;
  double residual_part = 0.0;
  double obstacle_part = 0.0;
  double active_fraction = 0.0;  // fraction of points with H = 1
};

struct ObstacleWeight {
  double lambda_obs = 1.0;
  double ema_rate = 0.1;
  int update_period = 10;
};

// Collocation batch with everything that is fixed given (problem, points):
// obstacle values, analytic lift jets, and the deterministic reduction order
// (points sorted lexicographically, so totals are permutation-invariant).
struct PointBatch {
  int dim = 1;
  Mat X;                      // dim x N
  Vec phi;                    // N
  Vec g_val, eta_val;         // N
  Mat g_grad, eta_grad;       // dim x N
  Mat g_hess, eta_hess;       // channels x N
  std::vector<Index> order;   // reduction order
};

PointBatch make_batch(const ProblemSpec& problem, const Mat& X);

// Jets of u_hat = g + eta * u from the raw network jets.
JetBatch apply_lift(const JetBatch& raw, const PointBatch& batch);

// Pointwise combined loss: |H(u_hat - phi) * R + ReLU(phi - u_hat)|^2,
// averaged over the batch. The two branches are disjoint per point.
LossBreakdown combined_loss(const NetworkParams& net, const ProblemSpec& problem, const Mat& X);

// Separated baseline: mean |H*R|^2 + lambda_obs * mean |ReLU(phi - u_hat)|^2.
LossBreakdown separated_loss(const NetworkParams& net, const ProblemSpec& problem, const Mat& X,
                             const ObstacleWeight& w);

struct LossGradResult {
  LossBreakdown breakdown;
  Vec grad;
};
LossGradResult combined_loss_grad(JetEvaluator& ev, const NetworkParams& net,
                                  const ProblemSpec& problem, const PointBatch& batch);

struct SeparatedGradResult {
  LossBreakdown breakdown;
  Vec grad;       // grad_res + lambda * grad_obs
  Vec grad_res;   // gradient of the gated residual mean-square
  Vec grad_obs;   // gradient of the unweighted obstacle mean-square
};
SeparatedGradResult separated_loss_grad(JetEvaluator& ev, const NetworkParams& net,
                                        const ProblemSpec& problem, const PointBatch& batch,
                                        const ObstacleWeight& w);

// EMA auto-tuning of lambda_obs from gradient statistics:
//   lambda <- (1-r)*lambda + r * max|grad_res| / mean|grad_obs|,
// unchanged when mean|grad_obs| < 1e-12. The published description of this
// weight only names back-propagated gradient statistics; the concrete rule
// here is the standard max-to-mean annealing reconstruction.
ObstacleWeight update_lambda(const ObstacleWeight& w, const Vec& grad_res, const Vec& grad_obs);

}  // namespace opinn
