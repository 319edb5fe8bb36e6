#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "opinn/loss.hpp"
#include "opinn/network.hpp"
#include "opinn/problems.hpp"
#include "opinn/sampler.hpp"

namespace opinn {

struct AdamState {
  Vec m, v;
  long t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update in place. Throws on non-finite gradients.
void adam_step(AdamState& state, Vec& params, const Vec& grad);

// Objective fills `grad` and returns the function value.
using Objective = std::function<double(const Vec&, Vec&)>;

struct LbfgsOptions {
  int history = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-10;
};

struct LbfgsIterate {
  int iter = 0;
  double f = 0.0;
  double step = 0.0;
  bool armijo_ok = false;
  bool curvature_ok = false;
};

struct LbfgsResult {
  Vec x;
  double f = 0.0;
  int iters = 0;
  std::string termination;  // grad_tol | max_iters | line_search_failure
  std::vector<LbfgsIterate> trace;
};

LbfgsResult lbfgs_minimize(const Objective& objective, Vec x0, const LbfgsOptions& opts,
                           int max_iters);

enum class LossKind { combined, separated };

struct TrainConfig {
  uint64_t seed = 0;
  double tol = -1.0;             // < 0: use the catalog value
  long max_adam_iters = 50000;
  double adam_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int lbfgs_max_iters = 500;
  int lbfgs_history = 20;
  long log_every = 100;
  LossKind loss_kind = LossKind::combined;
  SampleMode sample_mode = SampleMode::fixed;
  Index n_points = -1;           // < 0: catalog value
  int layers = -1;               // < 0: catalog value
  int nodes = -1;
  ObstacleWeight lambda;         // separated loss only
};

struct TrainLogEntry {
  long iter = 0;
  int phase = 0;  // 0 adam, 1 lbfgs
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainReport {
  Architecture arch;
  Vec final_theta;
  std::vector<TrainLogEntry> trace;
  long adam_iters = 0;
  int lbfgs_iters = 0;
  double adam_final_loss = 0.0;
  double final_loss = 0.0;
  std::string termination;        // tol_reached | adam_cap_reached
  std::string lbfgs_termination;
  double wall_ms = 0.0;
  double lambda_final = 1.0;
  double tol = 0.0;
  Index n_points = 0;
};

// Adam until loss <= tol (or the iteration cap), then L-BFGS fine-tuning on
// the fixed collocation set. Deterministic given (problem, config).
TrainReport train(const ProblemSpec& problem, const TrainConfig& config);

}  // namespace opinn
