#include "opinn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "opinn/residuals.hpp"

namespace opinn {

PointBatch make_batch(const ProblemSpec& problem, const Mat& X) {
  if (X.cols() == 0) throw std::invalid_argument("make_batch: empty point batch");
  const int d = problem.domain.dim;
  if (X.rows() != d) throw std::invalid_argument("make_batch: point dimension mismatch");
  const Index N = X.cols();
  const int s = hess_channels(d);

  PointBatch b;
  b.dim = d;
  b.X = X;
  b.phi.resize(N);
  b.g_val.resize(N);
  b.eta_val.resize(N);
  b.g_grad.resize(d, N);
  b.eta_grad.resize(d, N);
  b.g_hess.resize(s, N);
  b.eta_hess.resize(s, N);
  for (Index i = 0; i < N; ++i) {
    const double x = X(0, i), y = d == 2 ? X(1, i) : 0.0;
    b.phi[i] = problem.obstacle(x, y).value;
    const DiffBundle g = problem.lift.g(x, y);
    const DiffBundle eta = problem.lift.eta(x, y);
    b.g_val[i] = g.value;
    b.eta_val[i] = eta.value;
    for (int j = 0; j < d; ++j) {
      b.g_grad(j, i) = g.grad[j];
      b.eta_grad(j, i) = eta.grad[j];
    }
    for (int ch = 0; ch < s; ++ch) {
      int j, k;
      hess_pair(d, ch, j, k);
      b.g_hess(ch, i) = g.hess(j, k);
      b.eta_hess(ch, i) = eta.hess(j, k);
    }
  }
  b.order.resize(N);
  std::iota(b.order.begin(), b.order.end(), Index{0});
  std::sort(b.order.begin(), b.order.end(), [&](Index a, Index c) {
    if (X(0, a) != X(0, c)) return X(0, a) < X(0, c);
    return d == 2 && X(1, a) < X(1, c);
  });
  return b;
}

JetBatch apply_lift(const JetBatch& raw, const PointBatch& b) {
  const int d = b.dim;
  const int s = hess_channels(d);
  const Index N = b.phi.size();
  JetBatch hat;
  hat.value.resize(N);
  hat.value.array() = b.g_val.array() + b.eta_val.array() * raw.value.array();
  hat.grad.resize(d, N);
  const auto eta = b.eta_val.transpose().array();
  const auto uval = raw.value.transpose().array();
  for (int j = 0; j < d; ++j)
    hat.grad.row(j).array() = b.g_grad.row(j).array() + b.eta_grad.row(j).array() * uval +
                              eta * raw.grad.row(j).array();
  hat.hess.resize(s, N);
  for (int ch = 0; ch < s; ++ch) {
    int j, k;
    hess_pair(d, ch, j, k);
    hat.hess.row(ch).array() = b.g_hess.row(ch).array() + b.eta_hess.row(ch).array() * uval +
                               b.eta_grad.row(j).array() * raw.grad.row(k).array() +
                               b.eta_grad.row(k).array() * raw.grad.row(j).array() +
                               eta * raw.hess.row(ch).array();
  }
  return hat;
}

namespace {

struct Seeds {
  Vec val;
  Mat grad, hess;
  void setZero(int d, Index N) {
    val = Vec::Zero(N);
    grad = Mat::Zero(d, N);
    hess = Mat::Zero(hess_channels(d), N);
  }
};

struct LossCore {
  LossBreakdown bd;   // combined-loss bookkeeping (obstacle part unweighted)
  Seeds res, obs;     // partials of each part w.r.t. the u_hat jets
};

void check_finite(const JetBatch& hat) {
  for (Index i = 0; i < hat.value.size(); ++i) {
    if (!std::isfinite(hat.value[i]) || !hat.grad.col(i).allFinite() ||
        !hat.hess.col(i).allFinite())
      throw std::runtime_error("loss: NaN detected at point index " + std::to_string(i));
  }
}

LossCore loss_core(JetEvaluator& ev, const NetworkParams& net, const ProblemSpec& problem,
                   const PointBatch& b, bool want_seeds) {
  const Index N = b.X.cols();
  if (N == 0) throw std::invalid_argument("loss: empty point batch");
  const int d = b.dim;

  const JetBatch& raw = ev.forward(net, b.X, 2);
  const JetBatch hat = apply_lift(raw, b);
  check_finite(hat);
  const ResidualBatch rb = residual_batch(problem.op, problem.p_exponent, hat);

  LossCore core;
  if (want_seeds) {
    core.res.setZero(d, N);
    core.obs.setZero(d, N);
  }

  double res_sum = 0.0, obs_sum = 0.0;
  Index active = 0;
  const double invN = 1.0 / static_cast<double>(N);
  for (Index idx : b.order) {
    const double gap = hat.value[idx] - b.phi[idx];
    double term;
    if (heaviside(gap)) {
      const double r = rb.R[idx];
      term = r * r;
      res_sum += term;
      ++active;
      if (want_seeds) {
        const double c = 2.0 * r * invN;
        core.res.grad.col(idx) = c * rb.dR_dgrad.col(idx);
        core.res.hess.col(idx) = c * rb.dR_dhess.col(idx);
      }
    } else {
      term = gap * gap;  // ReLU(phi - u_hat) = -gap > 0 here
      obs_sum += term;
      if (want_seeds) core.obs.val[idx] = 2.0 * gap * invN;
    }
    if (!std::isfinite(term))
      throw std::runtime_error("loss: NaN detected at point index " + std::to_string(idx));
  }
  core.bd.residual_part = res_sum * invN;
  core.bd.obstacle_part = obs_sum * invN;
  core.bd.total = core.bd.residual_part + core.bd.obstacle_part;
  core.bd.active_fraction = static_cast<double>(active) * invN;
  return core;
}

// Chain rule through u_hat = g + eta*u: partials w.r.t. the raw jets.
Seeds chain_to_raw(const Seeds& t, const PointBatch& b) {
  const int d = b.dim;
  const int s = hess_channels(d);
  const Index N = b.phi.size();
  const auto eta = b.eta_val.transpose().array();

  Seeds raw;
  Eigen::RowVectorXd acc = t.val.transpose().cwiseProduct(b.eta_val.transpose());
  for (int j = 0; j < d; ++j)
    acc.array() += t.grad.row(j).array() * b.eta_grad.row(j).array();
  for (int ch = 0; ch < s; ++ch)
    acc.array() += t.hess.row(ch).array() * b.eta_hess.row(ch).array();
  raw.val = acc.transpose();

  raw.grad.resize(d, N);
  for (int m = 0; m < d; ++m) raw.grad.row(m).array() = t.grad.row(m).array() * eta;
  for (int ch = 0; ch < s; ++ch) {
    int j, k;
    hess_pair(d, ch, j, k);
    raw.grad.row(j).array() += t.hess.row(ch).array() * b.eta_grad.row(k).array();
    raw.grad.row(k).array() += t.hess.row(ch).array() * b.eta_grad.row(j).array();
  }

  raw.hess.resize(s, N);
  for (int ch = 0; ch < s; ++ch) raw.hess.row(ch).array() = t.hess.row(ch).array() * eta;
  return raw;
}

Seeds add_seeds(const Seeds& a, const Seeds& c) {
  Seeds out;
  out.val = a.val + c.val;
  out.grad = a.grad + c.grad;
  out.hess = a.hess + c.hess;
  return out;
}

}  // namespace

LossBreakdown combined_loss(const NetworkParams& net, const ProblemSpec& problem, const Mat& X) {
  JetEvaluator ev(net.arch);
  const PointBatch b = make_batch(problem, X);
  return loss_core(ev, net, problem, b, false).bd;
}

LossBreakdown separated_loss(const NetworkParams& net, const ProblemSpec& problem, const Mat& X,
                             const ObstacleWeight& w) {
  JetEvaluator ev(net.arch);
  const PointBatch b = make_batch(problem, X);
  LossBreakdown bd = loss_core(ev, net, problem, b, false).bd;
  bd.obstacle_part *= w.lambda_obs;
  bd.total = bd.residual_part + bd.obstacle_part;
  return bd;
}

LossGradResult combined_loss_grad(JetEvaluator& ev, const NetworkParams& net,
                                  const ProblemSpec& problem, const PointBatch& batch) {
  LossCore core = loss_core(ev, net, problem, batch, true);
  const Seeds raw = chain_to_raw(add_seeds(core.res, core.obs), batch);
  LossGradResult out;
  out.breakdown = core.bd;
  out.grad = ev.backward(net, raw.val, raw.grad, raw.hess);
  return out;
}

SeparatedGradResult separated_loss_grad(JetEvaluator& ev, const NetworkParams& net,
                                        const ProblemSpec& problem, const PointBatch& batch,
                                        const ObstacleWeight& w) {
  LossCore core = loss_core(ev, net, problem, batch, true);
  const Seeds raw_res = chain_to_raw(core.res, batch);
  const Seeds raw_obs = chain_to_raw(core.obs, batch);
  SeparatedGradResult out;
  out.breakdown = core.bd;
  out.breakdown.obstacle_part *= w.lambda_obs;
  out.breakdown.total = out.breakdown.residual_part + out.breakdown.obstacle_part;
  out.grad_res = ev.backward(net, raw_res.val, raw_res.grad, raw_res.hess);
  out.grad_obs = ev.backward(net, raw_obs.val, raw_obs.grad, raw_obs.hess);
  out.grad = out.grad_res + w.lambda_obs * out.grad_obs;
  return out;
}

ObstacleWeight update_lambda(const ObstacleWeight& w, const Vec& grad_res, const Vec& grad_obs) {
  const double mean_obs = grad_obs.size() > 0 ? grad_obs.cwiseAbs().mean() : 0.0;
  if (mean_obs < 1e-12) return w;
  const double ratio = grad_res.cwiseAbs().maxCoeff() / mean_obs;
  ObstacleWeight out = w;
  out.lambda_obs = (1.0 - w.ema_rate) * w.lambda_obs + w.ema_rate * ratio;
  return out;
}

}  // namespace opinn
