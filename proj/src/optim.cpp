#include "opinn/optim.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace opinn {

void adam_step(AdamState& state, Vec& params, const Vec& grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (!grad.allFinite()) throw std::runtime_error("adam_step: NaN detected in gradient");
  if (state.m.size() != params.size()) {
    state.m = Vec::Zero(params.size());
    state.v = Vec::Zero(params.size());
    state.t = 0;
  }
  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v.array() = state.beta2 * state.v.array() + (1.0 - state.beta2) * grad.array().square();
  const double mc = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double vc = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -=
      state.lr * (state.m.array() / mc) / ((state.v.array() / vc).sqrt() + state.eps);
}

namespace {

struct LinePoint {
  double a = 0.0, f = 0.0, df = 0.0;
  bool finite = true;
};

struct WolfeOutcome {
  bool ok = false;
  double a = 0.0, f = 0.0;
  Vec g;
  bool armijo_ok = false, curvature_ok = false;
};

// Strong Wolfe line search: bracketing plus bisection-style zoom.
WolfeOutcome wolfe_search(const Objective& obj, const Vec& x, const Vec& p, double f0,
                          const Vec& g0, double a_init, double c1, double c2) {
  WolfeOutcome out;
  const double df0 = g0.dot(p);
  if (df0 >= 0.0) return out;  // not a descent direction

  Vec g(x.size());
  auto eval = [&](double a) {
    LinePoint lp;
    lp.a = a;
    lp.f = obj(x + a * p, g);
    lp.finite = std::isfinite(lp.f) && g.allFinite();
    lp.df = lp.finite ? g.dot(p) : 0.0;
    return lp;
  };
  auto armijo = [&](const LinePoint& lp) {
    return lp.finite && lp.f <= f0 + c1 * lp.a * df0;
  };
  auto strong_curv = [&](const LinePoint& lp) { return std::abs(lp.df) <= c2 * std::abs(df0); };
  auto accept = [&](const LinePoint& lp) {
    out.ok = true;
    out.a = lp.a;
    out.f = lp.f;
    out.g = g;
    out.armijo_ok = armijo(lp);
    out.curvature_ok = strong_curv(lp);
  };

  LinePoint lo{0.0, f0, df0, true};
  LinePoint prev = lo;
  double a = a_init;
  LinePoint hi;
  bool bracketed = false;
  for (int i = 0; i < 30 && !bracketed; ++i) {
    LinePoint cur = eval(a);
    if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) {
      lo = prev;
      hi = cur;
      bracketed = true;
      break;
    }
    if (strong_curv(cur)) {
      accept(cur);
      return out;
    }
    if (cur.df >= 0.0) {
      lo = cur;
      hi = prev;
      bracketed = true;
      break;
    }
    prev = cur;
    a *= 2.0;
  }
  if (!bracketed) return out;

  // zoom: lo satisfies Armijo with the lowest f seen, hi is the other end
  for (int i = 0; i < 60; ++i) {
    const double aj = 0.5 * (lo.a + hi.a);
    LinePoint cur = eval(aj);
    if (!armijo(cur) || cur.f >= lo.f) {
      hi = cur;
    } else {
      if (strong_curv(cur)) {
        accept(cur);
        return out;
      }
      if (cur.df * (hi.a - lo.a) >= 0.0) hi = lo;
      lo = cur;
    }
    if (std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, std::abs(lo.a))) break;
  }
  // fall back to the best Armijo point if it strictly decreases f
  if (lo.a > 0.0 && lo.finite && lo.f < f0 && armijo(lo)) {
    LinePoint cur = eval(lo.a);
    accept(cur);
    out.curvature_ok = strong_curv(cur);
    out.ok = out.armijo_ok;  // accepted as a plain Armijo step
  }
  return out;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Vec x0, const LbfgsOptions& opts,
                           int max_iters) {
  if (!(opts.c1 > 0.0 && opts.c1 < opts.c2 && opts.c2 < 1.0))
    throw std::invalid_argument("lbfgs: require 0 < c1 < c2 < 1");

  LbfgsResult res;
  res.x = std::move(x0);
  Vec g(res.x.size());
  double f = objective(res.x, g);
  if (!std::isfinite(f) || !g.allFinite())
    throw std::runtime_error("lbfgs: non-finite objective at start");
  res.f = f;

  std::deque<std::pair<Vec, Vec>> pairs;  // (s, y)
  bool restarted = false;
  res.termination = "max_iters";

  for (int it = 0; it < max_iters; ++it) {
    if (g.norm() < opts.grad_tol) {
      res.termination = "grad_tol";
      break;
    }

    // two-loop recursion
    Vec q = g;
    std::vector<double> alpha(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = pairs[i];
      alpha[i] = s.dot(q) / s.dot(y);
      q -= alpha[i] * y;
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, y] = pairs[i];
      const double beta = y.dot(q) / s.dot(y);
      q += (alpha[i] - beta) * s;
    }
    Vec p = -q;

    const double a_init = pairs.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.norm())) : 1.0;
    WolfeOutcome w = wolfe_search(objective, res.x, p, f, g, a_init, opts.c1, opts.c2);
    if (!w.ok || !(w.f < f)) {
      if (!restarted && !pairs.empty()) {
        pairs.clear();  // restart from steepest descent once
        restarted = true;
        --it;
        continue;
      }
      res.termination = "line_search_failure";
      break;
    }

    const Vec x_new = res.x + w.a * p;
    const Vec s = x_new - res.x;
    const Vec y = w.g - g;
    if (s.dot(y) > 1e-12) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > opts.history) pairs.pop_front();
    }
    res.x = x_new;
    f = w.f;
    g = w.g;
    res.f = f;
    res.iters = it + 1;
    res.trace.push_back({it + 1, f, w.a, w.armijo_ok, w.curvature_ok});
  }
  if (res.termination == "max_iters" && g.norm() < opts.grad_tol) res.termination = "grad_tol";
  return res;
}

TrainReport train(const ProblemSpec& problem, const TrainConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto ms_since = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  Architecture arch = problem.architecture();
  if (config.layers > 0) arch.layers = config.layers;
  if (config.nodes > 0) arch.nodes = config.nodes;
  const Index n_pts = config.n_points > 0 ? config.n_points : problem.hyper.n_points;
  const double tol = config.tol > 0.0 ? config.tol : problem.hyper.tol;

  TrainReport rep;
  rep.arch = arch;
  rep.tol = tol;
  rep.n_points = n_pts;

  NetworkParams net = init_params(arch, config.seed);
  Vec theta = flatten(net);
  JetEvaluator ev(arch);

  // Collocation stream is independent of the init stream.
  Xoshiro256 colloc_rng(config.seed + 1);
  Mat X = sample_stream(problem.domain, n_pts, colloc_rng);
  PointBatch batch = make_batch(problem, X);

  ObstacleWeight lambda = config.lambda;
  AdamState adam;
  adam.lr = config.adam_lr;
  adam.beta1 = config.adam_beta1;
  adam.beta2 = config.adam_beta2;
  adam.eps = config.adam_eps;

  rep.termination = "adam_cap_reached";
  double loss = 0.0;
  long steps = 0;
  long it = 1;
  long last_logged = -1;
  for (;; ++it) {
    if (config.sample_mode == SampleMode::resample_each_iter && it > 1) {
      X = sample_stream(problem.domain, n_pts, colloc_rng);
      batch = make_batch(problem, X);
    }
    Vec grad;
    if (config.loss_kind == LossKind::combined) {
      LossGradResult r = combined_loss_grad(ev, net, problem, batch);
      loss = r.breakdown.total;
      grad = std::move(r.grad);
    } else {
      SeparatedGradResult r = separated_loss_grad(ev, net, problem, batch, lambda);
      loss = r.breakdown.total;
      grad = std::move(r.grad);
      if (it % lambda.update_period == 0) lambda = update_lambda(lambda, r.grad_res, r.grad_obs);
    }
    if (it == 1 || it % config.log_every == 0) {
      rep.trace.push_back({it, 0, loss, ms_since()});
      last_logged = it;
    }
    if (loss <= tol) {
      rep.termination = "tol_reached";
      break;
    }
    if (it > config.max_adam_iters) break;  // loss at the cap evaluated, no further step
    adam_step(adam, theta, grad);
    unflatten_into(theta, net);
    steps = it;
  }
  if (last_logged != it) rep.trace.push_back({it, 0, loss, ms_since()});
  rep.adam_iters = steps;
  rep.adam_final_loss = loss;

  // L-BFGS fine-tuning on a fixed set (the last Adam batch).
  rep.final_loss = loss;
  if (config.lbfgs_max_iters > 0) {
    NetworkParams scratch = zeros_like(arch);
    JetEvaluator ev2(arch);
    const ObstacleWeight lam = lambda;
    Objective obj = [&](const Vec& th, Vec& grad_out) {
      unflatten_into(th, scratch);
      if (config.loss_kind == LossKind::combined) {
        LossGradResult r = combined_loss_grad(ev2, scratch, problem, batch);
        grad_out = std::move(r.grad);
        return r.breakdown.total;
      }
      SeparatedGradResult r = separated_loss_grad(ev2, scratch, problem, batch, lam);
      grad_out = std::move(r.grad);
      return r.breakdown.total;
    };
    LbfgsOptions opts;
    opts.history = config.lbfgs_history;
    LbfgsResult lb = lbfgs_minimize(obj, theta, opts, config.lbfgs_max_iters);
    theta = lb.x;
    rep.lbfgs_iters = lb.iters;
    rep.lbfgs_termination = lb.termination;
    rep.final_loss = lb.f;
    const long base = it;  // last Adam evaluation index
    for (const auto& e : lb.trace) rep.trace.push_back({base + e.iter, 1, e.f, ms_since()});
  }

  rep.final_theta = std::move(theta);
  rep.lambda_final = lambda.lambda_obs;
  rep.wall_ms = ms_since();
  return rep;
}

}  // namespace opinn
