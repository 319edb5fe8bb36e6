#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "opinn/autodiff.hpp"
#include "opinn/loss.hpp"
#include "opinn/problems.hpp"
#include "opinn/sampler.hpp"

using namespace opinn;
using namespace opinn::testing;

TEST_CASE("bare linear map: u = 2x + 1") {
  Architecture arch{1, 0, 1};
  NetworkParams p = zeros_like(arch);
  p.weights[0](0, 0) = 2.0;
  p.biases[0][0] = 1.0;
  const DiffBundle b = eval_with_input_derivs(p, 3.0);
  CHECK(b.value == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(b.grad[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.hess(0, 0) == 0.0);
}

TEST_CASE("single tanh node with unit weights at x = 0") {
  Architecture arch{1, 1, 1};
  NetworkParams p = zeros_like(arch);
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  const DiffBundle b = eval_with_input_derivs(p, 0.0);
  CHECK(b.value == 0.0);
  CHECK(b.grad[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(b.hess(0, 0)) < 1e-15);
}

TEST_CASE("zero final-layer weights: value is the output bias, derivatives vanish") {
  Architecture arch{2, 3, 16};
  NetworkParams p = random_net(arch, 7);
  p.weights[3].setZero();
  p.biases[3][0] = 4.25;
  const DiffBundle b = eval_with_input_derivs(p, 0.3, -0.8);
  CHECK(b.value == 4.25);
  CHECK(b.grad.norm() == 0.0);
  CHECK(b.hess.norm() == 0.0);
}

TEST_CASE("input derivatives match central finite differences, 1D") {
  const Architecture arch{1, 3, 24};
  for (uint64_t seed : {1u, 2u, 3u}) {
    const NetworkParams p = random_net(arch, seed);
    const double x = 0.37;
    const DiffBundle b = eval_with_input_derivs(p, x);
    CHECK(rel_err(b.grad[0], fd_grad_x(p, x, 0.0, 0)) < 1e-6);
    CHECK(rel_err(b.hess(0, 0), fd_hess(p, x, 0.0, 0, 0)) < 1e-6);
  }
}

TEST_CASE("input derivatives match central finite differences, 2D with mixed partials") {
  const Architecture arch{2, 3, 24};
  for (uint64_t seed : {11u, 12u, 13u}) {
    const NetworkParams p = random_net(arch, seed);
    const double x = 0.37, y = -0.61;
    const DiffBundle b = eval_with_input_derivs(p, x, y);
    CHECK(rel_err(b.grad[0], fd_grad_x(p, x, y, 0)) < 1e-6);
    CHECK(rel_err(b.grad[1], fd_grad_x(p, x, y, 1)) < 1e-6);
    CHECK(rel_err(b.hess(0, 0), fd_hess(p, x, y, 0, 0)) < 1e-6);
    CHECK(rel_err(b.hess(1, 1), fd_hess(p, x, y, 1, 1)) < 1e-6);
    CHECK(rel_err(b.hess(0, 1), fd_hess(p, x, y, 0, 1)) < 1e-6);
    CHECK(b.hess(0, 1) == b.hess(1, 0));
  }
}

TEST_CASE("mixed partials are symmetric under input relabeling") {
  // swap the two input columns of the first layer and the point coordinates;
  // the xy-Hessian entry must be identical
  const Architecture arch{2, 2, 12};
  const NetworkParams p = random_net(arch, 21);
  NetworkParams q = p;
  q.weights[0].col(0).swap(q.weights[0].col(1));
  const DiffBundle bp = eval_with_input_derivs(p, 0.4, -0.9);
  const DiffBundle bq = eval_with_input_derivs(q, -0.9, 0.4);
  CHECK(std::abs(bp.hess(0, 1) - bq.hess(0, 1)) < 1e-12);
  CHECK(std::abs(bp.value - bq.value) < 1e-12);
}

TEST_CASE("jet of a*net1 + b*net2 equals the linear combination (widened net)") {
  const Architecture arch{1, 2, 8};
  const NetworkParams p1 = random_net(arch, 31);
  const NetworkParams p2 = random_net(arch, 32);
  const double a = 2.0, c = -0.75;

  Architecture wide{1, 2, 16};
  NetworkParams w = zeros_like(wide);
  for (int l = 0; l < 2; ++l) {
    w.weights[l].topLeftCorner(8, l == 0 ? 1 : 8) = p1.weights[l];
    w.weights[l].bottomRightCorner(8, l == 0 ? 1 : 8) = p2.weights[l];
    w.biases[l].head(8) = p1.biases[l];
    w.biases[l].tail(8) = p2.biases[l];
  }
  w.weights[2].leftCols(8) = a * p1.weights[2];
  w.weights[2].rightCols(8) = c * p2.weights[2];
  w.biases[2][0] = a * p1.biases[2][0] + c * p2.biases[2][0];

  const double x = 0.62;
  const DiffBundle b1 = eval_with_input_derivs(p1, x);
  const DiffBundle b2 = eval_with_input_derivs(p2, x);
  const DiffBundle bw = eval_with_input_derivs(w, x);
  CHECK(std::abs(bw.value - (a * b1.value + c * b2.value)) < 1e-12);
  CHECK(std::abs(bw.grad[0] - (a * b1.grad[0] + c * b2.grad[0])) < 1e-12);
  CHECK(std::abs(bw.hess(0, 0) - (a * b1.hess(0, 0) + c * b2.hess(0, 0))) < 1e-12);
}

TEST_CASE("dimension mismatch is a configuration error") {
  const Architecture arch{2, 2, 8};
  const NetworkParams p = random_net(arch, 5);
  Vec x(1);
  x << 0.5;
  CHECK_THROWS_AS((void)eval_with_input_derivs(p, x), std::invalid_argument);
}

TEST_CASE("loss = u_hat(x0)^2 with zero final layer: gradient lives in the output bias") {
  const Architecture arch{1, 2, 8};
  NetworkParams p = random_net(arch, 41);
  p.weights[2].setZero();
  p.biases[2][0] = 1.5;

  JetEvaluator ev(arch);
  Mat X(1, 1);
  X << 0.3;
  const JetBatch& jet = ev.forward(p, X, 2);
  Vec seed_v(1);
  seed_v << 2.0 * jet.value[0];  // d/du of u^2
  const Vec grad = ev.backward(p, seed_v, Mat::Zero(1, 1), Mat::Zero(1, 1));

  const Index bias_idx = arch.param_count() - 1;
  CHECK(grad[bias_idx] == doctest::Approx(2.0 * 1.5).epsilon(1e-12));
  // hidden parameters receive nothing: the chain passes through zero weights
  for (Index i = 0; i < arch.param_count() - 1 - 8; ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("bare linear map, loss = value^2: gradient 2*theta at x = 0") {
  // u = w*0 + b = b, loss = b^2, d/db = 2b = 6 at b = 3
  Architecture arch{1, 0, 1};
  NetworkParams p = zeros_like(arch);
  p.biases[0][0] = 3.0;
  JetEvaluator ev(arch);
  Mat X = Mat::Zero(1, 1);
  const JetBatch& jet = ev.forward(p, X, 2);
  Vec seed_v(1);
  seed_v << 2.0 * jet.value[0];
  const Vec grad = ev.backward(p, seed_v, Mat::Zero(1, 1), Mat::Zero(1, 1));
  CHECK(grad[1] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(grad[0] == 0.0);
}

TEST_CASE("combined-loss parameter gradient matches finite differences") {
  const ProblemSpec& phi1 = problem_by_id("phi1");
  const Architecture arch = phi1.architecture();
  JetEvaluator ev(arch);

  for (uint64_t seed : {101u, 102u}) {
    NetworkParams net = random_net(arch, seed);
    const Mat X = sample(phi1.domain, 64, seed).points;
    const PointBatch batch = make_batch(phi1, X);
    const LossGradResult res = combined_loss_grad(ev, net, phi1, batch);

    Vec theta = flatten(net);
    Xoshiro256 pick(seed);
    int checked = 0;
    while (checked < 8) {
      const Index i = static_cast<Index>(pick.next() % static_cast<uint64_t>(theta.size()));
      if (std::abs(res.grad[i]) <= 1e-8) continue;
      const double h = 1e-3 * std::max(1.0, std::abs(theta[i]));
      auto loss_at = [&](double t) {
        Vec th = theta;
        th[i] = t;
        return combined_loss(unflatten(arch, th), phi1, X).total;
      };
      const double fd = fd_derivative(loss_at, theta[i], h);
      CHECK(rel_err(res.grad[i], fd) < 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("p-Laplacian loss gradient matches finite differences (2D path)") {
  const ProblemSpec& phi6 = problem_by_id("phi6");
  Architecture arch{2, 2, 10};  // small net keeps the FD sweep fast
  JetEvaluator ev(arch);
  NetworkParams net = random_net(arch, 77);
  const Mat X = sample(phi6.domain, 32, 77).points;
  const PointBatch batch = make_batch(phi6, X);
  const LossGradResult res = combined_loss_grad(ev, net, phi6, batch);

  Vec theta = flatten(net);
  Xoshiro256 pick(99);
  int checked = 0;
  while (checked < 8) {
    const Index i = static_cast<Index>(pick.next() % static_cast<uint64_t>(theta.size()));
    if (std::abs(res.grad[i]) <= 1e-8) continue;
    const double h = 1e-3 * std::max(1.0, std::abs(theta[i]));
    auto loss_at = [&](double t) {
      Vec th = theta;
      th[i] = t;
      return combined_loss(unflatten(arch, th), phi6, X).total;
    };
    CHECK(rel_err(res.grad[i], fd_derivative(loss_at, theta[i], h)) < 1e-5);
    ++checked;
  }
}

TEST_CASE("membrane loss gradient matches finite differences") {
  const ProblemSpec& phi4 = problem_by_id("phi4");
  const Architecture arch = phi4.architecture();
  JetEvaluator ev(arch);
  NetworkParams net = random_net(arch, 55);
  const Mat X = sample(phi4.domain, 48, 55).points;
  const PointBatch batch = make_batch(phi4, X);
  const LossGradResult res = combined_loss_grad(ev, net, phi4, batch);

  Vec theta = flatten(net);
  Xoshiro256 pick(55);
  int checked = 0;
  while (checked < 8) {
    const Index i = static_cast<Index>(pick.next() % static_cast<uint64_t>(theta.size()));
    if (std::abs(res.grad[i]) <= 1e-8) continue;
    const double h = 1e-3 * std::max(1.0, std::abs(theta[i]));
    auto loss_at = [&](double t) {
      Vec th = theta;
      th[i] = t;
      return combined_loss(unflatten(arch, th), phi4, X).total;
    };
    CHECK(rel_err(res.grad[i], fd_derivative(loss_at, theta[i], h)) < 1e-5);
    ++checked;
  }
}
