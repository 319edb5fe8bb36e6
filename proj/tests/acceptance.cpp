// Acceptance suite: checks the published behaviors end to end and prints one
// PASS/FAIL line per criterion. Exit code 0 iff all criteria pass.

#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "opinn/artifacts.hpp"
#include "opinn/autodiff.hpp"
#include "opinn/loss.hpp"
#include "opinn/metrics.hpp"
#include "opinn/optim.hpp"
#include "opinn/oracle.hpp"
#include "opinn/problems.hpp"
#include "opinn/rng.hpp"
#include "opinn/sampler.hpp"

using namespace opinn;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

NetworkParams random_net(const Architecture& arch, uint64_t seed) {
  NetworkParams p = init_params(arch, seed);
  Xoshiro256 rng(seed ^ 0x9e3779b9u);
  for (auto& b : p.biases)
    for (Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.5, 0.5);
  return p;
}

double fd4(const std::function<double(double)>& f, double t0, double h) {
  return (f(t0 - 2 * h) - 8 * f(t0 - h) + 8 * f(t0 + h) - f(t0 + 2 * h)) / (12 * h);
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
  double worst_grad = 0.0, worst_lap = 0.0;
  for (const ProblemSpec& p : catalog()) {
    const Architecture arch = p.architecture();
    JetEvaluator ev(arch);
    Xoshiro256 rng(1234);
    for (int draw = 0; draw < 100; ++draw) {
      const uint64_t seed = rng.next();
      NetworkParams net = random_net(arch, seed);
      const Mat X = sample(p.domain, 16, seed).points;
      const PointBatch batch = make_batch(p, X);
      const LossGradResult res = combined_loss_grad(ev, net, p, batch);
      Vec theta = flatten(net);

      int checked = 0;
      Xoshiro256 pick(seed + 1);
      int guard = 0;
      while (checked < 8 && guard++ < 4000) {
        const Index i = static_cast<Index>(pick.next() % static_cast<uint64_t>(theta.size()));
        if (std::abs(res.grad[i]) <= 1e-8) continue;
        const double h = 1e-3 * std::max(1.0, std::abs(theta[i]));
        auto loss_at = [&](double t) {
          Vec th = theta;
          th[i] = t;
          return combined_loss(unflatten(arch, th), p, X).total;
        };
        const double fd = fd4(loss_at, theta[i], h);
        worst_grad = std::max(worst_grad,
                              std::abs(res.grad[i] - fd) / std::max(1e-12, std::abs(fd)));
        ++checked;
      }

      // input Laplacian vs 4th-order central differences of the raw net
      const double x0 = X(0, 0), y0 = p.domain.dim == 2 ? X(1, 0) : 0.0;
      const DiffBundle b = eval_with_input_derivs(net, x0, y0);
      double lap_fd = 0.0;
      const double h = 1e-3;
      for (int axis = 0; axis < p.domain.dim; ++axis) {
        auto at = [&](double t) {
          const double xx = axis == 0 ? t : x0, yy = axis == 0 ? y0 : t;
          Mat P(p.domain.dim, 1);
          P(0, 0) = xx;
          if (p.domain.dim == 2) P(1, 0) = yy;
          return forward_jet(net, P, 0).value[0];
        };
        const double c = axis == 0 ? x0 : y0;
        lap_fd += (-at(c - 2 * h) + 16 * at(c - h) - 30 * at(c) + 16 * at(c + h) -
                   at(c + 2 * h)) /
                  (12 * h * h);
      }
      worst_lap = std::max(worst_lap,
                           std::abs(b.laplacian() - lap_fd) / std::max(1.0, std::abs(lap_fd)));
    }
  }
  report(1, worst_grad <= 1e-5 && worst_lap <= 1e-6,
         "differentiation: 100 draws/problem, loss-gradient rel err " + std::to_string(worst_grad) +
             " (<=1e-5), input-Laplacian rel err " + std::to_string(worst_lap) + " (<=1e-6)");
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
  const double beta = solve_beta();
  const double resid = std::abs(beta * beta * (1.0 - std::log(beta / 2.0)) - 1.0);
  const bool ok = std::abs(beta - 0.6979651482) <= 1e-9 && resid < 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "beta = %.12f (ref 0.6979651482 +- 1e-9), |h(beta)| = %.2e",
                beta, resid);
  report(2, ok, buf);
}

// ---------------------------------------------------------------- criterion 3
void criterion_3() {
  double worst = 0.0;
  std::string y_edge_note;
  for (const ProblemSpec& p : catalog()) {
    const NetworkParams net = random_net(p.architecture(), 99);
    const Mat bnd = boundary_samples(p, 200);
    for (Index i = 0; i < bnd.cols(); ++i) {
      const double x = bnd(0, i), y = p.domain.dim == 2 ? bnd(1, i) : 0.0;
      const DiffBundle u = lifted_eval(net, p.lift, p.domain, x, y);
      worst = std::max(worst, std::abs(u.value - p.lift.g(x, y).value));
    }
    if (p.enforced == EnforcedBoundary::x_edges_only) {
      double ymax = 0.0;
      for (int i = 0; i <= 50; ++i) {
        const double x = 2.0 * i / 50.0;
        for (double y : {0.0, 2.0})
          ymax = std::max(ymax, std::abs(lifted_eval(net, p.lift, p.domain, x, y).value));
      }
      y_edge_note = "; phi6 unenforced y-edge diagnostic " + std::to_string(ymax);
    }
  }
  report(3, worst <= 1e-10,
         "hard boundary: max |u_hat - g| over 200 samples x 6 problems = " +
             std::to_string(worst) + " (<=1e-10)" + y_edge_note);
}

// ---------------------------------------------------------------- criterion 4
void criterion_4() {
  const ProblemSpec& phi5 = problem_by_id("phi5");
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = -2.0 + 4.0 * i / 200.0;
    for (const auto& [x, y] : {std::pair{2.0, t}, {-2.0, t}, {t, 2.0}, {t, -2.0}})
      worst = std::max(worst, std::abs(phi5.lift.g(x, y).value - (*phi5.exact)(x, y).value));
  }
  report(4, worst <= 1e-10,
         "phi5 lift boundary data vs exact solution on all four edges: max " +
             std::to_string(worst) + " (<=1e-10)");
}

// ---------------------------------------------------------------- criterion 5
void criterion_5() {
  const ProblemSpec& phi1 = problem_by_id("phi1");
  const ProblemSpec& phi2 = problem_by_id("phi2");
  const ProblemSpec& phi5 = problem_by_id("phi5");

  const GridSolution s1 =
      psor_1d([&](double x) { return phi1.obstacle(x, 0.0).value; }, 0.0, 0.0, 2048);
  double e1 = 0.0;
  for (Index i = 0; i < s1.values.size(); ++i)
    e1 = std::max(e1, std::abs(s1.values[i] - (*phi1.exact)(s1.points(0, i), 0.0).value));
  const double fb = 1.0 / (2.0 * std::sqrt(2.0));
  double dfb = 1e300;
  for (Index k = 0; k < s1.free_boundary.cols(); ++k)
    dfb = std::min(dfb, std::abs(s1.free_boundary(0, k) - fb));
  const bool ok1 = e1 <= 5e-3 && dfb <= 2.0 / 2047.0;

  const GridSolution s2 =
      psor_1d([&](double x) { return phi2.obstacle(x, 0.0).value; }, 0.0, 0.0, 2048);
  const double plateau = s2.values[(s2.values.size() - 1) / 2];
  const bool ok2 = std::abs(plateau - 10.0) <= 1e-3;

  const GridSolution s5 =
      psor_2d([&](double x, double y) { return phi5.obstacle(x, y).value; },
              [&](double x, double y) { return (*phi5.exact)(x, y).value; }, phi5.domain, 257);
  const double beta = solve_beta();
  double e5 = 0.0;
  for (Index i = 0; i < s5.values.size(); ++i) {
    if (std::abs(s5.points.col(i).norm() - beta) <= 0.05) continue;
    e5 = std::max(e5,
                  std::abs(s5.values[i] - (*phi5.exact)(s5.points(0, i), s5.points(1, i)).value));
  }
  const bool ok5 = e5 <= 2e-3;

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "oracle fidelity: phi1 Linf %.2e (<=5e-3), fb gap %.2e (<=%.2e); phi2 plateau "
                "%.6f (10 +- 1e-3); phi5 Linf %.2e off ring (<=2e-3)",
                e1, dfb, 2.0 / 2047.0, plateau, e5);
  report(5, ok1 && ok2 && ok5, buf);
}

// ------------------------------------------------------- criteria 6 and 7
struct Trained {
  TrainReport rep;
  NetworkParams net;
};

std::map<std::string, Trained> train_all() {
  std::map<std::string, Trained> out;
  for (const ProblemSpec& p : catalog()) {
    TrainConfig cfg;
    cfg.seed = 0;
    cfg.log_every = 1000;
    std::printf("  [info] training %s (N_r=%ld, layers=%d, tol=%g)...\n", p.id.c_str(),
                static_cast<long>(p.hyper.n_points), p.hyper.layers, p.hyper.tol);
    std::fflush(stdout);
    Trained t{train(p, cfg), {}};
    t.net = unflatten(t.rep.arch, t.rep.final_theta);
    std::printf("  [info] %s: %s after %ld adam iters (loss %.3g), lbfgs %d iters -> %.3g, %.0f s\n",
                p.id.c_str(), t.rep.termination.c_str(), t.rep.adam_iters, t.rep.adam_final_loss,
                t.rep.lbfgs_iters, t.rep.final_loss, t.rep.wall_ms / 1000.0);
    std::fflush(stdout);
    out.emplace(p.id, std::move(t));
  }
  return out;
}

void criterion_6(const std::map<std::string, Trained>& trained) {
  bool ok = true;
  std::string detail = "end-to-end training:";
  for (const char* id : {"phi1", "phi2", "phi4"}) {
    const Trained& t = trained.at(id);
    const ProblemSpec& p = problem_by_id(id);
    const bool reached = t.rep.termination == "tol_reached";
    const bool no_increase = t.rep.final_loss <= t.rep.adam_final_loss;
    ok = ok && reached && no_increase;
    char buf[160];
    std::snprintf(buf, sizeof(buf), " %s tol %.2g %s at %ld iters, lbfgs %.3g<=%.3g;", id,
                  p.hyper.tol, reached ? "reached" : "NOT reached", t.rep.adam_iters,
                  t.rep.final_loss, t.rep.adam_final_loss);
    detail += buf;
  }
  report(6, ok, detail);
}

void criterion_7(const std::map<std::string, Trained>& trained) {
  bool all_ok = true;
  std::string detail = "trained solution quality:";

  auto grid_for = [](const ProblemSpec& p) {
    return eval_grid(p.domain, p.domain.dim == 1 ? 1001 : 201);
  };

  // feasibility for every problem
  for (const ProblemSpec& p : catalog()) {
    const Trained& t = trained.at(p.id);
    const Mat grid = grid_for(p);
    JetEvaluator ev(t.net.arch);
    const JetBatch& raw = ev.forward(t.net, grid, 0);
    double feas = 1e300;
    for (Index i = 0; i < grid.cols(); ++i) {
      const double x = grid(0, i), y = p.domain.dim == 2 ? grid(1, i) : 0.0;
      const double uh = p.lift.g(x, y).value + p.lift.eta(x, y).value * raw.value[i];
      feas = std::min(feas, uh - p.obstacle(x, y).value);
    }
    const double limit = -1e-2 * solution_scale(p);
    if (feas < limit) {
      all_ok = false;
      detail += " " + p.id + " feasibility " + std::to_string(feas) + " < " +
                std::to_string(limit) + ";";
    }
  }

  auto linf_vs_exact = [&](const ProblemSpec& p, const NetworkParams& net,
                           const std::function<bool(double, double)>& excluded) {
    const Mat grid = grid_for(p);
    JetEvaluator ev(net.arch);
    const JetBatch& raw = ev.forward(net, grid, 0);
    double linf = 0.0;
    for (Index i = 0; i < grid.cols(); ++i) {
      const double x = grid(0, i), y = p.domain.dim == 2 ? grid(1, i) : 0.0;
      if (excluded(x, y)) continue;
      const double uh = p.lift.g(x, y).value + p.lift.eta(x, y).value * raw.value[i];
      linf = std::max(linf, std::abs(uh - (*p.exact)(x, y).value));
    }
    return linf;
  };

  {
    const ProblemSpec& p = problem_by_id("phi1");
    const double linf = linf_vs_exact(p, trained.at("phi1").net,
                                      [](double, double) { return false; });
    const ComplementaritySummary comp = complementarity_report(
        trained.at("phi1").net, p, grid_for(p), default_contact_delta(p));
    const bool ok = linf <= 0.15 && comp.median_abs_residual_offcontact <= 1e-2;
    all_ok = all_ok && ok;
    char buf[120];
    std::snprintf(buf, sizeof(buf), " phi1 Linf %.3g (<=0.15) medR %.2e (<=1e-2);", linf,
                  comp.median_abs_residual_offcontact);
    detail += buf;
  }
  {
    const ProblemSpec& p = problem_by_id("phi2");
    const double linf = linf_vs_exact(p, trained.at("phi2").net,
                                      [](double, double) { return false; });
    const ComplementaritySummary comp = complementarity_report(
        trained.at("phi2").net, p, grid_for(p), default_contact_delta(p));
    const bool ok = linf <= 0.15 && comp.median_abs_residual_offcontact <= 1e-2;
    all_ok = all_ok && ok;
    char buf[120];
    std::snprintf(buf, sizeof(buf), " phi2 Linf %.3g (<=0.15) medR %.2e (<=1e-2);", linf,
                  comp.median_abs_residual_offcontact);
    detail += buf;
  }
  {
    // phi3 against the PSOR oracle on the same grid, away from the plateau corners
    const ProblemSpec& p = problem_by_id("phi3");
    const GridSolution sol =
        psor_1d([&](double x) { return p.obstacle(x, 0.0).value; }, 0.0, 0.0, 1001);
    const Mat grid = grid_for(p);
    const Vec ref = interpolate_oracle(sol, p.domain, grid);
    JetEvaluator ev(trained.at("phi3").net.arch);
    const JetBatch& raw = ev.forward(trained.at("phi3").net, grid, 0);
    double linf = 0.0;
    for (Index i = 0; i < grid.cols(); ++i) {
      const double x = grid(0, i);
      if (std::abs(x - 0.2) <= 2e-3 || std::abs(x - 0.8) <= 2e-3) continue;
      const double uh = p.lift.eta(x, 0.0).value * raw.value[i];
      linf = std::max(linf, std::abs(uh - ref[i]));
    }
    const bool ok = linf <= 0.1;
    all_ok = all_ok && ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " phi3 Linf-vs-psor %.3g (<=0.1);", linf);
    detail += buf;
  }
  {
    // phi4: affine off a dilated contact band, tangent to the obstacle on it
    const ProblemSpec& p = problem_by_id("phi4");
    const NetworkParams& net = trained.at("phi4").net;
    const Mat grid = grid_for(p);
    const PointBatch batch = make_batch(p, grid);
    JetEvaluator ev(net.arch);
    const JetBatch hat = apply_lift(ev.forward(net, grid, 2), batch);
    const double delta = default_contact_delta(p);
    std::vector<char> contact(grid.cols());
    for (Index i = 0; i < grid.cols(); ++i)
      contact[i] = std::abs(hat.value[i] - batch.phi[i]) <= delta ? 1 : 0;
    const int dilate = 10;
    double max_upp = 0.0, max_tangent = 0.0;
    for (Index i = 0; i < grid.cols(); ++i) {
      bool near_contact = false;
      for (Index j = std::max<Index>(0, i - dilate);
           j <= std::min<Index>(grid.cols() - 1, i + dilate); ++j)
        near_contact = near_contact || contact[j];
      const double x = grid(0, i);
      if (x <= 0.01 || x >= 0.99) continue;
      if (!near_contact) {
        max_upp = std::max(max_upp, std::abs(hat.hess(0, i)));
      } else if (contact[i]) {
        bool interior = true;
        for (Index j = std::max<Index>(0, i - dilate);
             j <= std::min<Index>(grid.cols() - 1, i + dilate); ++j)
          interior = interior && contact[j];
        if (interior)
          max_tangent =
              std::max(max_tangent, std::abs(hat.grad(0, i) - p.obstacle(x, 0.0).grad[0]));
      }
    }
    const bool ok = max_upp <= 0.5 && max_tangent <= 0.5;
    all_ok = all_ok && ok;
    char buf[120];
    std::snprintf(buf, sizeof(buf), " phi4 |u''| off contact %.3g (<=0.5), tangency %.3g (<=0.5);",
                  max_upp, max_tangent);
    detail += buf;
  }
  {
    const ProblemSpec& p = problem_by_id("phi5");
    const double beta = solve_beta();
    const double linf = linf_vs_exact(p, trained.at("phi5").net, [&](double x, double y) {
      return std::abs(std::hypot(x, y) - beta) <= 0.1;
    });
    const bool ok = linf <= 0.05;
    all_ok = all_ok && ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " phi5 Linf off ring %.3g (<=0.05);", linf);
    detail += buf;
  }
  {
    const ProblemSpec& p = problem_by_id("phi6");
    const double linf = linf_vs_exact(p, trained.at("phi6").net, [](double x, double) {
      return std::abs(x - 0.5) <= 0.1 || std::abs(x - 1.5) <= 0.1;
    });
    const bool ok = linf <= 0.1;
    all_ok = all_ok && ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " phi6 Linf off jump lines %.3g (<=0.1)", linf);
    detail += buf;
  }
  report(7, all_ok, detail);
}

// ---------------------------------------------------------------- criterion 8
void criterion_8() {
  const ProblemSpec& phi1 = problem_by_id("phi1");
  int wins = 0;
  std::string detail = "figure-3 comparison (target 1e-2):";
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto run_kind = [&](LossKind kind) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.loss_kind = kind;
      cfg.tol = 1e-2;
      cfg.max_adam_iters = 15000;
      cfg.lbfgs_max_iters = 0;
      cfg.log_every = 15000;
      return train(phi1, cfg);
    };
    const TrainReport comb = run_kind(LossKind::combined);
    const TrainReport sep = run_kind(LossKind::separated);
    const long ic = comb.termination == "tol_reached" ? comb.adam_iters : LONG_MAX;
    const long is = sep.termination == "tol_reached" ? sep.adam_iters : LONG_MAX;
    const bool win = ic < is;
    wins += win ? 1 : 0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " seed %llu: combined %ld vs separated %ld%s;",
                  static_cast<unsigned long long>(seed),
                  ic == LONG_MAX ? -1 : ic, is == LONG_MAX ? -1 : is, win ? "" : " (no win)");
    detail += buf;
    std::fflush(stdout);
  }
  detail += " wins " + std::to_string(wins) + "/5 (need >=4)";
  report(8, wins >= 4, detail);
}

// ---------------------------------------------------------------- criterion 9
void criterion_9() {
  const ProblemSpec& phi1 = problem_by_id("phi1");
  int wins = 0;
  std::string detail = "figure-4 architecture comparison (budget 3000):";
  for (uint64_t seed = 0; seed < 5; ++seed) {
    auto run_cfg = [&](int layers, int nodes, Index points) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.tol = 1e-300;
      cfg.max_adam_iters = 3000;
      cfg.lbfgs_max_iters = 0;
      cfg.log_every = 3000;
      cfg.layers = layers;
      cfg.nodes = nodes;
      cfg.n_points = points;
      return train(phi1, cfg).adam_final_loss;
    };
    const double big = run_cfg(3, 24, 5000);
    const double small = run_cfg(1, 8, 500);
    const bool win = big <= small;
    wins += win ? 1 : 0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " seed %llu: (3,24,5000) %.3g vs (1,8,500) %.3g;",
                  static_cast<unsigned long long>(seed), big, small);
    detail += buf;
    std::fflush(stdout);
  }
  detail += " wins " + std::to_string(wins) + "/5 (need >=4)";
  report(9, wins >= 4, detail);
}

// --------------------------------------------------------------- criterion 10
void criterion_10() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "opinn_acceptance_determinism";
  fs::remove_all(base);

  auto run_once = [&](const std::string& sub) {
    RunConfig cfg;
    cfg.problem = "phi1";
    cfg.seed = 0;
    cfg.out_dir = (base / sub).string();
    cfg.train.max_adam_iters = 400;
    cfg.train.tol = 1e-12;
    cfg.train.lbfgs_max_iters = 25;
    cfg.train.log_every = 1;
    cmd_train(cfg);
    std::ifstream in(base / sub / "train_log.csv", std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  const std::string a = run_once("a");
  const std::string b = run_once("b");
  const bool ok = !a.empty() && a == b;
  report(10, ok,
         std::string("determinism: repeated seed-0 run produces ") +
             (ok ? "bit-identical" : "DIFFERENT") + " train_log.csv (" +
             std::to_string(a.size()) + " bytes)");
  fs::remove_all(base);
}

}  // namespace

int main() {
  std::printf("opinn acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  const auto trained = train_all();
  criterion_6(trained);
  criterion_7(trained);
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
