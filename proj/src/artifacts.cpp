#include "opinn/artifacts.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "opinn/autodiff.hpp"
#include "opinn/loss.hpp"
#include "opinn/sampler.hpp"

namespace opinn {

namespace fs = std::filesystem;

std::string version_string() { return "opinn 0.1.0"; }

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// oracle solver for a problem, on `n` points per axis
GridSolution run_oracle(const ProblemSpec& p, Index n, double omega, double tol_iter) {
  if (p.op == OperatorTag::membrane1d) {
    const double g0 = p.lift.g(0.0, 0.0).value;
    const double g1 = p.lift.g(1.0, 0.0).value;
    return membrane_oracle([&](double x) { return p.obstacle(x, 0.0).value; }, g0, g1, n);
  }
  if (p.domain.dim == 1) {
    const double g0 = p.lift.g(p.domain.lo[0], 0.0).value;
    const double g1 = p.lift.g(p.domain.hi[0], 0.0).value;
    return psor_1d([&](double x) { return p.obstacle(x, 0.0).value; }, g0, g1, n, omega,
                   tol_iter);
  }
  if (p.op == OperatorTag::plaplace2d)
    throw std::invalid_argument(
        "no grid oracle for " + p.id +
        ": a printed exact solution exists, evaluate against it instead");
  if (!p.exact) throw std::invalid_argument("psor_2d needs boundary data for " + p.id);
  return psor_2d([&](double x, double y) { return p.obstacle(x, y).value; },
                 [&](double x, double y) { return (*p.exact)(x, y).value; }, p.domain, n, omega,
                 tol_iter);
}

void write_pointwise_csv(const fs::path& path, const nlohmann::json& cfg, const Mat& grid,
                         const Vec& u_hat, const Vec& u_ref, const Vec& phi,
                         const std::vector<char>& contact, const std::vector<char>* fb) {
  const int dim = static_cast<int>(grid.rows());
  std::string text = "# " + cfg.dump() + "\n";
  text += dim == 1 ? "x" : "x,y";
  text += ",u_hat,u_ref,phi,abs_err,contact";
  if (fb) text += ",free_boundary";
  text += "\n";
  for (Index i = 0; i < grid.cols(); ++i) {
    text += fmt(grid(0, i));
    if (dim == 2) text += "," + fmt(grid(1, i));
    const bool has_ref = std::isfinite(u_ref[i]);
    text += "," + fmt(u_hat[i]);
    text += ",";
    text += has_ref ? fmt(u_ref[i]) : "";
    text += "," + fmt(phi[i]);
    text += ",";
    text += has_ref ? fmt(std::abs(u_hat[i] - u_ref[i])) : "";
    text += ",";
    text += contact[i] ? "1" : "0";
    if (fb) {
      text += ",";
      text += (*fb)[i] ? "1" : "0";
    }
    text += "\n";
  }
  write_text(path, text);
}

Index default_resolution(const ProblemSpec& p) { return p.domain.dim == 1 ? 1001 : 201; }

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path,
                       const std::set<std::string>& skip) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  nlohmann::json j;
  in >> j;
  static const std::set<std::string> known = {
      "problem",       "seed",          "out",
      "loss",          "points",        "layers",
      "nodes",         "tol",           "max_adam_iters",
      "adam_lr",       "lbfgs_max_iters", "lbfgs_history",
      "log_every",     "sample_mode",   "lambda_init",
      "lambda_ema_rate", "lambda_update_period", "resolution",
      "reference",     "contact_delta", "oracle_n",
      "omega",         "tol_iter",      "budget",
      "target"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
    if (skip.count(key)) continue;  // command-line flags win
    if (key == "problem") cfg.problem = value.get<std::string>();
    else if (key == "seed") cfg.seed = value.get<uint64_t>();
    else if (key == "out") cfg.out_dir = value.get<std::string>();
    else if (key == "loss") {
      const auto s = value.get<std::string>();
      if (s != "combined" && s != "separated")
        throw std::invalid_argument("loss must be combined or separated");
      cfg.train.loss_kind = s == "combined" ? LossKind::combined : LossKind::separated;
    } else if (key == "points") cfg.train.n_points = value.get<Index>();
    else if (key == "layers") cfg.train.layers = value.get<int>();
    else if (key == "nodes") cfg.train.nodes = value.get<int>();
    else if (key == "tol") cfg.train.tol = value.get<double>();
    else if (key == "max_adam_iters") cfg.train.max_adam_iters = value.get<long>();
    else if (key == "adam_lr") cfg.train.adam_lr = value.get<double>();
    else if (key == "lbfgs_max_iters") cfg.train.lbfgs_max_iters = value.get<int>();
    else if (key == "lbfgs_history") cfg.train.lbfgs_history = value.get<int>();
    else if (key == "log_every") cfg.train.log_every = value.get<long>();
    else if (key == "sample_mode") {
      const auto s = value.get<std::string>();
      if (s != "fixed" && s != "resample_each_iter")
        throw std::invalid_argument("sample_mode must be fixed or resample_each_iter");
      cfg.train.sample_mode =
          s == "fixed" ? SampleMode::fixed : SampleMode::resample_each_iter;
    } else if (key == "lambda_init") cfg.train.lambda.lambda_obs = value.get<double>();
    else if (key == "lambda_ema_rate") cfg.train.lambda.ema_rate = value.get<double>();
    else if (key == "lambda_update_period") cfg.train.lambda.update_period = value.get<int>();
    else if (key == "resolution") cfg.resolution = value.get<Index>();
    else if (key == "reference") cfg.reference = value.get<std::string>();
    else if (key == "contact_delta") cfg.contact_delta = value.get<double>();
    else if (key == "oracle_n") cfg.oracle_n = value.get<Index>();
    else if (key == "omega") cfg.omega = value.get<double>();
    else if (key == "tol_iter") cfg.tol_iter = value.get<double>();
    else if (key == "budget") cfg.budget = value.get<long>();
    else if (key == "target") cfg.target = value.get<double>();
  }
}

nlohmann::json config_echo(const RunConfig& cfg) {
  const ProblemSpec& p = problem_by_id(cfg.problem);
  nlohmann::json j;
  j["problem"] = cfg.problem;
  j["seed"] = cfg.seed;
  j["loss"] = cfg.train.loss_kind == LossKind::combined ? "combined" : "separated";
  j["points"] = cfg.train.n_points > 0 ? cfg.train.n_points : p.hyper.n_points;
  j["layers"] = cfg.train.layers > 0 ? cfg.train.layers : p.hyper.layers;
  j["nodes"] = cfg.train.nodes > 0 ? cfg.train.nodes : p.hyper.nodes;
  j["tol"] = cfg.train.tol > 0 ? cfg.train.tol : p.hyper.tol;
  j["max_adam_iters"] = cfg.train.max_adam_iters;
  j["adam_lr"] = cfg.train.adam_lr;
  j["adam_beta1"] = cfg.train.adam_beta1;
  j["adam_beta2"] = cfg.train.adam_beta2;
  j["adam_eps"] = cfg.train.adam_eps;
  j["lbfgs_max_iters"] = cfg.train.lbfgs_max_iters;
  j["lbfgs_history"] = cfg.train.lbfgs_history;
  j["log_every"] = cfg.train.log_every;
  j["sample_mode"] =
      cfg.train.sample_mode == SampleMode::fixed ? "fixed" : "resample_each_iter";
  if (cfg.train.loss_kind == LossKind::separated) {
    j["lambda_init"] = cfg.train.lambda.lambda_obs;
    j["lambda_ema_rate"] = cfg.train.lambda.ema_rate;
    j["lambda_update_period"] = cfg.train.lambda.update_period;
  }
  j["version"] = version_string();
  return j;
}

int cmd_train(const RunConfig& cfg) {
  const ProblemSpec& problem = problem_by_id(cfg.problem);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;

  TrainReport rep = train(problem, tc);

  fs::create_directories(cfg.out_dir);
  const nlohmann::json echo = config_echo(cfg);

  std::string csv = "# " + echo.dump() + "\niter,phase,loss\n";
  for (const auto& e : rep.trace) {
    csv += std::to_string(e.iter);
    csv += e.phase == 0 ? ",adam," : ",lbfgs,";
    csv += fmt(e.loss) + "\n";
  }
  write_text(fs::path(cfg.out_dir) / "train_log.csv", csv);

  const NetworkParams final_net = unflatten(rep.arch, rep.final_theta);
  write_text(fs::path(cfg.out_dir) / "params.snapshot", serialize_params(final_net));

  nlohmann::json rj;
  rj["config"] = echo;
  rj["termination"] = rep.termination;
  rj["lbfgs_termination"] = rep.lbfgs_termination;
  rj["adam_iters"] = rep.adam_iters;
  rj["lbfgs_iters"] = rep.lbfgs_iters;
  rj["adam_final_loss"] = rep.adam_final_loss;
  rj["final_loss"] = rep.final_loss;
  rj["lambda_final"] = rep.lambda_final;
  rj["wall_ms"] = rep.wall_ms;
  rj["code_version"] = version_string();
  write_text(fs::path(cfg.out_dir) / "report.json", rj.dump(2) + "\n");

  std::printf("%s: %s after %ld adam + %d lbfgs iterations, final loss %.6g\n",
              cfg.problem.c_str(), rep.termination.c_str(), rep.adam_iters, rep.lbfgs_iters,
              rep.final_loss);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const ProblemSpec& problem = problem_by_id(cfg.problem);
  if (cfg.params_path.empty()) throw std::invalid_argument("evaluate: --params is required");
  std::ifstream in(cfg.params_path);
  if (!in) throw std::runtime_error("cannot read " + cfg.params_path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const NetworkParams net = deserialize_params(text);
  if (net.arch.input_dim != problem.domain.dim)
    throw std::invalid_argument("snapshot architecture does not match the problem dimension");

  const Index res = cfg.resolution > 0 ? cfg.resolution : default_resolution(problem);
  const Mat grid = eval_grid(problem.domain, res);

  // reference values: exact when available, otherwise a grid oracle
  std::optional<Vec> u_ref;
  std::string ref_used = cfg.reference;
  if (cfg.reference == "exact" || (cfg.reference == "auto" && problem.exact)) {
    ref_used = "exact";
  } else if (cfg.reference == "psor" || cfg.reference == "membrane" || cfg.reference == "auto") {
    const GridSolution sol = run_oracle(problem, res, cfg.omega, cfg.tol_iter);
    u_ref = interpolate_oracle(sol, problem.domain, grid);
    ref_used = problem.op == OperatorTag::membrane1d ? "membrane" : "psor";
  } else {
    throw std::invalid_argument("unknown reference: " + cfg.reference);
  }

  const double delta =
      cfg.contact_delta > 0 ? cfg.contact_delta : default_contact_delta(problem);
  const ErrorReport rep =
      error_map(net, problem, grid, u_ref ? &*u_ref : nullptr, delta);
  const ContactSet cs = contact_set(rep.u_hat, rep.phi, delta, grid, res);
  const ComplementaritySummary comp = complementarity_report(net, problem, grid, delta);

  fs::create_directories(cfg.out_dir);
  nlohmann::json echo = config_echo(cfg);
  echo["resolution"] = res;
  echo["reference"] = ref_used;
  echo["contact_delta"] = delta;

  write_pointwise_csv(fs::path(cfg.out_dir) / "error_map.csv", echo, grid, rep.u_hat, rep.u_ref,
                      rep.phi, rep.contact, nullptr);

  nlohmann::json mj;
  mj["config"] = echo;
  mj["linf"] = rep.linf;
  mj["linf_location"] = {rep.linf_location[0], rep.linf_location[1]};
  mj["feasibility_min"] = rep.feasibility_min;
  mj["boundary_max_err"] = rep.boundary_max_err;
  if (rep.y_edge_max_err >= 0.0) mj["y_edge_max_err"] = rep.y_edge_max_err;
  mj["contact_delta"] = delta;
  mj["complementarity"] = {
      {"median_abs_residual_offcontact", comp.median_abs_residual_offcontact},
      {"max_abs_residual_offcontact", comp.max_abs_residual_offcontact},
      {"min_residual", comp.min_residual},
      {"offcontact_count", comp.offcontact_count},
      {"feasibility_violations", comp.feasibility_violations}};
  std::vector<std::vector<double>> fb;
  double fb_radius = 0.0;
  for (Index k = 0; k < cs.free_boundary.cols(); ++k) {
    if (problem.domain.dim == 1)
      fb.push_back({cs.free_boundary(0, k)});
    else
      fb.push_back({cs.free_boundary(0, k), cs.free_boundary(1, k)});
    fb_radius += cs.free_boundary.col(k).norm();
  }
  mj["free_boundary"] = fb;
  if (problem.domain.dim == 2 && !fb.empty())
    mj["free_boundary_mean_radius"] = fb_radius / static_cast<double>(fb.size());
  mj["code_version"] = version_string();
  write_text(fs::path(cfg.out_dir) / "metrics.json", mj.dump(2) + "\n");

  std::printf("%s: linf %.6g at (%g, %g), feasibility_min %.3g, boundary_max_err %.3g\n",
              cfg.problem.c_str(), rep.linf, rep.linf_location[0], rep.linf_location[1],
              rep.feasibility_min, rep.boundary_max_err);
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (cfg.axis != "layers" && cfg.axis != "nodes" && cfg.axis != "points")
    throw std::invalid_argument("sweep: axis must be layers, nodes or points");
  const ProblemSpec& problem = problem_by_id(cfg.problem);

  nlohmann::json echo = config_echo(cfg);
  echo["axis"] = cfg.axis;
  echo["budget"] = cfg.budget;
  std::string csv = "# " + echo.dump() + "\naxis_value,final_loss,iters_to_tol_or_cap\n";
  for (double v : cfg.values) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.max_adam_iters = cfg.budget;
    tc.lbfgs_max_iters = 0;  // architecture comparison over a fixed Adam budget
    if (cfg.axis == "layers") tc.layers = static_cast<int>(v);
    else if (cfg.axis == "nodes") tc.nodes = static_cast<int>(v);
    else tc.n_points = static_cast<Index>(v);
    const TrainReport rep = train(problem, tc);
    const long iters = rep.termination == "tol_reached" ? rep.adam_iters : cfg.budget;
    csv += fmt(v) + "," + fmt(rep.adam_final_loss) + "," + std::to_string(iters) + "\n";
    std::printf("sweep %s=%g: final_loss %.6g (%ld iters)\n", cfg.axis.c_str(), v,
                rep.adam_final_loss, iters);
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "sweep.csv", csv);
  return 0;
}

int cmd_compare_loss(const RunConfig& cfg) {
  const ProblemSpec& problem = problem_by_id(cfg.problem);

  auto run_kind = [&](LossKind kind) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.loss_kind = kind;
    tc.tol = cfg.target;
    tc.max_adam_iters = cfg.budget;
    tc.lbfgs_max_iters = 0;
    tc.log_every = 1;
    return train(problem, tc);
  };
  const TrainReport comb = run_kind(LossKind::combined);
  const TrainReport sep = run_kind(LossKind::separated);

  auto min_so_far = [](const TrainReport& r) {
    std::vector<double> mins;
    double m = 1e300;
    for (const auto& e : r.trace) {
      m = std::min(m, e.loss);
      mins.push_back(m);
    }
    return mins;
  };
  const std::vector<double> mc = min_so_far(comb);
  const std::vector<double> ms = min_so_far(sep);

  nlohmann::json echo = config_echo(cfg);
  echo["target"] = cfg.target;
  echo["budget"] = cfg.budget;
  std::string csv = "# " + echo.dump() + "\niter,combined_min,separated_min\n";
  const size_t rows = std::max(mc.size(), ms.size());
  for (size_t i = 0; i < rows; ++i) {
    csv += std::to_string(i + 1);
    csv += ",";
    csv += i < mc.size() ? fmt(mc[i]) : fmt(mc.back());
    csv += ",";
    csv += i < ms.size() ? fmt(ms[i]) : fmt(ms.back());
    csv += "\n";
  }
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "compare.csv", csv);

  const long it_comb = comb.termination == "tol_reached" ? comb.adam_iters : -1;
  const long it_sep = sep.termination == "tol_reached" ? sep.adam_iters : -1;
  nlohmann::json cj;
  cj["config"] = echo;
  cj["iterations_to_target_combined"] = it_comb;
  cj["iterations_to_target_separated"] = it_sep;
  cj["separated_lambda_final"] = sep.lambda_final;
  cj["code_version"] = version_string();
  write_text(fs::path(cfg.out_dir) / "compare.json", cj.dump(2) + "\n");

  std::printf("%s target %.3g: combined %ld iterations, separated %ld (-1 = cap)\n",
              cfg.problem.c_str(), cfg.target, it_comb, it_sep);
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  const ProblemSpec& problem = problem_by_id(cfg.problem);
  const Index n = cfg.oracle_n > 0 ? cfg.oracle_n : (problem.domain.dim == 1 ? 2048 : 257);
  const GridSolution sol = run_oracle(problem, n, cfg.omega, cfg.tol_iter);

  Vec u_ref(sol.values.size());
  for (Index i = 0; i < u_ref.size(); ++i) {
    const auto e = problem.exact
                       ? std::optional<double>((*problem.exact)(
                             sol.points(0, i), problem.domain.dim == 2 ? sol.points(1, i) : 0.0)
                                                   .value)
                       : std::nullopt;
    u_ref[i] = e ? *e : std::numeric_limits<double>::quiet_NaN();
  }

  // mark grid points adjacent to a free-boundary transition
  std::vector<char> fb_mark(sol.values.size(), 0);
  if (sol.dim == 1) {
    for (Index i = 0; i + 1 < sol.values.size(); ++i)
      if (sol.contact[i] != sol.contact[i + 1]) fb_mark[i] = fb_mark[i + 1] = 1;
  } else {
    const Index nn = sol.n;
    auto at = [&](Index ix, Index iy) { return iy * nn + ix; };
    for (Index iy = 0; iy < nn; ++iy)
      for (Index ix = 0; ix + 1 < nn; ++ix)
        if (sol.contact[at(ix, iy)] != sol.contact[at(ix + 1, iy)])
          fb_mark[at(ix, iy)] = fb_mark[at(ix + 1, iy)] = 1;
    for (Index ix = 0; ix < nn; ++ix)
      for (Index iy = 0; iy + 1 < nn; ++iy)
        if (sol.contact[at(ix, iy)] != sol.contact[at(ix, iy + 1)])
          fb_mark[at(ix, iy)] = fb_mark[at(ix, iy + 1)] = 1;
  }

  fs::create_directories(cfg.out_dir);
  nlohmann::json echo = config_echo(cfg);
  echo["oracle_n"] = n;
  echo["omega"] = cfg.omega;
  echo["tol_iter"] = cfg.tol_iter;
  write_pointwise_csv(fs::path(cfg.out_dir) / "oracle.csv", echo, sol.points, sol.values, u_ref,
                      sol.phi, sol.contact, &fb_mark);

  nlohmann::json oj;
  oj["config"] = echo;
  oj["iterations"] = sol.iterations;
  oj["residual_norm"] = sol.residual_norm;
  std::vector<std::vector<double>> fb;
  for (Index k = 0; k < sol.free_boundary.cols(); ++k) {
    if (sol.dim == 1)
      fb.push_back({sol.free_boundary(0, k)});
    else
      fb.push_back({sol.free_boundary(0, k), sol.free_boundary(1, k)});
  }
  oj["free_boundary"] = fb;
  oj["code_version"] = version_string();
  write_text(fs::path(cfg.out_dir) / "oracle.json", oj.dump(2) + "\n");

  std::printf("%s oracle on %ld points: %ld sweeps, %zu free-boundary cells\n",
              cfg.problem.c_str(), static_cast<long>(n), sol.iterations, fb.size());
  return 0;
}

}  // namespace opinn
