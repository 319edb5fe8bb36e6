#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "opinn/artifacts.hpp"

using namespace opinn;

namespace {

void add_common(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
  sub->add_option("--problem", cfg.problem, "problem id, phi1..phi6");
  sub->add_option("--seed", cfg.seed, "RNG seed");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--config", config_path, "JSON config file (flags override it)");
}

void add_train_flags(CLI::App* sub, RunConfig& cfg, std::string& loss, std::string& mode) {
  sub->add_option("--loss", loss, "combined|separated");
  sub->add_option("--points", cfg.train.n_points, "collocation points (default: catalog)");
  sub->add_option("--layers", cfg.train.layers, "hidden layers (default: catalog)");
  sub->add_option("--nodes", cfg.train.nodes, "hidden width (default: catalog)");
  sub->add_option("--tol", cfg.train.tol, "Adam stopping tolerance (default: catalog)");
  sub->add_option("--max-adam-iters", cfg.train.max_adam_iters, "Adam iteration cap");
  sub->add_option("--adam-lr", cfg.train.adam_lr, "Adam learning rate");
  sub->add_option("--lbfgs-max-iters", cfg.train.lbfgs_max_iters, "L-BFGS iteration cap");
  sub->add_option("--log-every", cfg.train.log_every, "trace logging period");
  sub->add_option("--sample-mode", mode, "fixed|resample_each_iter");
}

void apply_loss_mode(RunConfig& cfg, const std::string& loss, const std::string& mode) {
  if (!loss.empty()) {
    if (loss != "combined" && loss != "separated")
      throw std::invalid_argument("loss must be combined or separated");
    cfg.train.loss_kind = loss == "combined" ? LossKind::combined : LossKind::separated;
  }
  if (!mode.empty()) {
    if (mode != "fixed" && mode != "resample_each_iter")
      throw std::invalid_argument("sample-mode must be fixed or resample_each_iter");
    cfg.train.sample_mode =
        mode == "fixed" ? SampleMode::fixed : SampleMode::resample_each_iter;
  }
}

// config-file keys already pinned by explicit command-line flags
std::set<std::string> flag_keys(const CLI::App* sub) {
  static const std::map<std::string, std::string> alias = {
      {"--n", "oracle_n"}, {"--cap", "budget"}, {"--tol-iter", "tol_iter"}};
  std::set<std::string> keys;
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->count() == 0) continue;
    std::string name = opt->get_name();
    const auto it = alias.find(name);
    if (it != alias.end()) {
      keys.insert(it->second);
      continue;
    }
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    for (char& c : name)
      if (c == '-') c = '_';
    keys.insert(name);
  }
  return keys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"obstacle-problem PINN solver with hard Dirichlet boundaries"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, loss, mode;

  CLI::App* train = app.add_subcommand("train", "train a network on a catalog problem");
  add_common(train, cfg, config_path);
  add_train_flags(train, cfg, loss, mode);

  CLI::App* evaluate = app.add_subcommand("evaluate", "error map and metrics for a snapshot");
  add_common(evaluate, cfg, config_path);
  evaluate->add_option("--params", cfg.params_path, "params.snapshot path");
  evaluate->add_option("--resolution", cfg.resolution, "grid points per axis");
  evaluate->add_option("--reference", cfg.reference, "auto|exact|psor|membrane");
  evaluate->add_option("--contact-delta", cfg.contact_delta, "contact detection threshold");

  CLI::App* sweep = app.add_subcommand("sweep", "final loss across an architecture axis");
  add_common(sweep, cfg, config_path);
  add_train_flags(sweep, cfg, loss, mode);
  sweep->add_option("--axis", cfg.axis, "layers|nodes|points");
  sweep->add_option("--values", cfg.values, "axis values")->delimiter(',');
  sweep->add_option("--budget", cfg.budget, "Adam iterations per run");

  CLI::App* compare =
      app.add_subcommand("compare-loss", "combined vs separated loss on the same seed");
  add_common(compare, cfg, config_path);
  compare->add_option("--target", cfg.target, "loss level to reach");
  compare->add_option("--cap", cfg.budget, "Adam iteration cap per run");
  compare->add_option("--points", cfg.train.n_points, "collocation points");
  compare->add_option("--layers", cfg.train.layers, "hidden layers");
  compare->add_option("--nodes", cfg.train.nodes, "hidden width");

  CLI::App* oracle = app.add_subcommand("oracle", "classical grid solution");
  add_common(oracle, cfg, config_path);
  oracle->add_option("--n", cfg.oracle_n, "grid points per axis");
  oracle->add_option("--omega", cfg.omega, "SOR relaxation factor");
  oracle->add_option("--tol-iter", cfg.tol_iter, "sweep-change stopping tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(cfg, config_path, flag_keys(active));
    apply_loss_mode(cfg, loss, mode);

    if (train->parsed()) return cmd_train(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (compare->parsed()) return cmd_compare_loss(cfg);
    if (oracle->parsed()) return cmd_oracle(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
