#pragma once

#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "opinn/metrics.hpp"
#include "opinn/optim.hpp"
#include "opinn/oracle.hpp"
#include "opinn/problems.hpp"

namespace opinn {

// Resolved run settings: catalog defaults, overridden by a JSON config file,
// overridden by CLI flags. Unknown config keys are rejected.
struct RunConfig {
  std::string problem = "phi1";
  uint64_t seed = 0;
  std::string out_dir = ".";
  TrainConfig train;

  // evaluate
  std::string params_path;
  Index resolution = -1;  // < 0: 1001 in 1D, 201 in 2D
  std::string reference = "auto";  // auto|exact|psor|membrane
  double contact_delta = -1.0;

  // sweep / compare-loss
  std::string axis = "layers";
  std::vector<double> values;
  long budget = 2000;
  double target = 1e-2;

  // oracle
  Index oracle_n = -1;  // < 0: 2048 in 1D, 257 in 2D
  double omega = 1.8;
  double tol_iter = 1e-12;
};

// Applies a JSON config file onto `cfg`, skipping keys that were already
// set by command-line flags (flags override file, file overrides catalog
// defaults). Throws on unknown keys.
void apply_config_file(RunConfig& cfg, const std::string& path,
                       const std::set<std::string>& skip = {});

nlohmann::json config_echo(const RunConfig& cfg);

std::string version_string();

int cmd_train(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_compare_loss(const RunConfig& cfg);
int cmd_oracle(const RunConfig& cfg);

}  // namespace opinn
