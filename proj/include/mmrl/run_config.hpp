#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmrl/adversary.hpp"
#include "mmrl/learner.hpp"
#include "mmrl/market.hpp"

namespace mmrl {

struct EvalConfig {
  long episodes = 10000;  // desk scale; full scale is 1e5
  std::vector<std::string> regimes = {"fixed"};
};

/// One experiment: everything a run needs, resolved from a strict JSON
/// config file. Unknown keys are hard errors; the seed is mandatory.
struct RunConfig {
  int version = 1;
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output_dir;
  SimConfig sim;
  RewardParams reward;
  AdversaryRegime adversary = default_adversary();
  TrainConfig train;
  EvalConfig eval;

  static AdversaryRegime default_adversary();
  void validate() const;
};

RunConfig run_config_from_json(const std::string& text);
/// Serialises with every default materialised; re-parsing yields an
/// identical configuration.
std::string run_config_to_json(const RunConfig& config);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

}  // namespace mmrl
