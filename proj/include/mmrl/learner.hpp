#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mmrl/adversary.hpp"
#include "mmrl/critic.hpp"
#include "mmrl/market.hpp"
#include "mmrl/policy.hpp"
#include "mmrl/rng.hpp"

namespace mmrl {

struct TrainConfig {
  long pretrain_episodes = 1000;
  long train_episodes = 50000;  // desk scale; full scale is 1e6
  double lr_pretrain = 1e-3;
  double lr_critic = 1e-4;
  double lr_policy = 1e-4;
  int policy_update_period = 100;  // environment steps between policy steps
  double trace_decay = 0.97;
  long checkpoint_every = 5000;
  double weight_ceiling = 1e6;  // divergence guard on every weight vector

  void validate() const;
};

/// Everything a training run learns. The adversary members are engaged only
/// for Strategic regimes.
struct AgentBundle {
  GaussianPolicy mm_policy;
  CompatibleCritic mm_critic{GaussianPolicy::kParamDim, 0.97};
  std::optional<BetaPolicy> adv_policy;
  std::optional<CompatibleCritic> adv_critic;

  static AgentBundle fresh(const AdversaryRegime& regime, const TrainConfig& cfg);
  double max_abs_weight() const;
};

struct MetricsRow {
  long episode = 0;
  double mean_wealth = 0.0;
  double std_wealth = 0.0;
  double sharpe = 0.0;
  double mean_inv = 0.0;
  double std_inv = 0.0;
  double mean_spread = 0.0;
};

enum class TrainStatus { kOk, kDiverged };

struct TrainOptions {
  bool learn_mm = true;         // best-response audits freeze one side
  bool learn_adversary = true;
  bool run_pretrain = true;     // warm starts skip the critic pretrain phase
  int checkpoint_eval_episodes = 256;
};

using CheckpointFn =
    std::function<void(long episode, const AgentBundle&, const MetricsRow&)>;

struct TrainOutcome {
  TrainStatus status = TrainStatus::kOk;
  long episodes_completed = 0;
  std::vector<MetricsRow> log;
};

/// NAC-S(lambda) training loop. Phase 1 pretrains both critics for
/// config.pretrain_episodes at lr_pretrain with frozen policies; phase 2
/// runs the joint loop where the MM receives the step reward and a
/// Strategic adversary its exact negation, each agent evaluating its critic
/// by semi-gradient SARSA(lambda) and stepping its policy along the
/// advantage weights every policy_update_period environment steps.
///
/// train_rng drives the episodes; eval_rng seeds the periodic checkpoint
/// evaluations (frozen policies, flat start, training regime).
TrainOutcome train(const SimConfig& sim, const RewardParams& reward,
                   const AdversaryRegime& regime, AgentBundle& bundle,
                   const TrainConfig& config, Rng& train_rng, Rng eval_rng,
                   const TrainOptions& opts = {},
                   const CheckpointFn& checkpoint = nullptr);

/// Metrics-log CSV with the columns
/// checkpoint_episode,mean_wealth,std_wealth,sharpe,mean_inv,std_inv,mean_spread.
std::string metrics_csv(const std::vector<MetricsRow>& log);

}  // namespace mmrl
