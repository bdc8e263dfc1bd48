#include "mmrl/learner.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "mmrl/errors.hpp"
#include "mmrl/stats.hpp"

namespace mmrl {

void TrainConfig::validate() const {
  if (pretrain_episodes < 0) throw ConfigError("train: pretrain_episodes < 0");
  if (train_episodes < 0) throw ConfigError("train: train_episodes < 0");
  if (!(lr_pretrain > 0.0) || !(lr_critic > 0.0) || !(lr_policy > 0.0)) {
    throw ConfigError("train: learning rates must be positive");
  }
  if (policy_update_period < 1) {
    throw ConfigError("train: policy_update_period must be >= 1");
  }
  if (!(trace_decay >= 0.0 && trace_decay <= 1.0)) {
    throw ConfigError("train: trace decay must lie in [0, 1]");
  }
  if (checkpoint_every < 1) throw ConfigError("train: checkpoint_every must be >= 1");
  if (!(weight_ceiling > 0.0)) throw ConfigError("train: weight ceiling must be positive");
}

AgentBundle AgentBundle::fresh(const AdversaryRegime& regime,
                               const TrainConfig& cfg) {
  AgentBundle b;
  b.mm_policy = GaussianPolicy{};
  b.mm_critic = CompatibleCritic(GaussianPolicy::kParamDim, cfg.trace_decay);
  if (regime.kind == AdversaryKind::kStrategic) {
    b.adv_policy = make_adversary_policy(regime);
    b.adv_critic = CompatibleCritic(b.adv_policy->param_dim(), cfg.trace_decay);
  }
  return b;
}

double AgentBundle::max_abs_weight() const {
  double m = std::max(mm_policy.max_abs_weight(), mm_critic.max_abs_weight());
  if (adv_policy) m = std::max(m, adv_policy->max_abs_weight());
  if (adv_critic) m = std::max(m, adv_critic->max_abs_weight());
  return m;
}

namespace {

/// Per-agent SARSA(lambda) bookkeeping shared by the Gaussian MM and the
/// Beta adversary. The pending transition (s, a) is finalised either when
/// the next action is chosen (using Q(s', a')) or at the terminal step.
struct AgentState {
  CompatibleCritic* critic = nullptr;
  bool has_pending = false;
  double pending_reward = 0.0;
  std::vector<double> rbf_prev;
  std::vector<double> score_prev;
  std::vector<double> rbf_cur;
  std::vector<double> score_cur;
  long phase2_steps = 0;

  void init(CompatibleCritic* c) {
    critic = c;
    rbf_prev.assign(RbfBasis::kDim, 0.0);
    rbf_cur.assign(RbfBasis::kDim, 0.0);
    score_prev.assign(static_cast<size_t>(c->policy_dim()), 0.0);
    score_cur.assign(static_cast<size_t>(c->policy_dim()), 0.0);
  }

  void begin_episode() {
    critic->begin_episode();
    has_pending = false;
  }

  void finalize(double q_next, double lr) {
    const double q_prev = critic->q_value(rbf_prev, score_prev);
    const double delta = pending_reward + q_next - q_prev;
    if (!std::isfinite(delta)) {
      throw DivergenceError("training aborted: non-finite TD error", "");
    }
    critic->td_update(delta, lr, rbf_prev, score_prev);
  }

  void promote_current() {
    rbf_prev.swap(rbf_cur);
    score_prev.swap(score_cur);
    has_pending = true;
  }
};

/// Frozen-policy evaluation used for checkpoint metrics: flat start, full
/// horizon, the training regime's parameter supplier.
MetricsRow checkpoint_metrics(long episode, const SimConfig& sim,
                              const AdversaryRegime& regime,
                              const AgentBundle& bundle, int n_episodes,
                              Rng rng) {
  SimConfig eval_sim = sim;
  eval_sim.h0_lo = eval_sim.h0_hi = 0;
  eval_sim.t0_lo = eval_sim.t0_hi = 0.0;
  const double h_scale = eval_sim.h_scale();

  const GaussianPolicy policy = bundle.mm_policy;  // frozen copy
  MmActionSource mm = [&policy, h_scale](const MarketState& s, Rng& r) {
    return policy.sample(features(s.t, double(s.h), h_scale), r);
  };
  const BetaPolicy* adv = bundle.adv_policy ? &*bundle.adv_policy : nullptr;
  ParamSource params = make_param_source(regime, adv, h_scale);

  std::vector<double> wealth(n_episodes), inv(n_episodes), spread(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    Rng ep = rng.child(static_cast<std::uint64_t>(i));
    const EpisodeStats st = run_episode(eval_sim, RewardParams{}, mm, params, ep);
    wealth[i] = st.terminal_wealth();
    inv[i] = double(st.terminal_inventory);
    spread[i] = st.mean_spread;
  }
  const SampleStats w = summarize(wealth), h = summarize(inv), s = summarize(spread);
  MetricsRow row;
  row.episode = episode;
  row.mean_wealth = w.mean;
  row.std_wealth = w.std;
  row.sharpe = w.std > 0.0 ? w.mean / w.std : 0.0;
  row.mean_inv = h.mean;
  row.std_inv = h.std;
  row.mean_spread = s.mean;
  return row;
}

}  // namespace

TrainOutcome train(const SimConfig& sim, const RewardParams& reward,
                   const AdversaryRegime& regime, AgentBundle& bundle,
                   const TrainConfig& config, Rng& train_rng, Rng eval_rng,
                   const TrainOptions& opts, const CheckpointFn& checkpoint) {
  sim.validate();
  config.validate();
  regime.validate();
  const bool strategic = regime.kind == AdversaryKind::kStrategic;
  if (strategic && (!bundle.adv_policy || !bundle.adv_critic)) {
    throw ConfigError("train: strategic regime requires adversary policy and critic");
  }
  bundle.mm_critic.lambda = config.trace_decay;
  if (bundle.adv_critic) bundle.adv_critic->lambda = config.trace_decay;

  const double h_scale = sim.h_scale();
  const bool adversary_learns = strategic && opts.learn_adversary;

  AgentState mm_state;
  mm_state.init(&bundle.mm_critic);
  AgentState adv_state;
  if (strategic) adv_state.init(&*bundle.adv_critic);

  bool pretrain_phase = true;
  double lr_critic_now = config.lr_pretrain;

  // A finalised transition counts toward the agent's policy-update cadence
  // only in phase 2 and only while that agent's policy is learning.
  auto after_mm_transition = [&] {
    if (pretrain_phase || !opts.learn_mm) return;
    if (++mm_state.phase2_steps % config.policy_update_period == 0) {
      bundle.mm_policy.apply_natural_step(config.lr_policy, bundle.mm_critic.w_a);
      bundle.mm_critic.reset_advantage();
    }
  };
  auto after_adv_transition = [&] {
    if (pretrain_phase || !adversary_learns) return;
    if (++adv_state.phase2_steps % config.policy_update_period == 0) {
      bundle.adv_policy->apply_natural_step(config.lr_policy,
                                            bundle.adv_critic->w_a);
      bundle.adv_critic->reset_advantage();
    }
  };

  MmActionSource mm_source = [&](const MarketState& s, Rng& rng) {
    const FeatureVec phi = features(s.t, double(s.h), h_scale);
    const MmAction a = bundle.mm_policy.sample(phi, rng);
    bundle.mm_critic.basis.compute(s.t, double(s.h) / h_scale, mm_state.rbf_cur);
    bundle.mm_policy.score(phi, a, mm_state.score_cur);
    if (mm_state.has_pending) {
      mm_state.finalize(bundle.mm_critic.q_value(mm_state.rbf_cur, mm_state.score_cur),
                        lr_critic_now);
      after_mm_transition();
    }
    mm_state.promote_current();
    return a;
  };

  ParamSource param_source;
  if (strategic) {
    param_source.on_episode_start = [&](Rng&) { return regime.base_params; };
    param_source.on_step = [&](const MarketState& s, const MarketParams&,
                               Rng& rng) {
      const FeatureVec phi = features(s.t, double(s.h), h_scale);
      std::array<double, 3> values{};
      const size_t n = bundle.adv_policy->heads.size();
      bundle.adv_policy->sample(phi, rng, std::span<double>(values.data(), n));
      bundle.adv_critic->basis.compute(s.t, double(s.h) / h_scale, adv_state.rbf_cur);
      bundle.adv_policy->score(phi, std::span<const double>(values.data(), n),
                               adv_state.score_cur);
      if (adv_state.has_pending) {
        adv_state.finalize(
            bundle.adv_critic->q_value(adv_state.rbf_cur, adv_state.score_cur),
            lr_critic_now);
        after_adv_transition();
      }
      adv_state.promote_current();
      return apply_controlled(regime,
                              std::span<const double>(values.data(), n));
    };
  } else {
    param_source = make_param_source(regime, nullptr, h_scale);
  }

  StepObserver observer = [&](const StepRecord& rec) {
    // Zero-sum bookkeeping: the adversary is paid the exact negation.
    mm_state.pending_reward = rec.reward;
    if (strategic) adv_state.pending_reward = -rec.reward;
    if (rec.terminal) {
      mm_state.finalize(0.0, lr_critic_now);
      mm_state.has_pending = false;
      after_mm_transition();
      if (strategic) {
        adv_state.finalize(0.0, lr_critic_now);
        adv_state.has_pending = false;
        after_adv_transition();
      }
    }
  };

  TrainOutcome outcome;
  long checkpoint_index = 0;

  auto run_phase = [&](long episodes, bool pretrain, double lr) -> bool {
    pretrain_phase = pretrain;
    lr_critic_now = lr;
    for (long ep = 0; ep < episodes; ++ep) {
      mm_state.begin_episode();
      if (strategic) adv_state.begin_episode();
      try {
        run_episode(sim, reward, mm_source, param_source, train_rng, &observer);
      } catch (const DivergenceError&) {
        outcome.status = TrainStatus::kDiverged;
        return false;
      }
      if (!pretrain) ++outcome.episodes_completed;

      if (bundle.max_abs_weight() > config.weight_ceiling) {
        outcome.status = TrainStatus::kDiverged;
        return false;
      }
      if (!pretrain && (outcome.episodes_completed % config.checkpoint_every == 0 ||
                        outcome.episodes_completed == config.train_episodes)) {
        const MetricsRow row = checkpoint_metrics(
            outcome.episodes_completed, sim, regime, bundle,
            opts.checkpoint_eval_episodes,
            eval_rng.child(static_cast<std::uint64_t>(checkpoint_index++)));
        outcome.log.push_back(row);
        if (checkpoint) checkpoint(outcome.episodes_completed, bundle, row);
      }
    }
    return true;
  };

  if (opts.run_pretrain) {
    if (!run_phase(config.pretrain_episodes, true, config.lr_pretrain)) {
      return outcome;
    }
  }
  run_phase(config.train_episodes, false, config.lr_critic);
  return outcome;
}

std::string metrics_csv(const std::vector<MetricsRow>& log) {
  std::string out =
      "checkpoint_episode,mean_wealth,std_wealth,sharpe,mean_inv,std_inv,"
      "mean_spread\n";
  char buf[256];
  for (const MetricsRow& r : log) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.episode, r.mean_wealth, r.std_wealth, r.sharpe, r.mean_inv,
                  r.std_inv, r.mean_spread);
    out += buf;
  }
  return out;
}

}  // namespace mmrl
