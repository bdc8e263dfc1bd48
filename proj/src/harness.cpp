#include "mmrl/harness.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include "mmrl/errors.hpp"
#include "mmrl/stats.hpp"

namespace mmrl {

double EvalReport::stderr_wealth() const {
  return n_episodes > 0 ? std_wealth / std::sqrt(double(n_episodes)) : 0.0;
}

namespace {

SimConfig eval_sim_config(const SimConfig& sim) {
  SimConfig c = sim;
  c.h0_lo = c.h0_hi = 0;   // fresh trading day
  c.t0_lo = c.t0_hi = 0.0;  // full horizon
  return c;
}

struct EpisodeOutputs {
  std::vector<double> wealth;
  std::vector<double> inventory;
  std::vector<double> spread;
  std::vector<double> reward;  // MM episodic reward sum
};

/// Runs n independent flat-start episodes on child streams of `seed`.
/// Episode i always uses child stream i, so any worker partition produces
/// identical outputs.
EpisodeOutputs run_batch(const SimConfig& sim, const RewardParams& rp,
                         const GaussianPolicy& policy,
                         const AdversaryRegime& regime,
                         const BetaPolicy* adversary_policy, long n_episodes,
                         std::uint64_t seed, int workers) {
  const SimConfig eval_sim = eval_sim_config(sim);
  const double h_scale = eval_sim.h_scale();
  const Rng base(seed);

  EpisodeOutputs out;
  out.wealth.resize(n_episodes);
  out.inventory.resize(n_episodes);
  out.spread.resize(n_episodes);
  out.reward.resize(n_episodes);

  auto run_range = [&](long begin, long end) {
    MmActionSource mm = [&policy, h_scale](const MarketState& s, Rng& r) {
      return policy.sample(features(s.t, double(s.h), h_scale), r);
    };
    ParamSource params = make_param_source(regime, adversary_policy, h_scale);
    for (long i = begin; i < end; ++i) {
      Rng ep = base.child(static_cast<std::uint64_t>(i));
      const EpisodeStats st = run_episode(eval_sim, rp, mm, params, ep);
      out.wealth[i] = st.terminal_wealth();
      out.inventory[i] = double(st.terminal_inventory);
      out.spread[i] = st.mean_spread;
      out.reward[i] = st.reward_sum;
    }
  };

  if (workers <= 1 || n_episodes < 2L * workers) {
    run_range(0, n_episodes);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_episodes + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long begin = w * chunk;
      const long end = std::min(n_episodes, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

EvalReport report_from(const EpisodeOutputs& out) {
  const SampleStats w = summarize(out.wealth);
  const SampleStats h = summarize(out.inventory);
  const SampleStats s = summarize(out.spread);
  EvalReport r;
  r.mean_wealth = w.mean;
  r.std_wealth = w.std;
  r.sharpe = w.std > 0.0 ? w.mean / w.std : 0.0;
  r.mean_inv = h.mean;
  r.std_inv = h.std;
  r.mean_spread = s.mean;
  r.std_spread = s.std;
  r.n_episodes = w.n;
  return r;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<size_t>(n));
}

}  // namespace

EvalReport evaluate(const SimConfig& sim, const GaussianPolicy& policy,
                    const AdversaryRegime& regime,
                    const BetaPolicy* adversary_policy, long n_episodes,
                    std::uint64_t seed, int workers) {
  if (n_episodes < 1) throw ConfigError("evaluate: n_episodes must be >= 1");
  return report_from(run_batch(sim, RewardParams{}, policy, regime,
                               adversary_policy, n_episodes, seed, workers));
}

std::vector<CrossTestCell> cross_test(const SimConfig& sim,
                                      const std::vector<NamedPolicy>& snapshots,
                                      const std::vector<TestRegime>& regimes,
                                      long n_episodes, std::uint64_t seed,
                                      int workers) {
  if (snapshots.empty() || regimes.empty()) {
    throw ConfigError("cross-test: need at least one snapshot and one regime");
  }
  std::vector<CrossTestCell> cells;
  for (const NamedPolicy& snap : snapshots) {
    double fixed_var = 0.0;
    bool have_fixed = false;
    const size_t row_start = cells.size();
    for (const TestRegime& tr : regimes) {
      CrossTestCell cell;
      cell.snapshot = snap.name;
      cell.test_regime = tr.name;
      const BetaPolicy* adv =
          tr.adversary_policy ? &*tr.adversary_policy : nullptr;
      // Common seeds across every cell: paired comparisons between regimes
      // and snapshots see the same draws.
      cell.report = evaluate(sim, snap.policy, tr.regime, adv, n_episodes,
                             seed, workers);
      if (tr.name == "fixed") {
        fixed_var = cell.report.std_wealth * cell.report.std_wealth;
        have_fixed = true;
      }
      cells.push_back(std::move(cell));
    }
    if (have_fixed && fixed_var > 0.0) {
      for (size_t i = row_start; i < cells.size(); ++i) {
        const double v = cells[i].report.std_wealth * cells[i].report.std_wealth;
        cells[i].wealth_var_ratio_vs_fixed = v / fixed_var;
      }
    }
  }
  return cells;
}

std::string eval_report_csv(const std::vector<CrossTestCell>& cells) {
  std::string out =
      "snapshot,test_regime,n_episodes,mean_wealth,std_wealth,sharpe,"
      "mean_inv,std_inv,mean_spread,std_spread,wealth_var_ratio_vs_fixed\n";
  for (const CrossTestCell& c : cells) {
    out += c.snapshot;
    out += ',';
    out += c.test_regime;
    out += ',';
    out += std::to_string(c.report.n_episodes);
    for (double v : {c.report.mean_wealth, c.report.std_wealth, c.report.sharpe,
                     c.report.mean_inv, c.report.std_inv, c.report.mean_spread,
                     c.report.std_spread, c.wealth_var_ratio_vs_fixed}) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string eval_report_table(const std::vector<CrossTestCell>& cells) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-10s %9s  %-18s %8s  %-16s %-14s\n",
                "snapshot", "test", "episodes", "term. wealth", "sharpe",
                "term. inventory", "avg spread");
  out += buf;
  for (const CrossTestCell& c : cells) {
    char wealth[40], inv[40], spread[40];
    std::snprintf(wealth, sizeof(wealth), "%.1f +- %.1f", c.report.mean_wealth,
                  c.report.std_wealth);
    std::snprintf(inv, sizeof(inv), "%.2f +- %.2f", c.report.mean_inv,
                  c.report.std_inv);
    std::snprintf(spread, sizeof(spread), "%.2f +- %.2f", c.report.mean_spread,
                  c.report.std_spread);
    std::snprintf(buf, sizeof(buf), "%-20s %-10s %9ld  %-18s %8.2f  %-16s %-14s\n",
                  c.snapshot.c_str(), c.test_regime.c_str(), c.report.n_episodes,
                  wealth, c.report.sharpe, inv, spread);
    out += buf;
  }
  out += "(spread std is across per-episode average spreads)\n";
  return out;
}

std::string surface_csv_gaussian(const GaussianPolicy& policy,
                                 const std::vector<double>& t_grid,
                                 const std::vector<long>& h_grid,
                                 double h_scale) {
  std::string out = "t,h,p_tilde_mode,psi_mode\n";
  for (double t : t_grid) {
    for (long h : h_grid) {
      const MmAction mode = policy.mode(features(t, double(h), h_scale));
      append_double(out, t);
      out += ',';
      out += std::to_string(h);
      out += ',';
      append_double(out, mode.p_tilde);
      out += ',';
      append_double(out, mode.psi_raw);
      out += '\n';
    }
  }
  return out;
}

std::string surface_csv_beta(const BetaPolicy& policy,
                             const std::vector<std::string>& param_names,
                             const std::vector<double>& t_grid,
                             const std::vector<long>& h_grid, double h_scale) {
  if (param_names.size() != policy.heads.size()) {
    throw ConfigError("surface: parameter name count mismatch");
  }
  std::string out = "t,h";
  for (const std::string& name : param_names) out += "," + name + "_mode";
  out += ",mode_undefined\n";
  for (double t : t_grid) {
    for (long h : h_grid) {
      const FeatureVec phi = features(t, double(h), h_scale);
      append_double(out, t);
      out += ',';
      out += std::to_string(h);
      bool any_undefined = false;
      for (const BetaParamPolicy& head : policy.heads) {
        const BetaParamPolicy::Mode m = head.mode(phi);
        any_undefined = any_undefined || m.undefined;
        out += ',';
        append_double(out, m.value);
      }
      out += ',';
      out += any_undefined ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

AuditReport best_response_audit(const SimConfig& sim, const RewardParams& reward,
                                const AdversaryRegime& regime,
                                const AgentBundle& bundle, long budget_episodes,
                                double epsilon_rel, long eval_episodes,
                                const TrainConfig& train_config,
                                std::uint64_t seed) {
  if (regime.kind != AdversaryKind::kStrategic || !bundle.adv_policy) {
    throw ConfigError("audit: requires a strategic pair snapshot");
  }
  if (budget_episodes < 0) throw ConfigError("audit: negative budget");

  const Rng root(seed);
  const std::uint64_t eval_seed = root.child(stream::kAudit).seed();

  // MM episodic rewards (with the pair's penalty settings) for a frozen
  // (policy, adversary) pair on the common evaluation seeds.
  auto mm_rewards = [&](const GaussianPolicy& mm, const BetaPolicy& adv) {
    return run_batch(sim, reward, mm, regime, &adv, eval_episodes, eval_seed,
                     1).reward;
  };

  const std::vector<double> base_rewards =
      mm_rewards(bundle.mm_policy, *bundle.adv_policy);
  const SampleStats base = summarize(base_rewards);
  AuditReport report;
  report.epsilon = epsilon_rel * std::abs(base.mean);
  report.vacuous = budget_episodes == 0;

  TrainConfig retrain_cfg = train_config;
  retrain_cfg.train_episodes = budget_episodes;

  auto paired_direction = [&](const std::vector<double>& before,
                              const std::vector<double>& after) {
    AuditDirection d;
    std::vector<double> diff(before.size());
    for (size_t i = 0; i < before.size(); ++i) diff[i] = after[i] - before[i];
    const SampleStats ds = summarize(diff);
    d.reward_before = summarize(before).mean;
    d.reward_after = summarize(after).mean;
    d.delta = ds.mean;
    d.stderr_delta = ds.stderr_mean();
    d.exploitable = d.delta > report.epsilon + 2.0 * d.stderr_delta;
    return d;
  };

  // Direction 1: retrain the adversary against the frozen MM.
  {
    AgentBundle work = bundle;
    if (budget_episodes > 0) {
      TrainOptions opts;
      opts.learn_mm = false;
      opts.learn_adversary = true;
      opts.run_pretrain = false;
      Rng train_rng = root.child(stream::kAudit + 100);
      train(sim, reward, regime, work, retrain_cfg, train_rng,
            root.child(stream::kAudit + 101), opts);
    }
    const std::vector<double> after = mm_rewards(bundle.mm_policy, *work.adv_policy);
    // Adversary rewards are the negated MM rewards.
    std::vector<double> before_adv(base_rewards.size()), after_adv(after.size());
    for (size_t i = 0; i < base_rewards.size(); ++i) before_adv[i] = -base_rewards[i];
    for (size_t i = 0; i < after.size(); ++i) after_adv[i] = -after[i];
    report.adversary = paired_direction(before_adv, after_adv);
  }

  // Direction 2: retrain the MM against the frozen adversary.
  {
    AgentBundle work = bundle;
    if (budget_episodes > 0) {
      TrainOptions opts;
      opts.learn_mm = true;
      opts.learn_adversary = false;
      opts.run_pretrain = false;
      Rng train_rng = root.child(stream::kAudit + 200);
      train(sim, reward, regime, work, retrain_cfg, train_rng,
            root.child(stream::kAudit + 201), opts);
    }
    const std::vector<double> after = mm_rewards(work.mm_policy, *bundle.adv_policy);
    report.mm = paired_direction(base_rewards, after);
  }

  report.approximate_ne = !report.mm.exploitable && !report.adversary.exploitable;
  return report;
}

}  // namespace mmrl
