#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/adversary.hpp"
#include "mmrl/learner.hpp"
#include "mmrl/market.hpp"

namespace mmrl {

/// Aggregated evaluation desiderata over independent flat-start episodes.
/// sharpe = mean_wealth / std_wealth; the spread std is taken across
/// per-episode average spreads.
struct EvalReport {
  double mean_wealth = 0.0;
  double std_wealth = 0.0;
  double sharpe = 0.0;
  double mean_inv = 0.0;
  double std_inv = 0.0;
  double mean_spread = 0.0;
  double std_spread = 0.0;
  long n_episodes = 0;

  double stderr_wealth() const;
};

/// Evaluates a frozen MM policy over n_episodes independent episodes with
/// H0 = 0 and t0 = 0. Each episode runs on its own child stream of `seed`,
/// so reports are identical for any worker count.
EvalReport evaluate(const SimConfig& sim, const GaussianPolicy& policy,
                    const AdversaryRegime& regime,
                    const BetaPolicy* adversary_policy, long n_episodes,
                    std::uint64_t seed, int workers = 1);

struct CrossTestCell {
  std::string snapshot;     // row label: training regime / experiment name
  std::string test_regime;  // column label
  EvalReport report;
  double wealth_var_ratio_vs_fixed = 1.0;
};

struct NamedPolicy {
  std::string name;
  GaussianPolicy policy;
};

struct TestRegime {
  std::string name;
  AdversaryRegime regime;
  std::optional<BetaPolicy> adversary_policy;  // strategic test regimes
};

/// Evaluates every snapshot under every regime with common seeds, and the
/// terminal-wealth variance inflation of each cell relative to that
/// snapshot's "fixed" cell (ratio 1 when no fixed column is present).
std::vector<CrossTestCell> cross_test(const SimConfig& sim,
                                      const std::vector<NamedPolicy>& snapshots,
                                      const std::vector<TestRegime>& regimes,
                                      long n_episodes, std::uint64_t seed,
                                      int workers = 1);

std::string eval_report_csv(const std::vector<CrossTestCell>& cells);
std::string eval_report_table(const std::vector<CrossTestCell>& cells);

/// Most-probable-action surfaces on a (t, h) grid. Gaussian rows are
/// t,h,p_tilde_mode,psi_mode; Beta rows are t,h,<param>_mode...,mode_flag
/// (flag set where alpha+beta == 2 forced the interval midpoint).
std::string surface_csv_gaussian(const GaussianPolicy& policy,
                                 const std::vector<double>& t_grid,
                                 const std::vector<long>& h_grid, double h_scale);
std::string surface_csv_beta(const BetaPolicy& policy,
                             const std::vector<std::string>& param_names,
                             const std::vector<double>& t_grid,
                             const std::vector<long>& h_grid, double h_scale);

struct AuditDirection {
  double reward_before = 0.0;  // retrained player's mean episodic reward
  double reward_after = 0.0;
  double delta = 0.0;
  double stderr_delta = 0.0;
  bool exploitable = false;  // delta > epsilon + 2*stderr
};

struct AuditReport {
  AuditDirection mm;         // MM retrained against the frozen adversary
  AuditDirection adversary;  // adversary retrained against the frozen MM
  double epsilon = 0.0;      // absolute tolerance used
  bool approximate_ne = false;
  bool vacuous = false;  // zero budget: nothing retrained
};

/// Empirical best-response audit of a converged Strategic pair: each side
/// in turn is retrained from its snapshot against the frozen opponent for
/// `budget_episodes`, and the retrained player's mean episodic reward is
/// compared before/after on common evaluation seeds. The pair passes as an
/// approximate equilibrium when neither side improves by more than
/// epsilon_rel * |baseline MM reward| + 2 standard errors.
AuditReport best_response_audit(const SimConfig& sim, const RewardParams& reward,
                                const AdversaryRegime& regime,
                                const AgentBundle& bundle, long budget_episodes,
                                double epsilon_rel, long eval_episodes,
                                const TrainConfig& train_config,
                                std::uint64_t seed);

}  // namespace mmrl
