#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/rng.hpp"

namespace mmrl {

/// Model parameters the adversary may control, plus the fixed volatility.
/// b: drift (price units per unit time); sigma: volatility (price units per
/// sqrt-time); a_*: base arrival intensities (fills per unit time);
/// k_*: intensity decay rates (inverse price units).
struct MarketParams {
  double b = 0.0;
  double sigma = 2.0;
  double a_bid = 140.0;
  double a_ask = 140.0;
  double k_bid = 1.5;
  double k_ask = 1.5;

  void validate() const;
};

/// Episode-level simulation settings. terminal_time() == n_steps * dt.
/// Episode start times are restricted to the dt grid so that every episode
/// terminates exactly at t == terminal_time().
struct SimConfig {
  int n_steps = 200;
  double dt = 0.005;
  double z0 = 100.0;
  long h0_lo = -50;  // episode start inventory drawn uniformly from
  long h0_hi = 50;   // {h0_lo, ..., h0_hi}
  long h_min = -50;
  long h_max = 50;
  double t0_lo = 0.0;  // start time drawn uniformly from the dt-grid points
  double t0_hi = 0.95;  // inside [t0_lo, t0_hi]
  double sigma = 2.0;

  double terminal_time() const { return n_steps * dt; }
  /// Inventory normalisation constant for state features.
  double h_scale() const;
  void validate() const;
};

/// One episode's market state.
struct MarketState {
  double t = 0.0;
  int n = 0;
  double z = 0.0;
  long h = 0;
  double x = 0.0;
};

/// Bid/ask offsets from the midprice. Both non-negative by construction.
struct Quote {
  double delta_bid = 0.0;  // bid quoted at z - delta_bid
  double delta_ask = 0.0;  // ask quoted at z + delta_ask
  bool bid_clamped = false;  // raw offset was negative and clamped to 0
  bool ask_clamped = false;

  double spread() const { return delta_bid + delta_ask; }
};

struct FillResult {
  bool bid_filled = false;
  bool ask_filled = false;
};

/// MM action as sampled by a policy: reservation-price offset and spread.
/// psi_raw is the pre-clamp spread sample (used for scoring); executed_psi()
/// is what the environment interprets.
struct MmAction {
  double p_tilde = 0.0;
  double psi_raw = 0.0;

  static constexpr double kPsiFloor = 1e-4;
  double executed_psi() const { return psi_raw < kPsiFloor ? kPsiFloor : psi_raw; }
};

/// Converts (reservation offset, spread) into bid/ask offsets:
///   delta_bid = psi/2 - p_tilde, delta_ask = psi/2 + p_tilde,
/// each clamped below at zero independently. Throws InvalidActionError for
/// non-positive or non-finite psi.
Quote quote_from_action(double p_tilde, double psi);

/// One midprice innovation: z + b*dt + sigma*sqrt(dt)*noise.
double step_price(double z, const MarketParams& params, double dt, double noise);

/// Probability that a quote at offset delta is hit at least once during a
/// step of length dt: 1 - exp(-lambda*dt) with lambda = a*exp(-k*delta).
/// Throws InvalidActionError for negative delta.
double fill_probability(double delta, double a, double k, double dt);

/// Samples both sides independently. A side at its inventory limit never
/// fills (bid suppressed at h == h_max, ask suppressed at h == h_min).
/// Always consumes exactly two uniform draws so streams stay aligned.
FillResult sample_fills(const Quote& quote, const MarketParams& params,
                        const MarketState& state, const SimConfig& config,
                        Rng& rng);

/// Advances the state one step: fills update inventory and cash (execution
/// prices are set relative to the pre-step midprice), then the midprice
/// moves to new_z and time advances by dt.
MarketState apply_step(const MarketState& state, const Quote& quote,
                       const FillResult& fills, double new_z,
                       const SimConfig& config);

/// Portfolio mark-to-market value: x + h*z.
inline double mark_to_market(double x, long h, double z) {
  return x + static_cast<double>(h) * z;
}

/// Training reward: delta_pi - zeta*h^2 - (eta*h^2 at the terminal step).
/// h is the post-step inventory. eta = zeta = 0 recovers the risk-neutral
/// reward, whose episode sum telescopes to the MtM change.
inline double reward(double delta_pi, long h, bool is_terminal, double eta,
                     double zeta) {
  const double h2 = static_cast<double>(h) * static_cast<double>(h);
  return delta_pi - zeta * h2 - (is_terminal ? eta * h2 : 0.0);
}

struct RewardParams {
  double eta = 0.0;
  double zeta = 0.0;
};

/// Full record of one simulated step, pre-step state plus everything the
/// step produced. Enough to recompute rewards and scores offline.
struct StepRecord {
  MarketState state;      // pre-step
  MmAction action;
  Quote quote;
  MarketParams params;
  FillResult fills;
  double z_next = 0.0;
  double delta_pi = 0.0;  // MtM change over the step
  double reward = 0.0;
  bool terminal = false;  // the step lands on the terminal time
};

struct EpisodeStats {
  double pi_0 = 0.0;
  double pi_n = 0.0;
  long terminal_inventory = 0;
  double mean_spread = 0.0;  // time average of the executed spread
  double reward_sum = 0.0;
  int steps = 0;

  double terminal_wealth() const { return pi_n - pi_0; }
};

/// Supplies the MM action for a state.
using MmActionSource = std::function<MmAction(const MarketState&, Rng&)>;

/// Supplies model parameters: once at episode start, then per step (the
/// per-step hook receives the episode's current params and may replace
/// them; Fixed/Random suppliers return them unchanged).
struct ParamSource {
  std::function<MarketParams(Rng&)> on_episode_start;
  std::function<MarketParams(const MarketState&, const MarketParams&, Rng&)> on_step;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Rolls one episode: draw (t0, h0), then per step ask the adversary for
/// params, the MM for a quote, sample fills and the price innovation, and
/// advance. Terminates exactly at t == terminal_time().
///
/// Per-episode draw order (frozen for reproducibility): t0 grid index, h0,
/// adversary episode draws, then per step: adversary step draws, MM action,
/// price noise, bid uniform, ask uniform.
///
/// Throws InvalidActionError if the MM emits a non-finite action.
EpisodeStats run_episode(const SimConfig& config, const RewardParams& rp,
                         const MmActionSource& mm, const ParamSource& adversary,
                         Rng& rng, const StepObserver* observer = nullptr);

/// Writes a trajectory as row-per-step CSV with the columns
/// n,t,z,h,x,delta_bid,delta_ask,b,A_bid,A_ask,k_bid,k_ask,bid_filled,ask_filled,reward.
std::string trajectory_csv(const std::vector<StepRecord>& steps);

}  // namespace mmrl
