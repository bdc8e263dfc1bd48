#include "mmrl/market.hpp"

#include <cmath>
#include <sstream>

#include "mmrl/errors.hpp"

namespace mmrl {

void MarketParams::validate() const {
  if (!(a_bid > 0.0) || !(a_ask > 0.0)) {
    throw ConfigError("market params: arrival intensities must be positive");
  }
  if (!(k_bid > 0.0) || !(k_ask > 0.0)) {
    throw ConfigError("market params: decay rates must be positive");
  }
  if (!(sigma >= 0.0)) {
    throw ConfigError("market params: sigma must be non-negative");
  }
  if (!std::isfinite(b)) {
    throw ConfigError("market params: drift must be finite");
  }
}

double SimConfig::h_scale() const {
  const double s = std::max(std::labs(h_min), std::labs(h_max));
  return s > 0.0 ? s : 1.0;
}

void SimConfig::validate() const {
  if (n_steps < 1) throw ConfigError("sim: n_steps must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("sim: dt must be positive");
  if (!(h_min < h_max)) throw ConfigError("sim: h_min must be < h_max");
  if (h0_lo > h0_hi) throw ConfigError("sim: empty h0 range");
  if (h0_lo < h_min || h0_hi > h_max) {
    throw ConfigError("sim: h0 range must lie within [h_min, h_max]");
  }
  if (t0_lo > t0_hi || t0_lo < 0.0 || t0_hi >= terminal_time()) {
    throw ConfigError("sim: t0 range must lie within [0, terminal_time)");
  }
  if (!(sigma >= 0.0)) throw ConfigError("sim: sigma must be non-negative");
}

Quote quote_from_action(double p_tilde, double psi) {
  if (!(psi > 0.0) || !std::isfinite(psi) || !std::isfinite(p_tilde)) {
    throw InvalidActionError("quote: spread must be positive and finite");
  }
  Quote q;
  const double raw_bid = 0.5 * psi - p_tilde;
  const double raw_ask = 0.5 * psi + p_tilde;
  q.bid_clamped = raw_bid < 0.0;
  q.ask_clamped = raw_ask < 0.0;
  q.delta_bid = q.bid_clamped ? 0.0 : raw_bid;
  q.delta_ask = q.ask_clamped ? 0.0 : raw_ask;
  return q;
}

double step_price(double z, const MarketParams& params, double dt, double noise) {
  return z + params.b * dt + params.sigma * std::sqrt(dt) * noise;
}

double fill_probability(double delta, double a, double k, double dt) {
  if (delta < 0.0 || !std::isfinite(delta)) {
    throw InvalidActionError("fill: offset must be non-negative");
  }
  const double lambda = a * std::exp(-k * delta);
  return -std::expm1(-lambda * dt);
}

FillResult sample_fills(const Quote& quote, const MarketParams& params,
                        const MarketState& state, const SimConfig& config,
                        Rng& rng) {
  const double p_bid =
      fill_probability(quote.delta_bid, params.a_bid, params.k_bid, config.dt);
  const double p_ask =
      fill_probability(quote.delta_ask, params.a_ask, params.k_ask, config.dt);
  // Both uniforms are always drawn, keeping the stream aligned regardless of
  // inventory state.
  const double u_bid = rng.uniform(0.0, 1.0);
  const double u_ask = rng.uniform(0.0, 1.0);
  FillResult f;
  f.bid_filled = u_bid < p_bid && state.h < config.h_max;
  f.ask_filled = u_ask < p_ask && state.h > config.h_min;
  return f;
}

MarketState apply_step(const MarketState& state, const Quote& quote,
                       const FillResult& fills, double new_z,
                       const SimConfig& config) {
  MarketState next = state;
  next.h = state.h + (fills.bid_filled ? 1 : 0) - (fills.ask_filled ? 1 : 0);
  if (next.h < config.h_min || next.h > config.h_max) {
    throw std::logic_error("apply_step: inventory bound violated");
  }
  // Cash update in the offset form: execution prices are relative to the
  // pre-step midprice.
  next.x = state.x + quote.delta_ask * (fills.ask_filled ? 1.0 : 0.0) +
           quote.delta_bid * (fills.bid_filled ? 1.0 : 0.0) -
           state.z * static_cast<double>(next.h - state.h);
  next.z = new_z;
  next.n = state.n + 1;
  next.t = state.t + config.dt;
  return next;
}

EpisodeStats run_episode(const SimConfig& config, const RewardParams& rp,
                         const MmActionSource& mm, const ParamSource& adversary,
                         Rng& rng, const StepObserver* observer) {
  config.validate();

  // Start time is drawn from the dt grid so the loop lands exactly on T.
  const long grid_lo = static_cast<long>(std::ceil(config.t0_lo / config.dt - 1e-9));
  const long grid_hi = static_cast<long>(std::floor(config.t0_hi / config.dt + 1e-9));
  const long start_index = rng.uniform_int(grid_lo, grid_hi);
  const long h0 = rng.uniform_int(config.h0_lo, config.h0_hi);

  MarketState state;
  state.n = 0;
  state.t = static_cast<double>(start_index) * config.dt;
  state.z = config.z0;
  state.h = h0;
  state.x = 0.0;

  MarketParams params = adversary.on_episode_start(rng);

  EpisodeStats stats;
  stats.pi_0 = mark_to_market(state.x, state.h, state.z);

  const int total_steps = config.n_steps - static_cast<int>(start_index);
  double spread_sum = 0.0;

  for (int step = 0; step < total_steps; ++step) {
    if (adversary.on_step) {
      params = adversary.on_step(state, params, rng);
    }

    const MmAction action = mm(state, rng);
    if (!std::isfinite(action.p_tilde) || !std::isfinite(action.psi_raw)) {
      throw InvalidActionError("episode aborted: policy emitted non-finite action");
    }
    const Quote quote = quote_from_action(action.p_tilde, action.executed_psi());

    const double noise = rng.normal();
    const FillResult fills = sample_fills(quote, params, state, config, rng);
    const double new_z = step_price(state.z, params, config.dt, noise);
    const MarketState next = apply_step(state, quote, fills, new_z, config);

    const double pi_before = mark_to_market(state.x, state.h, state.z);
    const double pi_after = mark_to_market(next.x, next.h, next.z);
    const bool terminal = step + 1 == total_steps;

    StepRecord rec;
    rec.state = state;
    rec.action = action;
    rec.quote = quote;
    rec.params = params;
    rec.fills = fills;
    rec.z_next = new_z;
    rec.delta_pi = pi_after - pi_before;
    rec.terminal = terminal;
    rec.reward = reward(rec.delta_pi, next.h, terminal, rp.eta, rp.zeta);

    spread_sum += quote.spread();
    stats.reward_sum += rec.reward;

    if (observer) (*observer)(rec);

    state = next;
  }

  stats.pi_n = mark_to_market(state.x, state.h, state.z);
  stats.terminal_inventory = state.h;
  stats.steps = total_steps;
  stats.mean_spread = total_steps > 0 ? spread_sum / total_steps : 0.0;
  return stats;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<size_t>(n));
}

}  // namespace

std::string trajectory_csv(const std::vector<StepRecord>& steps) {
  std::string out =
      "n,t,z,h,x,delta_bid,delta_ask,b,A_bid,A_ask,k_bid,k_ask,"
      "bid_filled,ask_filled,reward\n";
  for (const StepRecord& r : steps) {
    out += std::to_string(r.state.n);
    out += ',';
    append_double(out, r.state.t);
    out += ',';
    append_double(out, r.state.z);
    out += ',';
    out += std::to_string(r.state.h);
    out += ',';
    append_double(out, r.state.x);
    out += ',';
    append_double(out, r.quote.delta_bid);
    out += ',';
    append_double(out, r.quote.delta_ask);
    out += ',';
    append_double(out, r.params.b);
    out += ',';
    append_double(out, r.params.a_bid);
    out += ',';
    append_double(out, r.params.a_ask);
    out += ',';
    append_double(out, r.params.k_bid);
    out += ',';
    append_double(out, r.params.k_ask);
    out += ',';
    out += r.fills.bid_filled ? '1' : '0';
    out += ',';
    out += r.fills.ask_filled ? '1' : '0';
    out += ',';
    append_double(out, r.reward);
    out += '\n';
  }
  return out;
}

}  // namespace mmrl
