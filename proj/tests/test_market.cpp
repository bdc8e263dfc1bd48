#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mmrl/errors.hpp"
#include "mmrl/market.hpp"
#include "mmrl/stats.hpp"

using namespace mmrl;

namespace {

MmActionSource fixed_quote(double p_tilde, double psi) {
  return [p_tilde, psi](const MarketState&, Rng&) {
    return MmAction{p_tilde, psi};
  };
}

ParamSource fixed_params(const MarketParams& p) {
  ParamSource src;
  src.on_episode_start = [p](Rng&) { return p; };
  return src;
}

SimConfig flat_start_config() {
  SimConfig c;
  c.h0_lo = c.h0_hi = 0;
  c.t0_lo = c.t0_hi = 0.0;
  return c;
}

}  // namespace

TEST_CASE("quote_from_action inverts spread and reservation offset") {
  const Quote q1 = quote_from_action(0.1, 1.0);
  CHECK(q1.delta_bid == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(q1.delta_ask == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(!q1.bid_clamped);
  CHECK(!q1.ask_clamped);

  const Quote q2 = quote_from_action(0.0, 1.0);
  CHECK(q2.delta_bid == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q2.delta_ask == doctest::Approx(0.5).epsilon(1e-12));

  // Raw bid offset -0.3 clamps to zero; the ask side is untouched.
  const Quote q3 = quote_from_action(0.8, 1.0);
  CHECK(q3.delta_bid == 0.0);
  CHECK(q3.bid_clamped);
  CHECK(q3.delta_ask == doctest::Approx(1.3).epsilon(1e-12));

  CHECK_THROWS_AS(quote_from_action(0.0, 0.0), InvalidActionError);
  CHECK_THROWS_AS(quote_from_action(0.0, -1.0), InvalidActionError);
}

TEST_CASE("step_price follows the drift-diffusion increment") {
  MarketParams p;
  p.sigma = 2.0;
  p.b = 0.0;
  CHECK(step_price(100.0, p, 0.005, 0.0) == doctest::Approx(100.0).epsilon(1e-15));
  p.b = 2.0;
  CHECK(step_price(100.0, p, 0.005, 0.0) == doctest::Approx(100.01).epsilon(1e-12));
  p.b = 0.0;
  CHECK(step_price(100.0, p, 0.005, 1.0) ==
        doctest::Approx(100.0 + 2.0 * std::sqrt(0.005)).epsilon(1e-12));
}

TEST_CASE("fill_probability matches the closed form") {
  // Independent recomputation via expm1.
  const double lambda1 = 140.0 * std::exp(-1.5 * 0.5);
  CHECK(fill_probability(0.5, 140.0, 1.5, 0.005) ==
        doctest::Approx(-std::expm1(-lambda1 * 0.005)).epsilon(1e-15));
  CHECK(fill_probability(0.5, 140.0, 1.5, 0.005) ==
        doctest::Approx(0.28154).epsilon(5e-5));
  CHECK(fill_probability(0.0, 140.0, 1.5, 0.005) ==
        doctest::Approx(0.50341).epsilon(5e-5));
  CHECK(fill_probability(1e9, 140.0, 1.5, 0.005) == doctest::Approx(0.0));
  CHECK_THROWS_AS(fill_probability(-0.1, 140.0, 1.5, 0.005), InvalidActionError);
}

TEST_CASE("fill_probability monotonicity") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double delta = rng.uniform(0.0, 3.0);
    const double a = rng.uniform(105.0, 175.0);
    const double k = rng.uniform(1.125, 1.875);
    const double dt = rng.uniform(0.001, 0.02);
    const double p = fill_probability(delta, a, k, dt);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(fill_probability(delta + 0.1, a, k, dt) < p);
    CHECK(fill_probability(delta, a + 5.0, k, dt) > p);
    CHECK(fill_probability(delta, a, k, dt * 1.5) > p);
  }
}

TEST_CASE("sample_fills suppresses the bound side and calibrates in the bulk") {
  SimConfig config;
  MarketParams params;
  const Quote quote = quote_from_action(0.0, 1.0);  // delta = 0.5 both sides

  SUBCASE("inventory limits suppress one side") {
    Rng rng(11);
    MarketState hi;
    hi.h = config.h_max;
    MarketState lo;
    lo.h = config.h_min;
    for (int i = 0; i < 5000; ++i) {
      CHECK(!sample_fills(quote, params, hi, config, rng).bid_filled);
      CHECK(!sample_fills(quote, params, lo, config, rng).ask_filled);
    }
  }

  SUBCASE("empirical fill rate matches fill_probability") {
    const double p = fill_probability(0.5, 140.0, 1.5, config.dt);
    Rng rng(13);
    MarketState st;
    st.h = 0;
    const long n = 1000000;
    long bid = 0, ask = 0;
    for (long i = 0; i < n; ++i) {
      const FillResult f = sample_fills(quote, params, st, config, rng);
      bid += f.bid_filled;
      ask += f.ask_filled;
    }
    const double tol = 3.0 * std::sqrt(p * (1.0 - p) / double(n));
    CHECK(std::abs(double(bid) / double(n) - p) < tol);
    CHECK(std::abs(double(ask) / double(n) - p) < tol);
  }
}

TEST_CASE("apply_step accounting") {
  SimConfig config;
  MarketState st;
  st.z = 100.0;
  st.h = 0;
  st.x = 0.0;

  SUBCASE("bid fill buys one unit at the bid") {
    Quote q = quote_from_action(0.1, 1.0);  // delta_bid = 0.4
    FillResult f{true, false};
    const MarketState next = apply_step(st, q, f, 100.0, config);
    CHECK(next.h == 1);
    CHECK(next.x == doctest::Approx(0.4 - 100.0).epsilon(1e-15));
    CHECK(mark_to_market(next.x, next.h, next.z) ==
          doctest::Approx(0.4).epsilon(1e-12));
  }

  SUBCASE("both sides fill: earn the full spread, inventory unchanged") {
    Quote q = quote_from_action(0.0, 1.0);
    FillResult f{true, true};
    const MarketState next = apply_step(st, q, f, 100.0, config);
    CHECK(next.h == 0);
    CHECK(next.x == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("no fills leave cash and inventory unchanged") {
    Quote q = quote_from_action(0.0, 1.0);
    FillResult f{false, false};
    const MarketState next = apply_step(st, q, f, 101.0, config);
    CHECK(next.h == 0);
    CHECK(next.x == 0.0);
    CHECK(next.z == 101.0);
    CHECK(next.t == doctest::Approx(st.t + config.dt));
  }
}

TEST_CASE("mark_to_market") {
  CHECK(mark_to_market(100.0, 5, 100.0) == 600.0);
  CHECK(mark_to_market(0.0, 0, 12345.0) == 0.0);
}

TEST_CASE("reward examples") {
  CHECK(reward(2.0, 3, false, 0.0, 0.01) == doctest::Approx(1.91).epsilon(1e-12));
  CHECK(reward(0.5, 2, true, 1.0, 0.0) == doctest::Approx(-3.5).epsilon(1e-12));
  CHECK(reward(7.25, 9, false, 0.0, 0.0) == 7.25);
  CHECK(reward(7.25, 9, true, 0.0, 0.0) == 7.25);
}

TEST_CASE("run_episode with no fills is flat") {
  SimConfig config = flat_start_config();
  Rng rng(3);
  const EpisodeStats stats = run_episode(
      config, RewardParams{}, fixed_quote(0.0, 2e9), fixed_params(MarketParams{}),
      rng);
  CHECK(stats.terminal_wealth() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(stats.terminal_inventory == 0);
  CHECK(stats.steps == 200);
}

TEST_CASE("episode length honours the dt grid") {
  SimConfig config;
  config.t0_lo = config.t0_hi = 0.0;
  config.h0_lo = config.h0_hi = 0;
  Rng rng(5);
  const EpisodeStats stats = run_episode(config, RewardParams{},
                                         fixed_quote(0.0, 1.0),
                                         fixed_params(MarketParams{}), rng);
  CHECK(stats.steps == 200);

  // Start times land on grid points, so every episode ends exactly at T.
  SimConfig random_start;
  random_start.h0_lo = random_start.h0_hi = 0;
  Rng rng2(6);
  std::set<int> lengths;
  for (int i = 0; i < 200; ++i) {
    const EpisodeStats s = run_episode(random_start, RewardParams{},
                                       fixed_quote(0.0, 1.0),
                                       fixed_params(MarketParams{}), rng2);
    lengths.insert(s.steps);
    CHECK(s.steps >= 10);   // t0 <= 0.95
    CHECK(s.steps <= 200);  // t0 >= 0
  }
  CHECK(lengths.size() > 20);  // start times actually vary
}

TEST_CASE("fixed symmetric quote earns the per-step expectation") {
  // Independent oracle: mean terminal wealth of a delta = 1/k quote under
  // zero drift is N * 2 * (1/k) * p_fill with p_fill = 1 - e^{-A e^{-1} dt}.
  SimConfig config = flat_start_config();
  MarketParams params;  // b = 0, A = 140, k = 1.5
  const double delta = 1.0 / params.k_bid;
  const double p_fill = fill_probability(delta, 140.0, 1.5, config.dt);
  const double expected = config.n_steps * 2.0 * delta * p_fill;

  Rng rng(17);
  const long n = 10000;
  std::vector<double> wealth(n);
  for (long i = 0; i < n; ++i) {
    const EpisodeStats s = run_episode(config, RewardParams{},
                                       fixed_quote(0.0, 2.0 * delta),
                                       fixed_params(params), rng);
    wealth[i] = s.terminal_wealth();
  }
  const SampleStats st = summarize(wealth);
  CHECK(std::abs(st.mean - expected) < 3.0 * st.stderr_mean());
}

TEST_CASE("accounting identity and telescoping over random episodes") {
  // Per-step decomposition: dPi == delta_ask*ask + delta_bid*bid + h'*dz,
  // and with eta = zeta = 0 rewards sum to Pi_N - Pi_0.
  Rng rng(23);
  for (int episode = 0; episode < 1000; ++episode) {
    SimConfig config;
    config.h0_lo = -10;
    config.h0_hi = 10;

    MarketParams params;
    params.b = rng.uniform(-5.0, 5.0);
    params.a_bid = rng.uniform(105.0, 175.0);
    params.a_ask = rng.uniform(105.0, 175.0);
    params.k_bid = rng.uniform(1.125, 1.875);
    params.k_ask = rng.uniform(1.125, 1.875);

    MmActionSource noisy_quote = [](const MarketState&, Rng& r) {
      return MmAction{r.uniform(-0.8, 0.8), r.uniform(0.05, 2.5)};
    };

    double max_err = 0.0;
    StepObserver check = [&](const StepRecord& rec) {
      const double dz = rec.z_next - rec.state.z;
      const long h_next = rec.state.h + (rec.fills.bid_filled ? 1 : 0) -
                          (rec.fills.ask_filled ? 1 : 0);
      const double decomposed =
          rec.quote.delta_ask * (rec.fills.ask_filled ? 1.0 : 0.0) +
          rec.quote.delta_bid * (rec.fills.bid_filled ? 1.0 : 0.0) +
          double(h_next) * dz;
      max_err = std::max(max_err, std::abs(rec.delta_pi - decomposed));
      CHECK(rec.state.h >= config.h_min);
      CHECK(rec.state.h <= config.h_max);
      CHECK(rec.quote.delta_bid >= 0.0);
      CHECK(rec.quote.delta_ask >= 0.0);
    };
    const EpisodeStats stats = run_episode(config, RewardParams{}, noisy_quote,
                                           fixed_params(params), rng, &check);
    CHECK(max_err < 1e-9);
    CHECK(stats.reward_sum ==
          doctest::Approx(stats.terminal_wealth()).epsilon(1e-9));
  }
}

TEST_CASE("inventory never exits tight bounds under aggressive quoting") {
  SimConfig config;
  config.h_min = -2;
  config.h_max = 2;
  config.h0_lo = config.h0_hi = 0;
  Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    StepObserver check = [&](const StepRecord& rec) {
      CHECK(rec.state.h >= -2);
      CHECK(rec.state.h <= 2);
    };
    const EpisodeStats s =
        run_episode(config, RewardParams{}, fixed_quote(0.0, MmAction::kPsiFloor),
                    fixed_params(MarketParams{}), rng, &check);
    CHECK(s.terminal_inventory >= -2);
    CHECK(s.terminal_inventory <= 2);
  }
}

TEST_CASE("identical seeds give bit-identical trajectories") {
  SimConfig config;
  auto collect = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StepRecord> steps;
    StepObserver rec = [&](const StepRecord& r) { steps.push_back(r); };
    MmActionSource noisy = [](const MarketState&, Rng& r) {
      return MmAction{r.uniform(-0.3, 0.3), r.uniform(0.5, 2.0)};
    };
    run_episode(config, RewardParams{}, noisy, fixed_params(MarketParams{}), rng,
                &rec);
    return steps;
  };
  const auto a = collect(12345);
  const auto b = collect(12345);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state.z == b[i].state.z);
    CHECK(a[i].state.x == b[i].state.x);
    CHECK(a[i].state.h == b[i].state.h);
    CHECK(a[i].reward == b[i].reward);
  }
  const auto c = collect(54321);
  bool any_different = c.size() != a.size();
  for (size_t i = 0; !any_different && i < a.size(); ++i) {
    any_different = a[i].state.z != c[i].state.z;
  }
  CHECK(any_different);
}

TEST_CASE("policy emitting non-finite actions aborts the episode") {
  SimConfig config;
  Rng rng(31);
  MmActionSource broken = [](const MarketState&, Rng&) {
    return MmAction{std::nan(""), 1.0};
  };
  CHECK_THROWS_AS(run_episode(config, RewardParams{}, broken,
                              fixed_params(MarketParams{}), rng),
                  InvalidActionError);
}

TEST_CASE("trajectory CSV schema and exact round trip") {
  SimConfig config = flat_start_config();
  Rng rng(37);
  std::vector<StepRecord> steps;
  StepObserver rec = [&](const StepRecord& r) { steps.push_back(r); };
  run_episode(config, RewardParams{0.0, 0.01}, fixed_quote(0.1, 1.2),
              fixed_params(MarketParams{}), rng, &rec);

  const std::string csv = trajectory_csv(steps);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "n,t,z,h,x,delta_bid,delta_ask,b,A_bid,A_ask,k_bid,k_ask,bid_filled,"
        "ask_filled,reward");

  size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Column 3 (z) must parse back to the stored double exactly.
    size_t pos = 0;
    for (int c = 0; c < 2; ++c) pos = line.find(',', pos) + 1;
    const double z = std::stod(line.substr(pos));
    CHECK(z == steps[rows].state.z);
    ++rows;
  }
  CHECK(rows == steps.size());
  CHECK(rows == 200);
}
