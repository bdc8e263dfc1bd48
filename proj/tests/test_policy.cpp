#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mmrl/errors.hpp"
#include "mmrl/policy.hpp"

using namespace mmrl;

namespace {

constexpr double kLn2 = 0.6931471805599453;

GaussianPolicy random_gaussian(Rng& rng, double scale = 1.5) {
  GaussianPolicy p;
  for (int i = 0; i < kFeatureDim; ++i) {
    p.w_mean_ptilde[i] = rng.uniform(-scale, scale);
    p.w_mean_psi_raw[i] = rng.uniform(-scale, scale);
    p.w_var_ptilde_raw[i] = rng.uniform(-scale, scale);
    p.w_var_psi_raw[i] = rng.uniform(-scale, scale);
  }
  return p;
}

BetaParamPolicy random_beta(Rng& rng, double lo, double hi, double scale = 1.5) {
  BetaParamPolicy p;
  p.lo = lo;
  p.hi = hi;
  for (int i = 0; i < kFeatureDim; ++i) {
    p.w_alpha_raw[i] = rng.uniform(-scale, scale);
    p.w_beta_raw[i] = rng.uniform(-scale, scale);
  }
  return p;
}

FeatureVec random_features(Rng& rng) {
  return features(rng.uniform(0.0, 1.0), rng.uniform(-50.0, 50.0), 50.0);
}

}  // namespace

TEST_CASE("feature basis layout") {
  const FeatureVec origin = features(0.0, 0.0, 50.0);
  CHECK(origin[0] == 1.0);
  for (int i = 1; i < kFeatureDim; ++i) CHECK(origin[i] == 0.0);

  const FeatureVec ones = features(1.0, 50.0, 50.0);
  for (int i = 0; i < kFeatureDim; ++i) CHECK(ones[i] == 1.0);

  const FeatureVec mixed = features(0.5, -25.0, 50.0);
  CHECK(mixed[0] == 1.0);
  CHECK(mixed[1] == 0.5);                      // t
  CHECK(mixed[2] == -0.5);                     // h~
  CHECK(mixed[3] == doctest::Approx(0.25));    // t^2
  CHECK(mixed[4] == doctest::Approx(-0.25));   // t h~
  CHECK(mixed[5] == doctest::Approx(0.25));    // h~^2
  CHECK(mixed[6] == doctest::Approx(0.125));   // t^3
  CHECK(mixed[7] == doctest::Approx(-0.125));  // t^2 h~
  CHECK(mixed[8] == doctest::Approx(0.125));   // t h~^2
  CHECK(mixed[9] == doctest::Approx(-0.125));  // h~^3
}

TEST_CASE("gaussian policy zero-weight moments") {
  GaussianPolicy p;
  const FeatureVec phi = features(0.37, 11.0, 50.0);
  const auto m = p.moments(phi);
  CHECK(m.mean_ptilde == 0.0);
  CHECK(m.mean_psi == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(m.var_ptilde == doctest::Approx(kLn2).epsilon(1e-4));
  CHECK(m.var_psi == doctest::Approx(kLn2).epsilon(1e-4));
}

TEST_CASE("gaussian policy degenerate variance samples at the mean") {
  GaussianPolicy p;
  p.w_mean_ptilde[0] = 0.3;
  p.w_var_ptilde_raw[0] = -40.0;
  p.w_var_psi_raw[0] = -40.0;
  Rng rng(51);
  const FeatureVec phi = features(0.2, -4.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const MmAction a = p.sample(phi, rng);
    CHECK(std::abs(a.p_tilde - 0.3) < 1e-2);
    CHECK(std::abs(a.psi_raw - kLn2) < 1e-2);
  }
}

TEST_CASE("executed spread never falls below the floor") {
  GaussianPolicy p;
  p.w_mean_psi_raw[0] = -5.0;  // mean psi ~ 0.0067, samples often negative
  Rng rng(53);
  const FeatureVec phi = features(0.5, 0.0, 50.0);
  long clamped = 0;
  for (int i = 0; i < 100000; ++i) {
    const MmAction a = p.sample(phi, rng);
    CHECK(a.executed_psi() >= MmAction::kPsiFloor);
    clamped += a.psi_raw < MmAction::kPsiFloor;
  }
  CHECK(clamped > 0);  // the floor actually engages
}

TEST_CASE("gaussian score vanishes on the mean blocks at the mode") {
  Rng rng(59);
  GaussianPolicy p = random_gaussian(rng);
  const FeatureVec phi = random_features(rng);
  const MmAction at_mode = p.mode(phi);
  std::array<double, GaussianPolicy::kParamDim> score{};
  p.score(phi, at_mode, score);
  for (int i = 0; i < 2 * kFeatureDim; ++i) {
    CHECK(score[i] == doctest::Approx(0.0));
  }
  // Variance blocks are negative along the constant feature at the mode.
  CHECK(score[2 * kFeatureDim] < 0.0);
  CHECK(score[3 * kFeatureDim] < 0.0);
}

TEST_CASE("gaussian score matches central finite differences") {
  Rng rng(61);
  const double step = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    GaussianPolicy p = random_gaussian(rng);
    const FeatureVec phi = random_features(rng);
    const MmAction a = p.sample(phi, rng);

    std::array<double, GaussianPolicy::kParamDim> score{};
    p.score(phi, a, score);

    std::vector<double>* blocks[4] = {&p.w_mean_ptilde, &p.w_mean_psi_raw,
                                      &p.w_var_ptilde_raw, &p.w_var_psi_raw};
    // Two random coordinates per trial keep the suite fast while covering
    // every block over the run.
    for (int probe = 0; probe < 2; ++probe) {
      const int block = int(rng.uniform_int(0, 3));
      const int idx = int(rng.uniform_int(0, kFeatureDim - 1));
      double& w = (*blocks[block])[idx];
      const double saved = w;
      w = saved + step;
      const double up = p.log_density(phi, a);
      w = saved - step;
      const double dn = p.log_density(phi, a);
      w = saved;
      const double fd = (up - dn) / (2.0 * step);
      const double got = score[block * kFeatureDim + idx];
      CHECK(std::abs(got - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
  }
}

TEST_CASE("gaussian density integrates to one") {
  Rng rng(67);
  GaussianPolicy p = random_gaussian(rng, 0.8);
  const FeatureVec phi = random_features(rng);
  const auto m = p.moments(phi);

  const double sp = std::sqrt(m.var_ptilde), ss = std::sqrt(m.var_psi);
  const int n = 400;  // Simpson in 2D over +-8 sigma
  const double x0 = m.mean_ptilde - 8.0 * sp, x1 = m.mean_ptilde + 8.0 * sp;
  const double y0 = m.mean_psi - 8.0 * ss, y1 = m.mean_psi + 8.0 * ss;
  const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
  auto wt = [&](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const MmAction a{x0 + hx * i, y0 + hy * j};
      sum += wt(i) * wt(j) * std::exp(p.log_density(phi, a));
    }
  }
  sum *= hx * hy / 9.0;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("beta policy zero-weight shape and sampling moments") {
  BetaParamPolicy p;
  p.lo = -5.0;
  p.hi = 5.0;
  const FeatureVec phi = features(0.4, 20.0, 50.0);
  const auto s = p.shapes(phi);
  CHECK(s.alpha == doctest::Approx(1.0 + kLn2).epsilon(1e-12));
  CHECK(s.beta == doctest::Approx(1.0 + kLn2).epsilon(1e-12));

  // Independent moment oracle: mean at the midpoint, tolerance from the
  // Beta standard deviation sqrt(ab / ((a+b)^2 (a+b+1))).
  const double a = s.alpha, b = s.beta;
  const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  Rng rng(71);
  const long n = 1000000;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) sum += p.sample(phi, rng);
  const double mean = sum / double(n);
  CHECK(std::abs(mean - 0.0) < 3.0 * 10.0 * sd / 1000.0);
}

TEST_CASE("beta samples stay within bounds and shapes stay above one") {
  Rng rng(73);
  for (int trial = 0; trial < 100; ++trial) {
    const bool drift_style = trial % 2 == 0;
    BetaParamPolicy p = random_beta(rng, drift_style ? -5.0 : 1.125,
                                    drift_style ? 5.0 : 1.875, 3.0);
    for (int i = 0; i < 100; ++i) {
      const FeatureVec phi = random_features(rng);
      const auto s = p.shapes(phi);
      CHECK(s.alpha >= 1.0);
      CHECK(s.beta >= 1.0);
      const double v = p.sample(phi, rng);
      CHECK(v >= p.lo);
      CHECK(v <= p.hi);
    }
  }
}

TEST_CASE("beta score is symmetric at the midpoint with equal shapes") {
  BetaParamPolicy p;
  p.lo = -5.0;
  p.hi = 5.0;
  const FeatureVec phi = features(0.0, 0.0, 50.0);  // only the constant is live
  std::array<double, BetaParamPolicy::kParamDim> score{};
  p.score(phi, 0.0, score);
  for (int i = 0; i < kFeatureDim; ++i) {
    CHECK(score[i] == doctest::Approx(score[kFeatureDim + i]).epsilon(1e-12));
  }
}

TEST_CASE("beta score matches central finite differences") {
  Rng rng(79);
  const double step = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool drift_style = trial % 2 == 0;
    BetaParamPolicy p = random_beta(rng, drift_style ? -5.0 : 105.0,
                                    drift_style ? 5.0 : 175.0);
    const FeatureVec phi = random_features(rng);
    const double v = p.sample(phi, rng);

    std::array<double, BetaParamPolicy::kParamDim> score{};
    p.score(phi, v, score);

    std::vector<double>* blocks[2] = {&p.w_alpha_raw, &p.w_beta_raw};
    for (int probe = 0; probe < 2; ++probe) {
      const int block = int(rng.uniform_int(0, 1));
      const int idx = int(rng.uniform_int(0, kFeatureDim - 1));
      double& w = (*blocks[block])[idx];
      const double saved = w;
      w = saved + step;
      const double up = p.log_density(phi, v);
      w = saved - step;
      const double dn = p.log_density(phi, v);
      w = saved;
      const double fd = (up - dn) / (2.0 * step);
      const double got = score[block * kFeatureDim + idx];
      CHECK(std::abs(got - fd) / std::max(1.0, std::abs(fd)) < 1e-5);
    }
  }
}

TEST_CASE("beta boundary actions have no score") {
  BetaParamPolicy p;
  p.lo = -5.0;
  p.hi = 5.0;
  const FeatureVec phi = features(0.3, 0.0, 50.0);
  std::array<double, BetaParamPolicy::kParamDim> score{};
  CHECK_THROWS_AS(p.score(phi, -5.0, score), UndefinedScoreError);
  CHECK_THROWS_AS(p.score(phi, 5.0, score), UndefinedScoreError);
  CHECK_THROWS_AS(p.log_density(phi, 5.0), UndefinedScoreError);
}

TEST_CASE("beta density integrates to one") {
  Rng rng(83);
  BetaParamPolicy p = random_beta(rng, 1.125, 1.875);
  const FeatureVec phi = random_features(rng);

  const int n = 20000;  // Simpson; endpoints vanish since alpha, beta > 1
  const double h = (p.hi - p.lo) / n;
  double sum = 0.0;
  for (int i = 1; i < n; ++i) {
    const double w = i % 2 ? 4.0 : 2.0;
    sum += w * std::exp(p.log_density(phi, p.lo + h * i));
  }
  sum *= h / 3.0;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("beta mode formula") {
  BetaParamPolicy p;
  p.lo = 0.0;
  p.hi = 10.0;
  p.w_alpha_raw[0] = 2.0;  // alpha = 1 + softplus(2)
  const FeatureVec phi = features(0.0, 0.0, 50.0);
  const auto s = p.shapes(phi);
  const auto m = p.mode(phi);
  CHECK(!m.undefined);
  CHECK(m.value ==
        doctest::Approx(10.0 * (s.alpha - 1.0) / (s.alpha + s.beta - 2.0)));
}

TEST_CASE("multi-head beta policy stacks scores in head order") {
  Rng rng(89);
  BetaPolicy policy;
  policy.heads.push_back(random_beta(rng, -5.0, 5.0));
  policy.heads.push_back(random_beta(rng, 105.0, 175.0));
  CHECK(policy.param_dim() == 40);

  const FeatureVec phi = random_features(rng);
  std::array<double, 2> values{};
  policy.sample(phi, rng, values);
  CHECK(values[0] >= -5.0);
  CHECK(values[0] <= 5.0);
  CHECK(values[1] >= 105.0);
  CHECK(values[1] <= 175.0);

  std::array<double, 40> stacked{};
  policy.score(phi, values, stacked);
  std::array<double, 20> head0{}, head1{};
  policy.heads[0].score(phi, values[0], head0);
  policy.heads[1].score(phi, values[1], head1);
  for (int i = 0; i < 20; ++i) {
    CHECK(stacked[i] == head0[i]);
    CHECK(stacked[20 + i] == head1[i]);
  }

  // Log densities add across independent heads.
  CHECK(policy.log_density(phi, values) ==
        doctest::Approx(policy.heads[0].log_density(phi, values[0]) +
                        policy.heads[1].log_density(phi, values[1]))
            .epsilon(1e-12));
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  GaussianPolicy g;
  const FeatureVec phi = features(0.5, 10.0, 50.0);
  Rng r1(101), r2(101);
  const MmAction a1 = g.sample(phi, r1);
  const MmAction a2 = g.sample(phi, r2);
  CHECK(a1.p_tilde == a2.p_tilde);
  CHECK(a1.psi_raw == a2.psi_raw);
}

TEST_CASE("non-finite weights are rejected at sampling") {
  GaussianPolicy g;
  g.w_mean_ptilde[3] = std::numeric_limits<double>::quiet_NaN();
  Rng rng(103);
  const FeatureVec phi = features(0.5, 10.0, 50.0);
  CHECK_THROWS_AS(g.sample(phi, rng), InvalidPolicyError);
}
