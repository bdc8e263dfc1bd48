#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mmrl/market.hpp"
#include "mmrl/rng.hpp"

namespace mmrl {

/// Bivariate 3rd-order polynomial state basis over (t, h/h_scale).
/// Component order: 1, t, h, t^2, t*h, h^2, t^3, t^2*h, t*h^2, h^3.
inline constexpr int kFeatureDim = 10;
using FeatureVec = std::array<double, kFeatureDim>;

FeatureVec features(double t, double h, double h_scale);

/// Numerically stable log(1 + e^x).
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Bivariate Normal policy over (p_tilde, psi) with diagonal covariance.
/// Means and variances are linear in the state features; the spread mean
/// and both variances are kept positive through softplus. Weight layout for
/// scores and natural-gradient steps:
///   [w_mean_ptilde | w_mean_psi_raw | w_var_ptilde_raw | w_var_psi_raw].
struct GaussianPolicy {
  std::vector<double> w_mean_ptilde = std::vector<double>(kFeatureDim, 0.0);
  std::vector<double> w_mean_psi_raw = std::vector<double>(kFeatureDim, 0.0);
  std::vector<double> w_var_ptilde_raw = std::vector<double>(kFeatureDim, 0.0);
  std::vector<double> w_var_psi_raw = std::vector<double>(kFeatureDim, 0.0);

  static constexpr int kParamDim = 4 * kFeatureDim;
  // Variance floor keeps scores finite when the raw variance drifts low.
  static constexpr double kVarFloor = 1e-6;

  struct Moments {
    double mean_ptilde, mean_psi, var_ptilde, var_psi;
    double z_mean_psi, z_var_ptilde, z_var_psi;  // pre-softplus activations
  };
  Moments moments(const FeatureVec& phi) const;

  /// Draws (p_tilde, psi_raw); psi_raw may be negative, the environment
  /// floors it (MmAction::executed_psi). Throws InvalidPolicyError on
  /// non-finite weights.
  MmAction sample(const FeatureVec& phi, Rng& rng) const;

  double log_density(const FeatureVec& phi, const MmAction& a) const;

  /// d log pi / d theta at the pre-clamp action, written to out[kParamDim].
  void score(const FeatureVec& phi, const MmAction& a,
             std::span<double> out) const;

  /// Most probable action (the transformed mean).
  MmAction mode(const FeatureVec& phi) const;

  void apply_natural_step(double lr, std::span<const double> w_a);
  double max_abs_weight() const;
};

/// Scaled Beta policy for one adversary-controlled scalar. Shape parameters
/// are softplus(linear) + 1, guaranteeing unimodality; samples cover
/// [lo, hi]. Weight layout: [w_alpha_raw | w_beta_raw].
struct BetaParamPolicy {
  std::vector<double> w_alpha_raw = std::vector<double>(kFeatureDim, 0.0);
  std::vector<double> w_beta_raw = std::vector<double>(kFeatureDim, 0.0);
  double lo = 0.0;
  double hi = 1.0;

  static constexpr int kParamDim = 2 * kFeatureDim;
  // Boundary samples are nudged inward before scoring; the digamma terms
  // diverge at the endpoints.
  static constexpr double kBoundaryNudge = 1e-12;

  struct Shapes {
    double alpha, beta, z_alpha, z_beta;
  };
  Shapes shapes(const FeatureVec& phi) const;

  double sample(const FeatureVec& phi, Rng& rng) const;
  double log_density(const FeatureVec& phi, double value) const;
  /// Throws UndefinedScoreError when value sits on an interval endpoint.
  void score(const FeatureVec& phi, double value, std::span<double> out) const;

  struct Mode {
    double value;
    bool undefined;  // alpha + beta == 2: midpoint reported instead
  };
  Mode mode(const FeatureVec& phi) const;
};

/// A stack of independent scaled-Beta heads, one per controlled parameter.
struct BetaPolicy {
  std::vector<BetaParamPolicy> heads;

  int param_dim() const {
    return static_cast<int>(heads.size()) * BetaParamPolicy::kParamDim;
  }
  /// Samples every head in order; out.size() == heads.size().
  void sample(const FeatureVec& phi, Rng& rng, std::span<double> out) const;
  double log_density(const FeatureVec& phi, std::span<const double> values) const;
  void score(const FeatureVec& phi, std::span<const double> values,
             std::span<double> out) const;
  void apply_natural_step(double lr, std::span<const double> w_a);
  double max_abs_weight() const;
};

}  // namespace mmrl
