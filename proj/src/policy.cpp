#include "mmrl/policy.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "mmrl/errors.hpp"

namespace mmrl {

FeatureVec features(double t, double h, double h_scale) {
  const double hn = h / h_scale;
  return {1.0, t, hn, t * t, t * hn, hn * hn,
          t * t * t, t * t * hn, t * hn * hn, hn * hn * hn};
}

namespace {

double dot(const std::vector<double>& w, const FeatureVec& phi) {
  double s = 0.0;
  for (int i = 0; i < kFeatureDim; ++i) s += w[i] * phi[i];
  return s;
}

}  // namespace

GaussianPolicy::Moments GaussianPolicy::moments(const FeatureVec& phi) const {
  Moments m;
  m.mean_ptilde = dot(w_mean_ptilde, phi);
  m.z_mean_psi = dot(w_mean_psi_raw, phi);
  m.z_var_ptilde = dot(w_var_ptilde_raw, phi);
  m.z_var_psi = dot(w_var_psi_raw, phi);
  m.mean_psi = softplus(m.z_mean_psi);
  m.var_ptilde = kVarFloor + softplus(m.z_var_ptilde);
  m.var_psi = kVarFloor + softplus(m.z_var_psi);
  return m;
}

MmAction GaussianPolicy::sample(const FeatureVec& phi, Rng& rng) const {
  const Moments m = moments(phi);
  if (!std::isfinite(m.mean_ptilde) || !std::isfinite(m.mean_psi) ||
      !std::isfinite(m.var_ptilde) || !std::isfinite(m.var_psi)) {
    throw InvalidPolicyError("gaussian policy: non-finite moments");
  }
  MmAction a;
  a.p_tilde = m.mean_ptilde + std::sqrt(m.var_ptilde) * rng.normal();
  a.psi_raw = m.mean_psi + std::sqrt(m.var_psi) * rng.normal();
  return a;
}

double GaussianPolicy::log_density(const FeatureVec& phi, const MmAction& a) const {
  const Moments m = moments(phi);
  const double dp = a.p_tilde - m.mean_ptilde;
  const double ds = a.psi_raw - m.mean_psi;
  constexpr double kLog2Pi = 1.8378770664093454836;
  return -0.5 * (kLog2Pi + std::log(m.var_ptilde) + dp * dp / m.var_ptilde) -
         0.5 * (kLog2Pi + std::log(m.var_psi) + ds * ds / m.var_psi);
}

void GaussianPolicy::score(const FeatureVec& phi, const MmAction& a,
                           std::span<double> out) const {
  const Moments m = moments(phi);
  const double dp = a.p_tilde - m.mean_ptilde;
  const double ds = a.psi_raw - m.mean_psi;

  const double g_mean_p = dp / m.var_ptilde;
  const double g_mean_s = ds / m.var_psi * sigmoid(m.z_mean_psi);
  const double g_var_p =
      0.5 * (dp * dp / (m.var_ptilde * m.var_ptilde) - 1.0 / m.var_ptilde) *
      sigmoid(m.z_var_ptilde);
  const double g_var_s =
      0.5 * (ds * ds / (m.var_psi * m.var_psi) - 1.0 / m.var_psi) *
      sigmoid(m.z_var_psi);

  for (int i = 0; i < kFeatureDim; ++i) {
    out[i] = g_mean_p * phi[i];
    out[kFeatureDim + i] = g_mean_s * phi[i];
    out[2 * kFeatureDim + i] = g_var_p * phi[i];
    out[3 * kFeatureDim + i] = g_var_s * phi[i];
  }
}

MmAction GaussianPolicy::mode(const FeatureVec& phi) const {
  const Moments m = moments(phi);
  return {m.mean_ptilde, m.mean_psi};
}

void GaussianPolicy::apply_natural_step(double lr, std::span<const double> w_a) {
  for (int i = 0; i < kFeatureDim; ++i) {
    w_mean_ptilde[i] += lr * w_a[i];
    w_mean_psi_raw[i] += lr * w_a[kFeatureDim + i];
    w_var_ptilde_raw[i] += lr * w_a[2 * kFeatureDim + i];
    w_var_psi_raw[i] += lr * w_a[3 * kFeatureDim + i];
  }
}

double GaussianPolicy::max_abs_weight() const {
  double m = 0.0;
  for (const auto* w : {&w_mean_ptilde, &w_mean_psi_raw, &w_var_ptilde_raw,
                        &w_var_psi_raw}) {
    for (double v : *w) m = std::max(m, std::abs(v));
  }
  return m;
}

BetaParamPolicy::Shapes BetaParamPolicy::shapes(const FeatureVec& phi) const {
  Shapes s;
  s.z_alpha = dot(w_alpha_raw, phi);
  s.z_beta = dot(w_beta_raw, phi);
  s.alpha = 1.0 + softplus(s.z_alpha);
  s.beta = 1.0 + softplus(s.z_beta);
  return s;
}

double BetaParamPolicy::sample(const FeatureVec& phi, Rng& rng) const {
  const Shapes s = shapes(phi);
  if (!std::isfinite(s.alpha) || !std::isfinite(s.beta)) {
    throw InvalidPolicyError("beta policy: non-finite shape parameters");
  }
  double x = rng.beta(s.alpha, s.beta);
  // Keep samples scorable: the log-density gradient diverges at 0 and 1.
  x = std::min(std::max(x, kBoundaryNudge), 1.0 - kBoundaryNudge);
  return lo + (hi - lo) * x;
}

double BetaParamPolicy::log_density(const FeatureVec& phi, double value) const {
  const double width = hi - lo;
  const double x = (value - lo) / width;
  if (!(x > 0.0) || !(x < 1.0)) {
    throw UndefinedScoreError("beta policy: action on interval endpoint");
  }
  const Shapes s = shapes(phi);
  const double log_beta_fn =
      std::lgamma(s.alpha) + std::lgamma(s.beta) - std::lgamma(s.alpha + s.beta);
  return (s.alpha - 1.0) * std::log(x) + (s.beta - 1.0) * std::log1p(-x) -
         log_beta_fn - std::log(width);
}

void BetaParamPolicy::score(const FeatureVec& phi, double value,
                            std::span<double> out) const {
  const double width = hi - lo;
  const double x = (value - lo) / width;
  if (!(x > 0.0) || !(x < 1.0)) {
    throw UndefinedScoreError("beta policy: action on interval endpoint");
  }
  const Shapes s = shapes(phi);
  const double psi_ab = boost::math::digamma(s.alpha + s.beta);
  const double d_alpha = std::log(x) - boost::math::digamma(s.alpha) + psi_ab;
  const double d_beta = std::log1p(-x) - boost::math::digamma(s.beta) + psi_ab;
  const double g_alpha = d_alpha * sigmoid(s.z_alpha);
  const double g_beta = d_beta * sigmoid(s.z_beta);
  for (int i = 0; i < kFeatureDim; ++i) {
    out[i] = g_alpha * phi[i];
    out[kFeatureDim + i] = g_beta * phi[i];
  }
}

BetaParamPolicy::Mode BetaParamPolicy::mode(const FeatureVec& phi) const {
  const Shapes s = shapes(phi);
  const double denom = s.alpha + s.beta - 2.0;
  if (denom <= 0.0) {
    return {0.5 * (lo + hi), true};
  }
  const double x = (s.alpha - 1.0) / denom;
  return {lo + (hi - lo) * x, false};
}

void BetaPolicy::sample(const FeatureVec& phi, Rng& rng,
                        std::span<double> out) const {
  for (size_t i = 0; i < heads.size(); ++i) out[i] = heads[i].sample(phi, rng);
}

double BetaPolicy::log_density(const FeatureVec& phi,
                               std::span<const double> values) const {
  double s = 0.0;
  for (size_t i = 0; i < heads.size(); ++i) {
    s += heads[i].log_density(phi, values[i]);
  }
  return s;
}

void BetaPolicy::score(const FeatureVec& phi, std::span<const double> values,
                       std::span<double> out) const {
  for (size_t i = 0; i < heads.size(); ++i) {
    heads[i].score(phi, values[i],
                   out.subspan(i * BetaParamPolicy::kParamDim,
                               BetaParamPolicy::kParamDim));
  }
}

void BetaPolicy::apply_natural_step(double lr, std::span<const double> w_a) {
  for (size_t i = 0; i < heads.size(); ++i) {
    auto block = w_a.subspan(i * BetaParamPolicy::kParamDim,
                             BetaParamPolicy::kParamDim);
    for (int j = 0; j < kFeatureDim; ++j) {
      heads[i].w_alpha_raw[j] += lr * block[j];
      heads[i].w_beta_raw[j] += lr * block[kFeatureDim + j];
    }
  }
}

double BetaPolicy::max_abs_weight() const {
  double m = 0.0;
  for (const auto& h : heads) {
    for (double v : h.w_alpha_raw) m = std::max(m, std::abs(v));
    for (double v : h.w_beta_raw) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace mmrl
