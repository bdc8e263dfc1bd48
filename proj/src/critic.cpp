#include "mmrl/critic.hpp"

#include <algorithm>
#include <cmath>

namespace mmrl {

void RbfBasis::compute(double t, double h_norm, std::span<double> out) const {
  double ut[kGridT];
  double uh[kGridH];
  for (int i = 0; i < kGridT; ++i) {
    const double d = (t - center_t(i)) / width_t;
    ut[i] = std::exp(-0.5 * d * d);
  }
  for (int j = 0; j < kGridH; ++j) {
    const double d = (h_norm - center_h(j)) / width_h;
    uh[j] = std::exp(-0.5 * d * d);
  }
  for (int i = 0; i < kGridT; ++i) {
    for (int j = 0; j < kGridH; ++j) {
      out[i * kGridH + j] = ut[i] * uh[j];
    }
  }
}

void CompatibleCritic::begin_episode() {
  std::fill(e_v.begin(), e_v.end(), 0.0);
  std::fill(e_a.begin(), e_a.end(), 0.0);
}

double CompatibleCritic::q_value(std::span<const double> rbf,
                                 std::span<const double> score) const {
  double q = 0.0;
  for (size_t i = 0; i < w_v.size(); ++i) q += w_v[i] * rbf[i];
  for (size_t i = 0; i < w_a.size(); ++i) q += w_a[i] * score[i];
  return q;
}

void CompatibleCritic::td_update(double delta, double lr,
                                 std::span<const double> rbf,
                                 std::span<const double> score) {
  const double step = lr * delta;
  for (size_t i = 0; i < w_v.size(); ++i) {
    e_v[i] = lambda * e_v[i] + rbf[i];
    w_v[i] += step * e_v[i];
  }
  for (size_t i = 0; i < w_a.size(); ++i) {
    e_a[i] = lambda * e_a[i] + score[i];
    w_a[i] += step * e_a[i];
  }
}

void CompatibleCritic::reset_advantage() {
  std::fill(w_a.begin(), w_a.end(), 0.0);
  std::fill(e_a.begin(), e_a.end(), 0.0);
}

double CompatibleCritic::max_abs_weight() const {
  double m = 0.0;
  for (double v : w_v) m = std::max(m, std::abs(v));
  for (double v : w_a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace mmrl
