#pragma once

#include <span>
#include <vector>

namespace mmrl {

/// 10x10 grid of Gaussian prototypes over the normalised state box
/// (t, h~) in [0,1] x [-1,1]. Centres are cell-centred; the default
/// per-dimension width equals the grid spacing, so neighbouring bumps
/// overlap at one standard deviation.
struct RbfBasis {
  static constexpr int kGridT = 10;
  static constexpr int kGridH = 10;
  static constexpr int kDim = kGridT * kGridH;

  double width_t = 0.1;
  double width_h = 0.2;

  static double center_t(int i) { return 0.05 + 0.1 * i; }
  static double center_h(int j) { return -0.9 + 0.2 * j; }

  /// Writes the kDim feature values for (t, h_norm); separable, so only
  /// kGridT + kGridH exponentials are evaluated. Layout: out[i*kGridH + j].
  void compute(double t, double h_norm, std::span<double> out) const;
};

/// Compatible action-value critic: Q(s, a) = w_v . rbf(s) + w_a . score(s, a),
/// evaluated with semi-gradient SARSA(lambda) and accumulating traces.
/// The advantage block w_a doubles as the natural policy gradient.
struct CompatibleCritic {
  explicit CompatibleCritic(int policy_dim, double trace_decay)
      : w_v(RbfBasis::kDim, 0.0),
        w_a(static_cast<size_t>(policy_dim), 0.0),
        e_v(RbfBasis::kDim, 0.0),
        e_a(static_cast<size_t>(policy_dim), 0.0),
        lambda(trace_decay) {}

  RbfBasis basis;
  std::vector<double> w_v;
  std::vector<double> w_a;
  std::vector<double> e_v;
  std::vector<double> e_a;
  double lambda;

  int policy_dim() const { return static_cast<int>(w_a.size()); }

  /// Traces reset at the start of every episode.
  void begin_episode();

  double q_value(std::span<const double> rbf, std::span<const double> score) const;

  /// One SARSA(lambda) step: e <- lambda*e + grad Q(s,a); w <- w + lr*delta*e.
  /// grad Q is (rbf(s), score(s,a)) since Q is linear in the weights.
  void td_update(double delta, double lr, std::span<const double> rbf,
                 std::span<const double> score);

  /// Advantage weights and their traces are cleared after each policy step;
  /// the compatible features change with the policy.
  void reset_advantage();

  double max_abs_weight() const;
};

}  // namespace mmrl
