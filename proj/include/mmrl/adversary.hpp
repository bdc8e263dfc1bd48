#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmrl/market.hpp"
#include "mmrl/policy.hpp"
#include "mmrl/rng.hpp"
#include "mmrl/stage_game.hpp"

namespace mmrl {

enum class AdversaryKind { kFixed, kRandom, kStrategic };

enum class ControlledParam { kDrift, kIntensity, kDecay };

std::string to_string(AdversaryKind kind);
std::string to_string(ControlledParam p);
AdversaryKind adversary_kind_from_string(const std::string& s);
ControlledParam controlled_param_from_string(const std::string& s);

/// Which adversary supplies the model parameters and how.
///   Fixed: base_params every step.
///   Random: one uniform draw per parameter (shared across bid/ask sides) at
///           episode start, held for the whole episode.
///   Strategic: a Beta policy re-chooses the controlled parameters every
///              step from features of (t, H); uncontrolled parameters stay
///              at base_params.
struct AdversaryRegime {
  AdversaryKind kind = AdversaryKind::kFixed;
  MarketParams base_params;        // Fixed values; also the uncontrolled defaults
  ParamBounds bounds;              // Random / Strategic intervals
  std::vector<ControlledParam> controlled;  // Strategic, non-empty

  void validate() const;
  /// Interval for one controlled parameter.
  std::pair<double, double> interval(ControlledParam p) const;
};

/// Zero-initialised Beta policy matching a Strategic regime's controlled set.
BetaPolicy make_adversary_policy(const AdversaryRegime& regime);

/// Applies sampled controlled values onto the uncontrolled defaults. The
/// value order matches regime.controlled; intensity and decay are shared
/// across sides. Throws std::logic_error if a value leaves its interval.
MarketParams apply_controlled(const AdversaryRegime& regime,
                              std::span<const double> values);

/// Parameter supplier for run_episode. Fixed needs no policy; Random draws
/// at episode start; Strategic samples `policy` every step (h_scale
/// normalises inventory features). The policy pointer must outlive the
/// source.
ParamSource make_param_source(const AdversaryRegime& regime,
                              const BetaPolicy* policy, double h_scale);

}  // namespace mmrl
