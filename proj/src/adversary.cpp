#include "mmrl/adversary.hpp"

#include <stdexcept>

#include "mmrl/errors.hpp"

namespace mmrl {

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kFixed: return "fixed";
    case AdversaryKind::kRandom: return "random";
    case AdversaryKind::kStrategic: return "strategic";
  }
  return "?";
}

std::string to_string(ControlledParam p) {
  switch (p) {
    case ControlledParam::kDrift: return "b";
    case ControlledParam::kIntensity: return "A";
    case ControlledParam::kDecay: return "k";
  }
  return "?";
}

AdversaryKind adversary_kind_from_string(const std::string& s) {
  if (s == "fixed") return AdversaryKind::kFixed;
  if (s == "random") return AdversaryKind::kRandom;
  if (s == "strategic") return AdversaryKind::kStrategic;
  throw ConfigError("unknown adversary kind: " + s);
}

ControlledParam controlled_param_from_string(const std::string& s) {
  if (s == "b") return ControlledParam::kDrift;
  if (s == "A" || s == "a") return ControlledParam::kIntensity;
  if (s == "k") return ControlledParam::kDecay;
  throw ConfigError("unknown controlled parameter: " + s);
}

void AdversaryRegime::validate() const {
  base_params.validate();
  if (kind != AdversaryKind::kFixed) bounds.validate();
  if (kind == AdversaryKind::kStrategic) {
    if (controlled.empty()) {
      throw ConfigError("strategic adversary: controlled set must be non-empty");
    }
    for (size_t i = 0; i < controlled.size(); ++i) {
      for (size_t j = i + 1; j < controlled.size(); ++j) {
        if (controlled[i] == controlled[j]) {
          throw ConfigError("strategic adversary: duplicate controlled parameter");
        }
      }
    }
  } else if (!controlled.empty()) {
    throw ConfigError("controlled parameters are only valid for the strategic kind");
  }
}

std::pair<double, double> AdversaryRegime::interval(ControlledParam p) const {
  switch (p) {
    case ControlledParam::kDrift: return {bounds.b_lo, bounds.b_hi};
    case ControlledParam::kIntensity: return {bounds.a_lo, bounds.a_hi};
    case ControlledParam::kDecay: return {bounds.k_lo, bounds.k_hi};
  }
  throw std::logic_error("unreachable");
}

BetaPolicy make_adversary_policy(const AdversaryRegime& regime) {
  regime.validate();
  if (regime.kind != AdversaryKind::kStrategic) {
    throw ConfigError("adversary policy requested for a non-strategic regime");
  }
  BetaPolicy policy;
  for (ControlledParam p : regime.controlled) {
    BetaParamPolicy head;
    std::tie(head.lo, head.hi) = regime.interval(p);
    policy.heads.push_back(std::move(head));
  }
  return policy;
}

MarketParams apply_controlled(const AdversaryRegime& regime,
                              std::span<const double> values) {
  MarketParams params = regime.base_params;
  for (size_t i = 0; i < regime.controlled.size(); ++i) {
    const auto [lo, hi] = regime.interval(regime.controlled[i]);
    const double v = values[i];
    if (v < lo || v > hi) {
      throw std::logic_error("strategic adversary emitted a value outside bounds");
    }
    switch (regime.controlled[i]) {
      case ControlledParam::kDrift:
        params.b = v;
        break;
      case ControlledParam::kIntensity:
        params.a_bid = params.a_ask = v;
        break;
      case ControlledParam::kDecay:
        params.k_bid = params.k_ask = v;
        break;
    }
  }
  return params;
}

ParamSource make_param_source(const AdversaryRegime& regime,
                              const BetaPolicy* policy, double h_scale) {
  regime.validate();
  ParamSource src;
  switch (regime.kind) {
    case AdversaryKind::kFixed: {
      const MarketParams fixed = regime.base_params;
      src.on_episode_start = [fixed](Rng&) { return fixed; };
      src.on_step = nullptr;
      break;
    }
    case AdversaryKind::kRandom: {
      const AdversaryRegime r = regime;
      // One draw per parameter, shared by both sides, held all episode.
      src.on_episode_start = [r](Rng& rng) {
        MarketParams p = r.base_params;
        p.b = rng.uniform(r.bounds.b_lo, r.bounds.b_hi);
        p.a_bid = p.a_ask = rng.uniform(r.bounds.a_lo, r.bounds.a_hi);
        p.k_bid = p.k_ask = rng.uniform(r.bounds.k_lo, r.bounds.k_hi);
        return p;
      };
      src.on_step = nullptr;
      break;
    }
    case AdversaryKind::kStrategic: {
      if (policy == nullptr) {
        throw ConfigError("strategic adversary requires a policy");
      }
      const AdversaryRegime r = regime;
      const BetaPolicy* pol = policy;
      // The first per-step choice happens through on_step at step 0.
      src.on_episode_start = [r](Rng&) { return r.base_params; };
      src.on_step = [r, pol, h_scale](const MarketState& s, const MarketParams&,
                                      Rng& rng) {
        const FeatureVec phi = features(s.t, static_cast<double>(s.h), h_scale);
        double values[3];
        pol->sample(phi, rng, std::span<double>(values, pol->heads.size()));
        return apply_controlled(
            r, std::span<const double>(values, pol->heads.size()));
      };
      break;
    }
  }
  return src;
}

}  // namespace mmrl
