#pragma once

#include <string>

#include "mmrl/adversary.hpp"
#include "mmrl/learner.hpp"
#include "mmrl/market.hpp"

namespace mmrl {

/// Everything needed to reproduce or continue a run: the environment
/// fingerprint (sim, reward, regime), the learned policies and critics, and
/// the episode count. Format documented field-by-field in the README.
struct Snapshot {
  int format_version = 1;
  SimConfig sim;
  RewardParams reward;
  AdversaryRegime regime;
  long trained_episodes = 0;
  AgentBundle bundle;
};

/// Deterministic JSON encoding (sorted keys, round-trip doubles).
std::string snapshot_to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const std::string& text);

void save_snapshot(const Snapshot& snapshot, const std::string& path);
Snapshot load_snapshot(const std::string& path);

/// True when two snapshots describe the same environment (sim, reward and
/// regime all equal); audits refuse mismatched pairs.
bool same_environment(const Snapshot& a, const Snapshot& b);

}  // namespace mmrl
