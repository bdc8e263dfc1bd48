#include "mmrl/snapshot.hpp"

#include <fstream>

#include <json.hpp>

#include "mmrl/errors.hpp"

namespace mmrl {

namespace {

using nlohmann::json;

json params_to_json(const MarketParams& p) {
  return json{{"b", p.b},         {"sigma", p.sigma}, {"a_bid", p.a_bid},
              {"a_ask", p.a_ask}, {"k_bid", p.k_bid}, {"k_ask", p.k_ask}};
}

MarketParams params_from_json(const json& j) {
  MarketParams p;
  p.b = j.at("b");
  p.sigma = j.at("sigma");
  p.a_bid = j.at("a_bid");
  p.a_ask = j.at("a_ask");
  p.k_bid = j.at("k_bid");
  p.k_ask = j.at("k_ask");
  return p;
}

json sim_to_json(const SimConfig& s) {
  return json{{"n_steps", s.n_steps}, {"dt", s.dt},
              {"z0", s.z0},           {"h0_lo", s.h0_lo},
              {"h0_hi", s.h0_hi},     {"h_min", s.h_min},
              {"h_max", s.h_max},     {"t0_lo", s.t0_lo},
              {"t0_hi", s.t0_hi},     {"sigma", s.sigma}};
}

SimConfig sim_from_json(const json& j) {
  SimConfig s;
  s.n_steps = j.at("n_steps");
  s.dt = j.at("dt");
  s.z0 = j.at("z0");
  s.h0_lo = j.at("h0_lo");
  s.h0_hi = j.at("h0_hi");
  s.h_min = j.at("h_min");
  s.h_max = j.at("h_max");
  s.t0_lo = j.at("t0_lo");
  s.t0_hi = j.at("t0_hi");
  s.sigma = j.at("sigma");
  return s;
}

json bounds_to_json(const ParamBounds& b) {
  return json{{"b", {b.b_lo, b.b_hi}},
              {"a", {b.a_lo, b.a_hi}},
              {"k", {b.k_lo, b.k_hi}}};
}

ParamBounds bounds_from_json(const json& j) {
  ParamBounds b;
  b.b_lo = j.at("b").at(0);
  b.b_hi = j.at("b").at(1);
  b.a_lo = j.at("a").at(0);
  b.a_hi = j.at("a").at(1);
  b.k_lo = j.at("k").at(0);
  b.k_hi = j.at("k").at(1);
  return b;
}

json regime_to_json(const AdversaryRegime& r) {
  json j{{"kind", to_string(r.kind)},
         {"base_params", params_to_json(r.base_params)},
         {"bounds", bounds_to_json(r.bounds)}};
  json controlled = json::array();
  for (ControlledParam p : r.controlled) controlled.push_back(to_string(p));
  j["controlled"] = controlled;
  return j;
}

AdversaryRegime regime_from_json(const json& j) {
  AdversaryRegime r;
  r.kind = adversary_kind_from_string(j.at("kind"));
  r.base_params = params_from_json(j.at("base_params"));
  r.bounds = bounds_from_json(j.at("bounds"));
  for (const auto& p : j.at("controlled")) {
    r.controlled.push_back(controlled_param_from_string(p));
  }
  return r;
}

json critic_to_json(const CompatibleCritic& c) {
  return json{{"lambda", c.lambda},
              {"width_t", c.basis.width_t},
              {"width_h", c.basis.width_h},
              {"w_v", c.w_v},
              {"w_a", c.w_a}};
}

CompatibleCritic critic_from_json(const json& j) {
  const std::vector<double> w_a = j.at("w_a");
  CompatibleCritic c(static_cast<int>(w_a.size()), j.at("lambda"));
  c.basis.width_t = j.at("width_t");
  c.basis.width_h = j.at("width_h");
  const std::vector<double> w_v = j.at("w_v");
  if (w_v.size() != size_t(RbfBasis::kDim)) {
    throw ConfigError("snapshot: critic state-value weight dimension mismatch");
  }
  c.w_v = w_v;
  c.w_a = w_a;
  return c;
}

json gaussian_to_json(const GaussianPolicy& p) {
  return json{{"kind", "gaussian_mm"},
              {"w_mean_ptilde", p.w_mean_ptilde},
              {"w_mean_psi_raw", p.w_mean_psi_raw},
              {"w_var_ptilde_raw", p.w_var_ptilde_raw},
              {"w_var_psi_raw", p.w_var_psi_raw}};
}

std::vector<double> weight_vec(const json& j, const char* key) {
  const std::vector<double> v = j.at(key);
  if (v.size() != size_t(kFeatureDim)) {
    throw ConfigError(std::string("snapshot: weight dimension mismatch for ") + key);
  }
  return v;
}

GaussianPolicy gaussian_from_json(const json& j) {
  if (j.at("kind") != "gaussian_mm") {
    throw ConfigError("snapshot: expected a gaussian_mm policy");
  }
  GaussianPolicy p;
  p.w_mean_ptilde = weight_vec(j, "w_mean_ptilde");
  p.w_mean_psi_raw = weight_vec(j, "w_mean_psi_raw");
  p.w_var_ptilde_raw = weight_vec(j, "w_var_ptilde_raw");
  p.w_var_psi_raw = weight_vec(j, "w_var_psi_raw");
  return p;
}

json beta_to_json(const BetaPolicy& p, const AdversaryRegime& regime) {
  json heads = json::array();
  for (size_t i = 0; i < p.heads.size(); ++i) {
    const BetaParamPolicy& h = p.heads[i];
    heads.push_back(json{{"param", to_string(regime.controlled[i])},
                         {"lo", h.lo},
                         {"hi", h.hi},
                         {"w_alpha_raw", h.w_alpha_raw},
                         {"w_beta_raw", h.w_beta_raw}});
  }
  return json{{"kind", "beta_adversary"}, {"heads", heads}};
}

BetaPolicy beta_from_json(const json& j) {
  if (j.at("kind") != "beta_adversary") {
    throw ConfigError("snapshot: expected a beta_adversary policy");
  }
  BetaPolicy p;
  for (const auto& hj : j.at("heads")) {
    BetaParamPolicy h;
    h.lo = hj.at("lo");
    h.hi = hj.at("hi");
    h.w_alpha_raw = weight_vec(hj, "w_alpha_raw");
    h.w_beta_raw = weight_vec(hj, "w_beta_raw");
    p.heads.push_back(std::move(h));
  }
  return p;
}

}  // namespace

std::string snapshot_to_json(const Snapshot& s) {
  json j;
  j["format_version"] = s.format_version;
  j["basis"] = json{{"degree", 3}, {"h_scale", s.sim.h_scale()}};
  j["env"] = json{{"sim", sim_to_json(s.sim)},
                  {"reward", json{{"eta", s.reward.eta}, {"zeta", s.reward.zeta}}},
                  {"adversary", regime_to_json(s.regime)}};
  j["trained_episodes"] = s.trained_episodes;
  j["mm"] = json{{"policy", gaussian_to_json(s.bundle.mm_policy)},
                 {"critic", critic_to_json(s.bundle.mm_critic)}};
  if (s.bundle.adv_policy) {
    json adv{{"policy", beta_to_json(*s.bundle.adv_policy, s.regime)}};
    if (s.bundle.adv_critic) adv["critic"] = critic_to_json(*s.bundle.adv_critic);
    j["adversary"] = adv;
  }
  return j.dump(2) + "\n";
}

Snapshot snapshot_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: invalid JSON: ") + e.what());
  }
  try {
    Snapshot s;
    s.format_version = j.at("format_version");
    if (s.format_version != 1) {
      throw ConfigError("snapshot: unsupported format_version");
    }
    s.sim = sim_from_json(j.at("env").at("sim"));
    s.reward.eta = j.at("env").at("reward").at("eta");
    s.reward.zeta = j.at("env").at("reward").at("zeta");
    s.regime = regime_from_json(j.at("env").at("adversary"));
    s.trained_episodes = j.at("trained_episodes");
    s.bundle.mm_policy = gaussian_from_json(j.at("mm").at("policy"));
    s.bundle.mm_critic = critic_from_json(j.at("mm").at("critic"));
    if (j.contains("adversary")) {
      s.bundle.adv_policy = beta_from_json(j.at("adversary").at("policy"));
      if (j.at("adversary").contains("critic")) {
        s.bundle.adv_critic = critic_from_json(j.at("adversary").at("critic"));
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: malformed: ") + e.what());
  }
}

void save_snapshot(const Snapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("snapshot: cannot write " + path);
  out << snapshot_to_json(snapshot);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return snapshot_from_json(text);
}

bool same_environment(const Snapshot& a, const Snapshot& b) {
  auto env_json = [](const Snapshot& s) {
    json j{{"sim", sim_to_json(s.sim)},
           {"reward", json{{"eta", s.reward.eta}, {"zeta", s.reward.zeta}}},
           {"adversary", regime_to_json(s.regime)}};
    return j.dump();
  };
  return env_json(a) == env_json(b);
}

}  // namespace mmrl
