#include "mmrl/run_config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mmrl/errors.hpp"

namespace mmrl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("config: unknown key '" + where + it.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
  }
}

void parse_sim(const json& j, SimConfig& sim) {
  reject_unknown_keys(j, "sim.",
                      {"n_steps", "dt", "z0", "h0_range", "h_min", "h_max",
                       "t0_range", "sigma"});
  read(j, "n_steps", sim.n_steps);
  read(j, "dt", sim.dt);
  read(j, "z0", sim.z0);
  read(j, "h_min", sim.h_min);
  read(j, "h_max", sim.h_max);
  read(j, "sigma", sim.sigma);
  if (j.contains("h0_range")) {
    const std::vector<long> r = j.at("h0_range").get<std::vector<long>>();
    if (r.size() != 2) throw ConfigError("config: sim.h0_range must be [lo, hi]");
    sim.h0_lo = r[0];
    sim.h0_hi = r[1];
  }
  if (j.contains("t0_range")) {
    const std::vector<double> r = j.at("t0_range").get<std::vector<double>>();
    if (r.size() != 2) throw ConfigError("config: sim.t0_range must be [lo, hi]");
    sim.t0_lo = r[0];
    sim.t0_hi = r[1];
  }
}

void parse_bounds(const json& j, ParamBounds& b) {
  reject_unknown_keys(j, "adversary.bounds.", {"b", "a", "k"});
  auto pair = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const std::vector<double> r = j.at(key).get<std::vector<double>>();
    if (r.size() != 2) {
      throw ConfigError(std::string("config: adversary.bounds.") + key +
                        " must be [lo, hi]");
    }
    lo = r[0];
    hi = r[1];
  };
  pair("b", b.b_lo, b.b_hi);
  pair("a", b.a_lo, b.a_hi);
  pair("k", b.k_lo, b.k_hi);
}

void parse_adversary(const json& j, AdversaryRegime& r) {
  reject_unknown_keys(j, "adversary.",
                      {"kind", "controlled", "bounds", "fixed_params"});
  if (j.contains("kind")) {
    r.kind = adversary_kind_from_string(j.at("kind").get<std::string>());
  }
  if (j.contains("controlled")) {
    r.controlled.clear();
    for (const auto& p : j.at("controlled")) {
      r.controlled.push_back(controlled_param_from_string(p.get<std::string>()));
    }
  }
  if (j.contains("bounds")) parse_bounds(j.at("bounds"), r.bounds);
  if (j.contains("fixed_params")) {
    const json& fp = j.at("fixed_params");
    reject_unknown_keys(fp, "adversary.fixed_params.", {"b", "A", "k"});
    double b = r.base_params.b;
    double a = r.base_params.a_bid;
    double k = r.base_params.k_bid;
    read(fp, "b", b);
    read(fp, "A", a);
    read(fp, "k", k);
    r.base_params.b = b;
    r.base_params.a_bid = r.base_params.a_ask = a;
    r.base_params.k_bid = r.base_params.k_ask = k;
  }
}

void parse_train(const json& j, TrainConfig& t) {
  reject_unknown_keys(j, "train.",
                      {"pretrain_episodes", "episodes", "lr_pretrain",
                       "lr_critic", "lr_policy", "policy_update_period",
                       "trace_decay", "checkpoint_every", "weight_ceiling"});
  read(j, "pretrain_episodes", t.pretrain_episodes);
  read(j, "episodes", t.train_episodes);
  read(j, "lr_pretrain", t.lr_pretrain);
  read(j, "lr_critic", t.lr_critic);
  read(j, "lr_policy", t.lr_policy);
  read(j, "policy_update_period", t.policy_update_period);
  read(j, "trace_decay", t.trace_decay);
  read(j, "checkpoint_every", t.checkpoint_every);
  read(j, "weight_ceiling", t.weight_ceiling);
}

void parse_eval(const json& j, EvalConfig& e) {
  reject_unknown_keys(j, "eval.", {"episodes", "regimes"});
  read(j, "episodes", e.episodes);
  if (j.contains("regimes")) {
    e.regimes = j.at("regimes").get<std::vector<std::string>>();
  }
}

}  // namespace

AdversaryRegime RunConfig::default_adversary() {
  AdversaryRegime r;
  r.kind = AdversaryKind::kFixed;
  r.base_params = MarketParams{};  // b = 0, A = 140, k = 1.5
  r.bounds = ParamBounds{};        // b [-5,5], A [105,175], k [1.125,1.875]
  return r;
}

void RunConfig::validate() const {
  if (experiment.empty()) throw ConfigError("config: experiment name is required");
  sim.validate();
  adversary.validate();
  train.validate();
  if (eval.episodes < 1) throw ConfigError("config: eval.episodes must be >= 1");
  for (const std::string& r : eval.regimes) {
    if (r != "fixed" && r != "random" && r != "strategic") {
      throw ConfigError("config: unknown eval regime '" + r + "'");
    }
  }
  if (!(reward.eta >= 0.0) || !(reward.zeta >= 0.0)) {
    throw ConfigError("config: risk parameters must be non-negative");
  }
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown_keys(j, "",
                      {"version", "experiment", "seed", "output_dir", "sim",
                       "reward", "adversary", "train", "eval"});
  RunConfig c;
  read(j, "version", c.version);
  if (c.version != 1) throw ConfigError("config: unsupported version");
  read(j, "experiment", c.experiment);
  if (!j.contains("seed")) {
    throw ConfigError("config: seed is mandatory (no wall-clock default)");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  read(j, "output_dir", c.output_dir);
  if (j.contains("sim")) parse_sim(j.at("sim"), c.sim);
  if (j.contains("reward")) {
    reject_unknown_keys(j.at("reward"), "reward.", {"eta", "zeta"});
    read(j.at("reward"), "eta", c.reward.eta);
    read(j.at("reward"), "zeta", c.reward.zeta);
  }
  if (j.contains("adversary")) parse_adversary(j.at("adversary"), c.adversary);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("eval")) parse_eval(j.at("eval"), c.eval);

  // The market's volatility is configured once, in sim.
  c.adversary.base_params.sigma = c.sim.sigma;
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json adversary{{"kind", to_string(c.adversary.kind)},
                 {"bounds",
                  json{{"b", {c.adversary.bounds.b_lo, c.adversary.bounds.b_hi}},
                       {"a", {c.adversary.bounds.a_lo, c.adversary.bounds.a_hi}},
                       {"k", {c.adversary.bounds.k_lo, c.adversary.bounds.k_hi}}}},
                 {"fixed_params",
                  json{{"b", c.adversary.base_params.b},
                       {"A", c.adversary.base_params.a_bid},
                       {"k", c.adversary.base_params.k_bid}}}};
  json controlled = json::array();
  for (ControlledParam p : c.adversary.controlled) {
    controlled.push_back(to_string(p));
  }
  adversary["controlled"] = controlled;

  json j{
      {"version", c.version},
      {"experiment", c.experiment},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"sim",
       json{{"n_steps", c.sim.n_steps},
            {"dt", c.sim.dt},
            {"z0", c.sim.z0},
            {"h0_range", {c.sim.h0_lo, c.sim.h0_hi}},
            {"h_min", c.sim.h_min},
            {"h_max", c.sim.h_max},
            {"t0_range", {c.sim.t0_lo, c.sim.t0_hi}},
            {"sigma", c.sim.sigma}}},
      {"reward", json{{"eta", c.reward.eta}, {"zeta", c.reward.zeta}}},
      {"adversary", adversary},
      {"train",
       json{{"pretrain_episodes", c.train.pretrain_episodes},
            {"episodes", c.train.train_episodes},
            {"lr_pretrain", c.train.lr_pretrain},
            {"lr_critic", c.train.lr_critic},
            {"lr_policy", c.train.lr_policy},
            {"policy_update_period", c.train.policy_update_period},
            {"trace_decay", c.train.trace_decay},
            {"checkpoint_every", c.train.checkpoint_every},
            {"weight_ceiling", c.train.weight_ceiling}}},
      {"eval", json{{"episodes", c.eval.episodes}, {"regimes", c.eval.regimes}}}};
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return run_config_from_json(text);
}

void save_run_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << run_config_to_json(config);
}

}  // namespace mmrl
