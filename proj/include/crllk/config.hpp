/******************************************************************************
 * Copyright 2026 The crllk Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

/**
 * @file
 * Run configuration: JSON (de)serialization with field-level validation and
 * dotted-key overrides (`--set ppo.clip_eps=0.1`).
 */

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crllk/errors.hpp"
#include "crllk/trainer.hpp"
#include "crllk/vehicle.hpp"

namespace crllk {

struct RunConfig {
  TrainMode mode = TrainMode::kCrllkDiscrete;
  std::string track = "small_loop";
  int iterations = 100;
  int checkpoint_interval = 10;
  double gamma = 0.95;
  double gae_lambda = 0.95;
  LambdaSign lambda_sign = LambdaSign::kDualAscent;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  std::vector<int> hidden = {64, 64};

  int workers = 4;
  int episodes_per_worker = 2;
  std::uint64_t base_seed = 1;

  int eval_episodes = 100;
  int eval_seeds = 2;
  std::uint64_t eval_base_seed = 1000;
  bool stochastic_eval = false;
  int histogram_bins = 20;

  std::string output_dir = "runs";
  std::string run_name = "run";
  bool stats_wall_time = false;

  EnvConfig env;
  LagrangeState lagrange;
  CostGains gains;
  PpoSettings ppo;
  /// Unset means 0.01 for discrete modes, 0 for continuous.
  std::optional<double> entropy_coef;
  int critic_epochs = 4;
  int critic_minibatch = 256;

  double resolved_entropy_coef() const {
    return entropy_coef.value_or(is_discrete(mode) ? 0.01 : 0.0);
  }

  TrainSettings train_settings() const {
    TrainSettings t;
    t.mode = mode;
    t.gains = gains;
    t.lambda_sign = lambda_sign;
    t.gamma = gamma;
    t.gae_lambda = gae_lambda;
    t.ppo = ppo;
    t.ppo.entropy_coef = resolved_entropy_coef();
    t.critic_epochs = critic_epochs;
    t.critic_minibatch = critic_minibatch;
    t.workers = {workers, episodes_per_worker, base_seed};
    return t;
  }

  void validate() const;
};

namespace detail {

template <typename T>
T config_get(const nlohmann::json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "wrong type (got " + std::string(j.type_name()) + ")");
  }
}

inline double config_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

inline int config_int(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer, got " + std::string(j.type_name()));
  return j.get<int>();
}

inline std::uint64_t config_u64(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline bool config_bool(const nlohmann::json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError(field, "expected a boolean, got " + std::string(j.type_name()));
  return j.get<bool>();
}

inline std::string config_string(const nlohmann::json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string, got " + std::string(j.type_name()));
  return j.get<std::string>();
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
  }
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["track"] = c.track;
  j["iterations"] = c.iterations;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["H"] = c.env.horizon;
  j["gamma"] = c.gamma;
  j["gae_lambda"] = c.gae_lambda;
  j["lambda_sign"] = to_string(c.lambda_sign);
  j["optimizer"] = to_string(c.optimizer);
  j["hidden"] = c.hidden;
  j["workers"] = c.workers;
  j["episodes_per_worker"] = c.episodes_per_worker;
  j["base_seed"] = c.base_seed;
  j["eval_episodes"] = c.eval_episodes;
  j["eval_seeds"] = c.eval_seeds;
  j["eval_base_seed"] = c.eval_base_seed;
  j["stochastic_eval"] = c.stochastic_eval;
  j["histogram_bins"] = c.histogram_bins;
  j["output_dir"] = c.output_dir;
  j["run_name"] = c.run_name;
  j["stats_wall_time"] = c.stats_wall_time;

  nlohmann::ordered_json env;
  env["dt"] = c.env.dt;
  env["axle_length"] = c.env.axle_length;
  env["bot_radius"] = c.env.bot_radius;
  env["steer_gain"] = c.env.steer_gain;
  env["switch_beta"] = c.env.switch_beta;
  env["wheel_table"] = c.env.wheel_table;
  env["curvature_offsets"] = c.env.curvature_offsets;
  env["sensing_range"] = c.env.sensing_range;
  env["reset_max_deviation"] = c.env.reset_max_deviation;
  env["reset_max_heading"] = c.env.reset_max_heading;
  j["env"] = env;

  const LagrangeState& l = c.lagrange;
  j["lagrange"] = {{"lambda1", l.lambda1}, {"lambda2", l.lambda2}, {"lambda3", l.lambda3},
                   {"alpha1", l.alpha1},   {"alpha2", l.alpha2},   {"alpha3", l.alpha3},
                   {"eta1", l.eta1},       {"eta2", l.eta2},       {"eta3", l.eta3_policy},
                   {"eta4", l.eta4_critic}};
  j["gains"] = {{"reward", c.gains.reward},
                {"lane", c.gains.lane},
                {"collision", c.gains.collision},
                {"lane_switch", c.gains.lane_switch}};
  nlohmann::ordered_json ppo;
  ppo["clip_eps"] = c.ppo.clip_eps;
  ppo["epochs"] = c.ppo.epochs;
  ppo["minibatch"] = c.ppo.minibatch;
  ppo["entropy_coef"] = c.entropy_coef ? nlohmann::ordered_json(*c.entropy_coef) : nlohmann::ordered_json(nullptr);
  ppo["normalize_advantages"] = c.ppo.normalize_advantages;
  ppo["critic_epochs"] = c.critic_epochs;
  ppo["critic_minibatch"] = c.critic_minibatch;
  j["ppo"] = ppo;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  reject_unknown(j,
                 {"mode", "track", "iterations", "checkpoint_interval", "H", "gamma", "gae_lambda", "lambda_sign",
                  "optimizer", "hidden", "workers", "episodes_per_worker", "base_seed", "eval_episodes", "eval_seeds",
                  "eval_base_seed", "stochastic_eval", "histogram_bins", "output_dir", "run_name",
                  "stats_wall_time", "env", "lagrange", "gains", "ppo"},
                 "");
  RunConfig c;
  auto has = [&](const char* k) { return j.contains(k); };
  try {
    if (has("mode")) c.mode = train_mode_from_string(config_string(j["mode"], "mode"));
  } catch (const ArgumentError& e) {
    throw ConfigError("mode", e.what());
  }
  if (has("track")) c.track = config_string(j["track"], "track");
  if (has("iterations")) c.iterations = config_int(j["iterations"], "iterations");
  if (has("checkpoint_interval")) c.checkpoint_interval = config_int(j["checkpoint_interval"], "checkpoint_interval");
  if (has("H")) c.env.horizon = config_int(j["H"], "H");
  if (has("gamma")) c.gamma = config_number(j["gamma"], "gamma");
  if (has("gae_lambda")) c.gae_lambda = config_number(j["gae_lambda"], "gae_lambda");
  try {
    if (has("lambda_sign")) c.lambda_sign = lambda_sign_from_string(config_string(j["lambda_sign"], "lambda_sign"));
  } catch (const ArgumentError& e) {
    throw ConfigError("lambda_sign", e.what());
  }
  try {
    if (has("optimizer")) c.optimizer = optimizer_kind_from_string(config_string(j["optimizer"], "optimizer"));
  } catch (const ArgumentError& e) {
    throw ConfigError("optimizer", e.what());
  }
  if (has("hidden")) c.hidden = config_get<std::vector<int>>(j["hidden"], "hidden");
  if (has("workers")) c.workers = config_int(j["workers"], "workers");
  if (has("episodes_per_worker")) c.episodes_per_worker = config_int(j["episodes_per_worker"], "episodes_per_worker");
  if (has("base_seed")) c.base_seed = config_u64(j["base_seed"], "base_seed");
  if (has("eval_episodes")) c.eval_episodes = config_int(j["eval_episodes"], "eval_episodes");
  if (has("eval_seeds")) c.eval_seeds = config_int(j["eval_seeds"], "eval_seeds");
  if (has("eval_base_seed")) c.eval_base_seed = config_u64(j["eval_base_seed"], "eval_base_seed");
  if (has("stochastic_eval")) c.stochastic_eval = config_bool(j["stochastic_eval"], "stochastic_eval");
  if (has("histogram_bins")) c.histogram_bins = config_int(j["histogram_bins"], "histogram_bins");
  if (has("output_dir")) c.output_dir = config_string(j["output_dir"], "output_dir");
  if (has("run_name")) c.run_name = config_string(j["run_name"], "run_name");
  if (has("stats_wall_time")) c.stats_wall_time = config_bool(j["stats_wall_time"], "stats_wall_time");

  if (has("env")) {
    const auto& e = j["env"];
    if (!e.is_object()) throw ConfigError("env", "expected an object");
    reject_unknown(e,
                   {"dt", "axle_length", "bot_radius", "steer_gain", "switch_beta", "wheel_table", "curvature_offsets",
                    "sensing_range", "reset_max_deviation", "reset_max_heading"},
                   "env.");
    if (e.contains("dt")) c.env.dt = config_number(e["dt"], "env.dt");
    if (e.contains("axle_length")) c.env.axle_length = config_number(e["axle_length"], "env.axle_length");
    if (e.contains("bot_radius")) c.env.bot_radius = config_number(e["bot_radius"], "env.bot_radius");
    if (e.contains("steer_gain")) c.env.steer_gain = config_number(e["steer_gain"], "env.steer_gain");
    if (e.contains("switch_beta")) c.env.switch_beta = config_number(e["switch_beta"], "env.switch_beta");
    if (e.contains("wheel_table")) c.env.wheel_table = config_get<WheelTable>(e["wheel_table"], "env.wheel_table");
    if (e.contains("curvature_offsets"))
      c.env.curvature_offsets = config_get<std::vector<double>>(e["curvature_offsets"], "env.curvature_offsets");
    if (e.contains("sensing_range")) c.env.sensing_range = config_number(e["sensing_range"], "env.sensing_range");
    if (e.contains("reset_max_deviation"))
      c.env.reset_max_deviation = config_number(e["reset_max_deviation"], "env.reset_max_deviation");
    if (e.contains("reset_max_heading"))
      c.env.reset_max_heading = config_number(e["reset_max_heading"], "env.reset_max_heading");
  }
  if (has("lagrange")) {
    const auto& l = j["lagrange"];
    if (!l.is_object()) throw ConfigError("lagrange", "expected an object");
    reject_unknown(l, {"lambda1", "lambda2", "lambda3", "alpha1", "alpha2", "alpha3", "eta1", "eta2", "eta3", "eta4"},
                   "lagrange.");
    auto num = [&](const char* k, double& out) {
      if (l.contains(k)) out = config_number(l[k], std::string("lagrange.") + k);
    };
    num("lambda1", c.lagrange.lambda1);
    num("lambda2", c.lagrange.lambda2);
    num("lambda3", c.lagrange.lambda3);
    num("alpha1", c.lagrange.alpha1);
    num("alpha2", c.lagrange.alpha2);
    num("alpha3", c.lagrange.alpha3);
    num("eta1", c.lagrange.eta1);
    num("eta2", c.lagrange.eta2);
    num("eta3", c.lagrange.eta3_policy);
    num("eta4", c.lagrange.eta4_critic);
  }
  if (has("gains")) {
    const auto& g = j["gains"];
    if (!g.is_object()) throw ConfigError("gains", "expected an object");
    reject_unknown(g, {"reward", "lane", "collision", "lane_switch"}, "gains.");
    if (g.contains("reward")) c.gains.reward = config_number(g["reward"], "gains.reward");
    if (g.contains("lane")) c.gains.lane = config_number(g["lane"], "gains.lane");
    if (g.contains("collision")) c.gains.collision = config_number(g["collision"], "gains.collision");
    if (g.contains("lane_switch")) c.gains.lane_switch = config_number(g["lane_switch"], "gains.lane_switch");
  }
  if (has("ppo")) {
    const auto& p = j["ppo"];
    if (!p.is_object()) throw ConfigError("ppo", "expected an object");
    reject_unknown(p,
                   {"clip_eps", "epochs", "minibatch", "entropy_coef", "normalize_advantages", "critic_epochs",
                    "critic_minibatch"},
                   "ppo.");
    if (p.contains("clip_eps")) c.ppo.clip_eps = config_number(p["clip_eps"], "ppo.clip_eps");
    if (p.contains("epochs")) c.ppo.epochs = config_int(p["epochs"], "ppo.epochs");
    if (p.contains("minibatch")) c.ppo.minibatch = config_int(p["minibatch"], "ppo.minibatch");
    if (p.contains("entropy_coef")) {
      if (p["entropy_coef"].is_null()) {
        c.entropy_coef.reset();
      } else {
        c.entropy_coef = config_number(p["entropy_coef"], "ppo.entropy_coef");
      }
    }
    if (p.contains("normalize_advantages"))
      c.ppo.normalize_advantages = config_bool(p["normalize_advantages"], "ppo.normalize_advantages");
    if (p.contains("critic_epochs")) c.critic_epochs = config_int(p["critic_epochs"], "ppo.critic_epochs");
    if (p.contains("critic_minibatch")) c.critic_minibatch = config_int(p["critic_minibatch"], "ppo.critic_minibatch");
  }
  c.validate();
  return c;
}

inline void RunConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(field, msg);
  };
  require(!track.empty(), "track", "must not be empty");
  require(iterations >= 0, "iterations", "must be >= 0");
  require(checkpoint_interval >= 1, "checkpoint_interval", "must be >= 1");
  require(env.horizon >= 1, "H", "must be >= 1");
  require(gamma >= 0.0 && gamma < 1.0, "gamma", "must lie in [0, 1)");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda", "must lie in [0, 1]");
  require(!hidden.empty(), "hidden", "needs at least one hidden layer");
  for (int h : hidden) require(h > 0, "hidden", "layer sizes must be positive");
  require(workers >= 1 && workers <= 65536, "workers", "must lie in [1, 65536]");
  require(episodes_per_worker >= 1, "episodes_per_worker", "must be >= 1");
  require(eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(eval_seeds >= 1, "eval_seeds", "must be >= 1");
  require(histogram_bins >= 1, "histogram_bins", "must be >= 1");
  require(!run_name.empty(), "run_name", "must not be empty");
  require(env.dt > 0.0, "env.dt", "must be positive");
  require(env.axle_length > 0.0, "env.axle_length", "must be positive");
  require(env.bot_radius >= 0.0, "env.bot_radius", "must be >= 0");
  require(env.steer_gain > 0.0, "env.steer_gain", "must be positive");
  require(env.switch_beta > 0.0 && env.switch_beta <= 1.0, "env.switch_beta", "must lie in (0, 1]");
  for (const auto& row : env.wheel_table)
    for (double v : row) require(v >= -1.0 && v <= 1.0, "env.wheel_table", "entries must lie in [-1, 1]");
  require(env.sensing_range > 0.0, "env.sensing_range", "must be positive");
  require(env.reset_max_deviation >= 0.0, "env.reset_max_deviation", "must be >= 0");
  require(env.reset_max_heading >= 0.0, "env.reset_max_heading", "must be >= 0");
  require(lagrange.lambda1 >= 0.0, "lagrange.lambda1", "must be >= 0");
  require(lagrange.lambda2 >= 0.0, "lagrange.lambda2", "must be >= 0");
  require(lagrange.lambda3 >= 0.0, "lagrange.lambda3", "must be >= 0");
  require(lagrange.alpha1 >= 0.0, "lagrange.alpha1", "must be >= 0");
  require(lagrange.alpha2 >= 0.0, "lagrange.alpha2", "must be >= 0");
  require(lagrange.alpha3 >= 0.0, "lagrange.alpha3", "must be >= 0");
  require(lagrange.eta1 >= 0.0, "lagrange.eta1", "must be >= 0");
  require(lagrange.eta2 >= 0.0, "lagrange.eta2", "must be >= 0");
  require(lagrange.eta3_policy > 0.0, "lagrange.eta3", "must be positive");
  require(lagrange.eta4_critic > 0.0, "lagrange.eta4", "must be positive");
  require(ppo.clip_eps > 0.0 && ppo.clip_eps < 1.0, "ppo.clip_eps", "must lie in (0, 1)");
  require(ppo.epochs >= 0, "ppo.epochs", "must be >= 0");
  require(ppo.minibatch >= 1, "ppo.minibatch", "must be >= 1");
  require(!entropy_coef || *entropy_coef >= 0.0, "ppo.entropy_coef", "must be >= 0");
  require(critic_epochs >= 0, "ppo.critic_epochs", "must be >= 0");
  require(critic_minibatch >= 1, "ppo.critic_minibatch", "must be >= 1");
}

/// Applies `key=value`; the value is read as JSON when it parses, otherwise
/// as a bare string. Dotted keys address nested objects.
inline RunConfig apply_override(const RunConfig& base, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  nlohmann::json doc = to_json(base);
  nlohmann::json* node = &doc;
  std::string path;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    path += (path.empty() ? "" : ".") + part;
    if (!node->is_object() || !node->contains(part)) throw ConfigError(path, "unknown key");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  *node = value;
  return config_from_json(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace crllk
