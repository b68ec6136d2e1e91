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
 * Orchestration behind the command-line tool: training runs with persisted
 * stats and checkpoints, evaluation summaries, run comparison, and curve
 * emission. Every reported number is derived from data written to disk.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crllk/config.hpp"
#include "crllk/errors.hpp"
#include "crllk/policy.hpp"
#include "crllk/rollout.hpp"
#include "crllk/track.hpp"
#include "crllk/trainer.hpp"

namespace crllk {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + p.string() + "'");
  out << text;
}

inline nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("malformed JSON in '" + p.string() + "': " + e.what());
  }
}

/// Shortest decimal that reads back to the same double.
inline std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "0.66±0.02" style cell.
inline std::string format_pm(double mean, double std_dev, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f±%.*f", decimals, mean, decimals, std_dev);
  return buf;
}

/// Output root: $CRLLK_OUT when set, otherwise the configured directory.
inline fs::path output_root(const RunConfig& c) {
  const char* env = std::getenv("CRLLK_OUT");
  return (env && *env) ? fs::path(env) : fs::path(c.output_dir);
}

inline fs::path run_directory(const RunConfig& c) { return output_root(c) / c.run_name; }

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  TrainMode mode = TrainMode::kCrllkDiscrete;
  std::string track;
  std::uint64_t iteration = 0;
  NetParams policy;
  NetParams critic;
  LagrangeState lagrange;
};

inline nlohmann::json to_json(const Checkpoint& c) {
  const LagrangeState& l = c.lagrange;
  return {{"format", "crllk-checkpoint"},
          {"version", 1},
          {"mode", to_string(c.mode)},
          {"track", c.track},
          {"iteration", c.iteration},
          {"lambda", {l.lambda1, l.lambda2, l.lambda3}},
          {"policy", to_json(c.policy)},
          {"critic", to_json(c.critic)}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "crllk-checkpoint")
      throw ArgumentError("not a checkpoint (format tag mismatch)");
    if (j.at("version").get<int>() != 1) throw ArgumentError("unsupported checkpoint version");
    Checkpoint c;
    c.mode = train_mode_from_string(j.at("mode").get<std::string>());
    c.track = j.at("track").get<std::string>();
    c.iteration = j.at("iteration").get<std::uint64_t>();
    const auto lam = j.at("lambda").get<std::vector<double>>();
    if (lam.size() != 3) throw ArgumentError("checkpoint lambda needs three entries");
    c.lagrange.lambda1 = lam[0];
    c.lagrange.lambda2 = lam[1];
    c.lagrange.lambda3 = lam[2];
    c.policy = net_from_json(j.at("policy"));
    c.critic = net_from_json(j.at("critic"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline Checkpoint load_checkpoint(const fs::path& p) { return checkpoint_from_json(read_json(p)); }

inline void save_checkpoint(const fs::path& p, const Checkpoint& c) { write_text(p, to_json(c).dump() + "\n"); }

inline Checkpoint snapshot(const LearnerState& st, const RunConfig& cfg) {
  return {cfg.mode, cfg.track, st.iteration, st.policy, st.critic, st.lagrange};
}

inline std::string checkpoint_name(std::uint64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06llu.json", static_cast<unsigned long long>(iteration));
  return buf;
}

// ---------------------------------------------------------------------------
// Training

struct TrainOutcome {
  fs::path dir;
  std::vector<IterationStats> stats;
  LearnerState final_state;
};

/// Trains into `dir`: config.json, stats.jsonl, timing.jsonl, checkpoints/
/// (initial plus every checkpoint_interval iterations) and final_params.json.
/// On NumericError the pre-failure state is written to last_good.json and the
/// error is rethrown.
inline TrainOutcome run_training(const RunConfig& cfg, const fs::path& dir, std::ostream* log = nullptr) {
  cfg.validate();
  const TrackMap track = build_track(TrackSpec::parse(cfg.track));
  const TrainSettings ts = cfg.train_settings();

  fs::create_directories(dir / "checkpoints");
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
  std::ofstream stats_out(dir / "stats.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream timing_out(dir / "timing.jsonl", std::ios::binary | std::ios::trunc);
  if (!stats_out || !timing_out) throw ArgumentError("cannot write into '" + dir.string() + "'");
  fs::remove(dir / "last_good.json");

  TrainOutcome out;
  out.dir = dir;
  LearnerState st = make_learner(cfg.mode, cfg.env.observation_size(), cfg.hidden, cfg.base_seed, cfg.lagrange,
                                 cfg.optimizer);
  save_checkpoint(dir / "checkpoints" / checkpoint_name(0), snapshot(st, cfg));

  for (int i = 0; i < cfg.iterations; ++i) {
    IterationStats s;
    try {
      s = train_iteration(track, cfg.env, st, ts);
      const double fields[] = {s.J_R, s.J_clane, s.J_ccoll, s.J_cswt, s.lambda1,
                               s.lambda2, s.lambda3, s.policy_loss, s.value_loss};
      for (double f : fields)
        if (!std::isfinite(f)) throw NumericError("non-finite statistic at iteration " + std::to_string(i));
    } catch (const NumericError&) {
      save_checkpoint(dir / "last_good.json", snapshot(st, cfg));
      throw;
    }
    stats_out << s.to_json(cfg.stats_wall_time).dump() << "\n";
    stats_out.flush();
    timing_out << nlohmann::ordered_json{{"iter", s.iter}, {"wall_ms", s.wall_ms}}.dump() << "\n";
    out.stats.push_back(s);
    if (log) {
      *log << "iter " << s.iter << "  J_R " << std::fixed << std::setprecision(3) << s.J_R << "  J_clane "
           << s.J_clane << " dm  J_ccoll " << s.J_ccoll << "  lambda1 " << std::setprecision(6) << s.lambda1
           << std::defaultfloat << "\n";
    }
    if ((i + 1) % cfg.checkpoint_interval == 0)
      save_checkpoint(dir / "checkpoints" / checkpoint_name(st.iteration), snapshot(st, cfg));
  }
  save_checkpoint(dir / "final_params.json", snapshot(st, cfg));
  out.final_state = std::move(st);
  return out;
}

inline std::vector<IterationStats> read_stats(const fs::path& path) {
  if (!fs::exists(path)) throw ArgumentError("missing stats file '" + path.string() + "'");
  std::ifstream in(path);
  std::vector<IterationStats> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(IterationStats::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), n);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

inline constexpr std::uint64_t kEvalDomain = 0x4556414cULL;

struct EvalEpisode {
  int seed_index = 0;
  std::uint64_t eval_seed = 0;
  int episode = 0;
  std::uint64_t reset_seed = 0;
  int steps = 0;
  double reward = 0.0;
  double lane_mean = 0.0;
  int collisions = 0;
  int switches = 0;
  std::string done_reason;
  /// Discrete: counts of left, right, straight. Continuous: steer bins then
  /// speed bins over [-1, 1].
  std::vector<long> action_counts;
};

struct MetricSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<double> per_seed;
};

struct EvalSettings {
  int episodes = 100;
  int seeds = 2;
  std::uint64_t base_seed = 1000;
  bool stochastic = false;
  int bins = 20;
};

struct EvalSummary {
  TrainMode mode = TrainMode::kCrllkDiscrete;
  std::string track;
  EvalSettings settings;
  std::vector<std::string> checkpoints;
  MetricSummary J_clane;
  MetricSummary J_ccoll;
  MetricSummary J_R;
  MetricSummary J_cswt;
  std::vector<double> action_frequency;            // discrete
  std::vector<std::vector<double>> histograms;     // continuous, per dimension
  std::vector<EvalEpisode> episodes;
};

inline int histogram_bin(double x, int bins) {
  const double u = (std::clamp(x, -1.0, 1.0) + 1.0) / 2.0;
  return std::min(bins - 1, static_cast<int>(u * bins));
}

inline MetricSummary seed_metric(const std::vector<EvalEpisode>& eps, int seeds, double (*get)(const EvalEpisode&)) {
  MetricSummary m;
  m.per_seed.assign(static_cast<std::size_t>(seeds), 0.0);
  std::vector<int> count(static_cast<std::size_t>(seeds), 0);
  for (const auto& e : eps) {
    m.per_seed.at(static_cast<std::size_t>(e.seed_index)) += get(e);
    ++count[static_cast<std::size_t>(e.seed_index)];
  }
  for (int s = 0; s < seeds; ++s) {
    if (count[s] == 0) throw ArgumentError("seed " + std::to_string(s) + " has no episodes");
    m.per_seed[s] /= count[s];
    m.mean += m.per_seed[s];
  }
  m.mean /= seeds;
  double var = 0.0;
  for (double v : m.per_seed) var += (v - m.mean) * (v - m.mean);
  m.std_dev = std::sqrt(var / seeds);
  return m;
}

/// Rebuilds every summary figure from per-episode records.
inline void summarize(EvalSummary& s) {
  const int seeds = s.settings.seeds;
  s.J_clane = seed_metric(s.episodes, seeds, [](const EvalEpisode& e) { return e.lane_mean; });
  s.J_ccoll = seed_metric(s.episodes, seeds, [](const EvalEpisode& e) { return double(e.collisions); });
  s.J_R = seed_metric(s.episodes, seeds, [](const EvalEpisode& e) { return e.reward; });
  s.J_cswt = seed_metric(s.episodes, seeds, [](const EvalEpisode& e) { return double(e.switches); });
  s.action_frequency.clear();
  s.histograms.clear();
  if (s.episodes.empty()) return;
  std::vector<long> total(s.episodes.front().action_counts.size(), 0);
  for (const auto& e : s.episodes) {
    if (e.action_counts.size() != total.size()) throw ArgumentError("inconsistent action-count width");
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += e.action_counts[i];
  }
  if (is_discrete(s.mode)) {
    long n = 0;
    for (long c : total) n += c;
    for (long c : total) s.action_frequency.push_back(n ? double(c) / double(n) : 0.0);
    return;
  }
  const std::size_t bins = total.size() / 2;
  for (int dim = 0; dim < 2; ++dim) {
    std::vector<double> h(bins, 0.0);
    long n = 0;
    for (std::size_t b = 0; b < bins; ++b) n += total[dim * bins + b];
    for (std::size_t b = 0; b < bins; ++b) h[b] = n ? double(total[dim * bins + b]) / double(n) : 0.0;
    s.histograms.push_back(std::move(h));
  }
}

/// One eval stream per seed index; seed index i plays policies[i % n].
inline EvalSummary evaluate(const TrackMap& track, const std::string& track_name, const EnvConfig& env, TrainMode mode,
                            const std::vector<NetParams>& policies, const EvalSettings& es) {
  if (policies.empty()) throw ArgumentError("evaluate: no policy given");
  if (es.episodes < 1 || es.seeds < 1 || es.bins < 1) throw ArgumentError("evaluate: bad settings");
  for (const auto& p : policies) {
    if (p.head != policy_head(mode))
      throw ArgumentError(std::string("checkpoint head '") + to_string(p.head) + "' does not match mode '" +
                          to_string(mode) + "'");
    if (p.input_size() != env.observation_size()) throw ArgumentError("checkpoint input size does not match env");
  }
  EvalSummary s;
  s.mode = mode;
  s.track = track_name;
  s.settings = es;
  const ActingRule rule = es.stochastic ? ActingRule::kStochastic : ActingRule::kGreedy;
  for (int si = 0; si < es.seeds; ++si) {
    const NetParams& policy = policies[static_cast<std::size_t>(si) % policies.size()];
    Rng rng = seed_stream(es.base_seed, 0, static_cast<std::uint64_t>(si), kEvalDomain);
    for (int e = 0; e < es.episodes; ++e) {
      const std::uint64_t reset_seed = rng.next_u64();
      const Episode ep = run_episode(track, env, policy, nullptr, reset_seed, e, rule, rng);
      EvalEpisode r;
      r.seed_index = si;
      r.eval_seed = es.base_seed;
      r.episode = e;
      r.reset_seed = reset_seed;
      r.steps = static_cast<int>(ep.steps.size());
      r.reward = ep.reward_sum();
      r.lane_mean = ep.lane_mean();
      r.collisions = ep.collision_sum();
      r.switches = ep.switch_sum();
      r.done_reason = to_string(ep.reason);
      if (is_discrete(mode)) {
        r.action_counts.assign(kNumDiscreteActions, 0);
        for (const auto& st : ep.steps) ++r.action_counts[static_cast<std::size_t>(st.action.index)];
      } else {
        r.action_counts.assign(static_cast<std::size_t>(2 * es.bins), 0);
        for (const auto& st : ep.steps) {
          const auto& a = std::get<ContinuousAction>(st.action.action);
          ++r.action_counts[static_cast<std::size_t>(histogram_bin(a.steer, es.bins))];
          ++r.action_counts[static_cast<std::size_t>(es.bins + histogram_bin(a.speed, es.bins))];
        }
      }
      s.episodes.push_back(std::move(r));
    }
  }
  summarize(s);
  return s;
}

inline std::string episodes_csv(const EvalSummary& s) {
  std::ostringstream os;
  os << "seed_index,eval_seed,episode,reset_seed,steps,reward,lane_mean,collisions,switches,done_reason";
  const std::size_t width = s.episodes.empty() ? 0 : s.episodes.front().action_counts.size();
  for (std::size_t i = 0; i < width; ++i) os << ",a" << i;
  os << "\n";
  for (const auto& e : s.episodes) {
    os << e.seed_index << ',' << e.eval_seed << ',' << e.episode << ',' << e.reset_seed << ',' << e.steps << ','
       << exact(e.reward) << ',' << exact(e.lane_mean) << ',' << e.collisions << ',' << e.switches << ','
       << e.done_reason;
    for (long c : e.action_counts) os << ',' << c;
    os << "\n";
  }
  return os.str();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<EvalEpisode> parse_episodes_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty episodes CSV", 1);
  const std::size_t cols = split_csv(line).size();
  std::vector<EvalEpisode> out;
  int n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != cols || cols < 10) throw ParseError("wrong column count", n);
    EvalEpisode e;
    try {
      e.seed_index = std::stoi(c[0]);
      e.eval_seed = std::stoull(c[1]);
      e.episode = std::stoi(c[2]);
      e.reset_seed = std::stoull(c[3]);
      e.steps = std::stoi(c[4]);
      e.reward = std::stod(c[5]);
      e.lane_mean = std::stod(c[6]);
      e.collisions = std::stoi(c[7]);
      e.switches = std::stoi(c[8]);
      e.done_reason = c[9];
      for (std::size_t i = 10; i < c.size(); ++i) e.action_counts.push_back(std::stol(c[i]));
    } catch (const std::logic_error&) {
      throw ParseError("bad numeric cell", n);
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline nlohmann::ordered_json metric_json(const MetricSummary& m, int decimals) {
  return {{"mean", m.mean}, {"std", m.std_dev}, {"per_seed", m.per_seed}, {"formatted", format_pm(m.mean, m.std_dev, decimals)}};
}

inline MetricSummary metric_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("per_seed").get<std::vector<double>>()};
}

inline nlohmann::ordered_json to_json(const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["format"] = "crllk-eval";
  j["mode"] = to_string(s.mode);
  j["track"] = s.track;
  j["stochastic"] = s.settings.stochastic;
  j["eval_episodes"] = s.settings.episodes;
  j["eval_seeds"] = s.settings.seeds;
  j["eval_base_seed"] = s.settings.base_seed;
  j["checkpoints"] = s.checkpoints;
  nlohmann::ordered_json m;
  m["J_clane"] = metric_json(s.J_clane, 2);
  MetricSummary meters = s.J_clane;
  meters.mean /= 10.0;
  meters.std_dev /= 10.0;
  for (double& v : meters.per_seed) v /= 10.0;
  m["J_clane_m"] = metric_json(meters, 3);
  m["J_ccoll"] = metric_json(s.J_ccoll, 2);
  m["J_R"] = metric_json(s.J_R, 1);
  m["J_cswt"] = metric_json(s.J_cswt, 2);
  j["metrics"] = m;
  if (is_discrete(s.mode)) {
    j["action_frequency"] = {{"turn_left", s.action_frequency.at(0)},
                             {"turn_right", s.action_frequency.at(1)},
                             {"straight", s.action_frequency.at(2)}};
  } else {
    j["histogram_bins"] = s.settings.bins;
    j["histograms"] = {{"steer", s.histograms.at(0)}, {"speed", s.histograms.at(1)}};
  }
  return j;
}

inline std::string eval_table(const EvalSummary& s) {
  std::ostringstream os;
  const MetricSummary& l = s.J_clane;
  os << "metric        value\n";
  os << "J_clane (dm)  " << format_pm(l.mean, l.std_dev, 2) << "   (" << format_pm(l.mean / 10, l.std_dev / 10, 3)
     << " m)\n";
  os << "J_ccoll       " << format_pm(s.J_ccoll.mean, s.J_ccoll.std_dev, 2) << "\n";
  os << "J_R (m)       " << format_pm(s.J_R.mean, s.J_R.std_dev, 1) << "\n";
  if (is_discrete(s.mode)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "actions       left %.3f  right %.3f  straight %.3f\n", s.action_frequency[0],
                  s.action_frequency[1], s.action_frequency[2]);
    os << buf;
  }
  os << "episodes      " << s.episodes.size() << " (" << s.settings.seeds << " seeds x " << s.settings.episodes
     << ")\n";
  return os.str();
}

inline void write_eval(const fs::path& dir, const EvalSummary& s) {
  write_text(dir / "eval.json", to_json(s).dump(2) + "\n");
  write_text(dir / "eval_episodes.csv", episodes_csv(s));
}

inline fs::path newest_checkpoint(const fs::path& run_dir) {
  if (fs::exists(run_dir / "final_params.json")) return run_dir / "final_params.json";
  fs::path best;
  if (fs::is_directory(run_dir / "checkpoints")) {
    for (const auto& e : fs::directory_iterator(run_dir / "checkpoints"))
      if (e.path().extension() == ".json" && (best.empty() || e.path().filename() > best.filename())) best = e.path();
  }
  if (best.empty()) throw ArgumentError("no checkpoint under '" + run_dir.string() + "'");
  return best;
}

inline EvalSettings eval_settings(const RunConfig& c) {
  return {c.eval_episodes, c.eval_seeds, c.eval_base_seed, c.stochastic_eval, c.histogram_bins};
}

/// Evaluates checkpoints against `cfg`. Mismatched head, mode or track raise
/// ArgumentError.
inline EvalSummary evaluate_checkpoints(const RunConfig& cfg, const std::vector<fs::path>& checkpoints) {
  std::vector<NetParams> policies;
  for (const auto& p : checkpoints) {
    const Checkpoint c = load_checkpoint(p);
    if (c.mode != cfg.mode)
      throw ArgumentError("checkpoint '" + p.string() + "' was trained in mode '" + to_string(c.mode) +
                          "' but the config says '" + to_string(cfg.mode) + "'");
    policies.push_back(c.policy);
  }
  const TrackMap track = build_track(TrackSpec::parse(cfg.track));
  EvalSummary s = evaluate(track, cfg.track, cfg.env, cfg.mode, policies, eval_settings(cfg));
  for (const auto& p : checkpoints) s.checkpoints.push_back(p.string());
  return s;
}

// ---------------------------------------------------------------------------
// Comparison

struct CompareRow {
  std::string metric;
  bool lower_is_better = true;
  std::vector<double> mean;
  std::vector<double> std_dev;
  std::vector<std::string> formatted;
  std::size_t best = 0;
};

struct Comparison {
  std::string track;
  std::vector<std::string> labels;
  std::vector<CompareRow> rows;
};

/// Accepts run directories or eval.json paths. Best per metric is the lowest
/// cost or highest reward; ties go to the earliest run.
inline Comparison compare_runs(const std::vector<fs::path>& runs) {
  if (runs.size() < 2) throw ArgumentError("compare needs at least two runs");
  Comparison cmp;
  struct Spec {
    const char* key;
    bool lower;
    int decimals;
  };
  const Spec specs[] = {{"J_clane", true, 2}, {"J_ccoll", true, 2}, {"J_R", false, 1}};
  for (const auto& s : specs) cmp.rows.push_back({s.key, s.lower, {}, {}, {}, 0});
  for (const auto& r : runs) {
    const fs::path file = fs::is_directory(r) ? r / "eval.json" : r;
    if (!fs::exists(file)) throw ArgumentError("no eval.json for '" + r.string() + "' (run eval first)");
    const nlohmann::json j = read_json(file);
    const std::string track = j.at("track").get<std::string>();
    if (cmp.labels.empty()) {
      cmp.track = track;
    } else if (track != cmp.track) {
      throw ArgumentError("track mismatch: '" + r.string() + "' was evaluated on '" + track + "', expected '" +
                          cmp.track + "'");
    }
    const fs::path label_path = fs::is_directory(r) ? r : r.parent_path();
    std::string label = label_path.filename().string();
    if (label.empty()) label = r.string();
    cmp.labels.push_back(label + ":" + j.at("mode").get<std::string>());
    for (std::size_t k = 0; k < cmp.rows.size(); ++k) {
      const MetricSummary m = metric_from_json(j.at("metrics").at(specs[k].key));
      cmp.rows[k].mean.push_back(m.mean);
      cmp.rows[k].std_dev.push_back(m.std_dev);
      cmp.rows[k].formatted.push_back(format_pm(m.mean, m.std_dev, specs[k].decimals));
    }
  }
  for (auto& row : cmp.rows) {
    for (std::size_t i = 1; i < row.mean.size(); ++i) {
      const bool better = row.lower_is_better ? row.mean[i] < row.mean[row.best] : row.mean[i] > row.mean[row.best];
      if (better) row.best = i;
    }
  }
  return cmp;
}

inline std::string comparison_table(const Comparison& c) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "metric";
  for (const auto& l : c.labels) os << std::setw(24) << l;
  os << "\n";
  for (const auto& r : c.rows) {
    os << std::setw(10) << r.metric;
    for (std::size_t i = 0; i < r.formatted.size(); ++i)
      os << std::setw(24) << (r.formatted[i] + (i == r.best ? " *" : ""));
    os << "\n";
  }
  return os.str();
}

/// Columns: metric, stat, one per run, best_run (index of the best run).
inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os << "metric,stat";
  for (const auto& l : c.labels) os << ',' << l;
  os << ",best_run\n";
  for (const auto& r : c.rows) {
    os << r.metric << ",mean";
    for (double v : r.mean) os << ',' << exact(v);
    os << ',' << r.best << "\n";
    os << r.metric << ",std";
    for (double v : r.std_dev) os << ',' << exact(v);
    os << ',' << r.best << "\n";
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const Comparison& c) {
  nlohmann::ordered_json j;
  j["track"] = c.track;
  j["runs"] = c.labels;
  j["tie_rule"] = "first run wins ties";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : c.rows) {
    nlohmann::ordered_json row;
    row["metric"] = r.metric;
    row["lower_is_better"] = r.lower_is_better;
    row["mean"] = r.mean;
    row["std"] = r.std_dev;
    row["formatted"] = r.formatted;
    row["best_index"] = r.best;
    std::vector<bool> flags(r.mean.size(), false);
    flags[r.best] = true;
    row["best"] = flags;
    rows.push_back(row);
  }
  j["metrics"] = rows;
  return j;
}

// ---------------------------------------------------------------------------
// Curves

struct Series {
  std::string name;
  std::vector<double> y;
};

/// Minimal line chart: one polyline per series, one point per value.
inline std::string svg_line_chart(const std::string& title, const std::vector<double>& x,
                                  const std::vector<Series>& series) {
  const double W = 640, H = 360, pad = 40;
  double xmin = 0, xmax = 1, ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  if (!x.empty()) {
    xmin = *std::min_element(x.begin(), x.end());
    xmax = *std::max_element(x.begin(), x.end());
  }
  for (const auto& s : series)
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymin -= 0.5, ymax += 0.5;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<title>" << title << "</title>\n";
  os << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
     << "\" fill=\"none\" stroke=\"#999\"/>\n";
  os << "<text x=\"2\" y=\"" << pad + 4 << "\" font-size=\"10\">" << exact(ymax) << "</text>\n";
  os << "<text x=\"2\" y=\"" << H - pad << "\" font-size=\"10\">" << exact(ymin) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" data-series=\"" << series[k].name
       << "\" points=\"";
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      const double px = pad + (x[i] - xmin) / (xmax - xmin) * (W - 2 * pad);
      const double py = H - pad - (series[k].y[i] - ymin) / (ymax - ymin) * (H - 2 * pad);
      os << (i ? " " : "") << exact(px) << ',' << exact(py);
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                                 const std::vector<double>& values) {
  const double W = 640, H = 360, pad = 40;
  const double vmax = values.empty() ? 1.0 : std::max(1e-12, *std::max_element(values.begin(), values.end()));
  const double bw = (W - 2 * pad) / std::max<std::size_t>(1, values.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<title>" << title << "</title>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = values[i] / vmax * (H - 2 * pad);
    os << "<rect x=\"" << exact(pad + i * bw) << "\" y=\"" << exact(H - pad - h) << "\" width=\"" << exact(bw * 0.9)
       << "\" height=\"" << exact(h) << "\" fill=\"#1f77b4\"><title>" << labels[i] << " " << exact(values[i])
       << "</title></rect>\n";
  }
  os << "</svg>\n";
  return os.str();
}

struct CurvesReport {
  std::vector<fs::path> files;
  std::size_t rows = 0;
};

/// Emits lambda, J_clane and J_R curves from stats.jsonl, plus the action
/// histogram of the run's evaluation (evaluating the newest checkpoint when
/// no eval.json exists yet).
inline CurvesReport write_curves(const fs::path& run_dir, const fs::path& out_dir) {
  const auto stats = read_stats(run_dir / "stats.jsonl");
  fs::create_directories(out_dir);
  CurvesReport rep;
  rep.rows = stats.size();
  std::vector<double> x;
  Series l1{"lambda1", {}}, l2{"lambda2", {}}, l3{"lambda3", {}}, jl{"J_clane", {}}, jr{"J_R", {}};
  std::ostringstream lam, lane, rew;
  lam << "iter,lambda1,lambda2,lambda3\n";
  lane << "iter,J_clane\n";
  rew << "iter,J_R\n";
  for (const auto& s : stats) {
    x.push_back(double(s.iter));
    l1.y.push_back(s.lambda1);
    l2.y.push_back(s.lambda2);
    l3.y.push_back(s.lambda3);
    jl.y.push_back(s.J_clane);
    jr.y.push_back(s.J_R);
    lam << s.iter << ',' << exact(s.lambda1) << ',' << exact(s.lambda2) << ',' << exact(s.lambda3) << "\n";
    lane << s.iter << ',' << exact(s.J_clane) << "\n";
    rew << s.iter << ',' << exact(s.J_R) << "\n";
  }
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(out_dir / name, text);
    rep.files.push_back(out_dir / name);
  };
  emit("lambda.csv", lam.str());
  emit("lambda.svg", svg_line_chart("Lagrange multipliers", x, {l1, l2, l3}));
  emit("j_clane.csv", lane.str());
  emit("j_clane.svg", svg_line_chart("Average lane deviation (dm)", x, {jl}));
  emit("j_r.csv", rew.str());
  emit("j_r.svg", svg_line_chart("Total distance reward (m)", x, {jr}));

  nlohmann::json ev;
  if (fs::exists(run_dir / "eval.json")) {
    ev = read_json(run_dir / "eval.json");
  } else {
    const RunConfig cfg = config_from_json(read_json(run_dir / "config.json"));
    EvalSummary s = evaluate_checkpoints(cfg, {newest_checkpoint(run_dir)});
    write_eval(run_dir, s);
    ev = to_json(s);
  }
  std::vector<std::string> labels;
  std::vector<double> values;
  std::ostringstream act;
  if (ev.contains("action_frequency")) {
    act << "action,frequency\n";
    for (const char* k : {"turn_left", "turn_right", "straight"}) {
      labels.emplace_back(k);
      values.push_back(ev["action_frequency"].at(k).get<double>());
      act << k << ',' << exact(values.back()) << "\n";
    }
  } else {
    const int bins = ev.at("histogram_bins").get<int>();
    act << "dimension,bin_lo,bin_hi,frequency\n";
    for (const char* dim : {"steer", "speed"}) {
      const auto h = ev.at("histograms").at(dim).get<std::vector<double>>();
      for (int b = 0; b < bins; ++b) {
        const double lo = -1.0 + 2.0 * b / bins, hi = -1.0 + 2.0 * (b + 1) / bins;
        labels.push_back(std::string(dim) + "[" + exact(lo) + "," + exact(hi) + ")");
        values.push_back(h.at(static_cast<std::size_t>(b)));
        act << dim << ',' << exact(lo) << ',' << exact(hi) << ',' << exact(values.back()) << "\n";
      }
    }
  }
  emit("actions.csv", act.str());
  emit("actions.svg", svg_bar_chart("Action distribution in evaluation", labels, values));
  return rep;
}

}  // namespace crllk
