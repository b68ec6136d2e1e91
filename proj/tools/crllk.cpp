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

// crllk: train, evaluate, compare and plot constrained lane-keeping agents.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crllk/bench.hpp"

namespace {

namespace fs = std::filesystem;
using crllk::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

RunConfig build_config(const std::string& file, const std::vector<std::string>& sets) {
  RunConfig c = file.empty() ? RunConfig{} : crllk::load_config(file);
  for (const auto& s : sets) c = crllk::apply_override(c, s);
  c.validate();
  return c;
}

int cmd_train(const std::string& config_file, const std::vector<std::string>& sets, bool quiet) {
  const RunConfig cfg = build_config(config_file, sets);
  const fs::path dir = crllk::run_directory(cfg);
  const auto out = crllk::run_training(cfg, dir, quiet ? nullptr : &std::cerr);
  std::cout << "run directory: " << dir.string() << "\n"
            << "iterations: " << out.stats.size() << "\n";
  return kExitOk;
}

int cmd_eval(const std::vector<std::string>& targets, const std::string& config_file,
             const std::vector<std::string>& sets, bool stochastic, const std::string& out_dir) {
  // A run directory contributes its newest checkpoint and, if no config was
  // given, its resolved config.json.
  std::vector<fs::path> checkpoints;
  fs::path first_run;
  std::string cfg_file = config_file;
  for (const auto& t : targets) {
    const fs::path p(t);
    if (fs::is_directory(p)) {
      if (first_run.empty()) first_run = p;
      if (cfg_file.empty() && fs::exists(p / "config.json")) cfg_file = (p / "config.json").string();
      checkpoints.push_back(crllk::newest_checkpoint(p));
    } else {
      if (!fs::exists(p)) throw crllk::ArgumentError("no such checkpoint or run directory '" + t + "'");
      checkpoints.push_back(p);
    }
  }
  RunConfig cfg = build_config(cfg_file, sets);
  if (stochastic) cfg.stochastic_eval = true;
  const crllk::EvalSummary s = crllk::evaluate_checkpoints(cfg, checkpoints);
  fs::path dest = out_dir.empty() ? first_run : fs::path(out_dir);
  if (dest.empty()) dest = checkpoints.front().parent_path();
  crllk::write_eval(dest, s);
  std::cout << crllk::eval_table(s) << "written: " << (dest / "eval.json").string() << "\n";
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& runs, const std::string& out_dir) {
  std::vector<fs::path> paths(runs.begin(), runs.end());
  const crllk::Comparison c = crllk::compare_runs(paths);
  fs::path dest(out_dir);
  if (dest.empty()) {
    const char* env = std::getenv("CRLLK_OUT");
    dest = fs::path(env && *env ? env : "runs") / "compare";
  }
  crllk::write_text(dest / "compare.csv", crllk::comparison_csv(c));
  crllk::write_text(dest / "compare.json", crllk::to_json(c).dump(2) + "\n");
  std::cout << crllk::comparison_table(c) << "(* best per metric; ties go to the first run)\n"
            << "written: " << (dest / "compare.csv").string() << "\n";
  return kExitOk;
}

int cmd_curves(const std::string& run, const std::string& out_dir) {
  const fs::path dir(run);
  const fs::path dest = out_dir.empty() ? dir / "curves" : fs::path(out_dir);
  const auto rep = crllk::write_curves(dir, dest);
  for (const auto& f : rep.files) std::cout << f.string() << "\n";
  return kExitOk;
}

int cmd_tracks_show(const std::string& name) {
  const crllk::TrackMap t = crllk::build_track(crllk::TrackSpec::parse(name));
  std::cout << crllk::track_to_json(t).dump(2) << "\n"
            << "lane length: " << t.lane_length() << " m, centerline length: " << t.road_length() << " m\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained lane-keeping bench"};
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::vector<std::string> sets, targets;
  bool quiet = false, stochastic = false;

  auto* train = app.add_subcommand("train", "train an agent and write a run directory");
  train->add_option("-c,--config", config_file, "JSON config file");
  train->add_option("--set", sets, "override a config key, e.g. --set ppo.clip_eps=0.1");
  train->add_flag("-q,--quiet", quiet, "no per-iteration log");

  auto* eval = app.add_subcommand("eval", "evaluate checkpoints or run directories");
  eval->add_option("targets", targets, "run directories or checkpoint files (one per seed)")->required();
  eval->add_option("-c,--config", config_file, "JSON config file (default: the run's config.json)");
  eval->add_option("--set", sets, "override a config key");
  eval->add_flag("--stochastic", stochastic, "sample actions instead of acting greedily");
  eval->add_option("-o,--out", out_dir, "output directory (default: the first run directory)");

  auto* compare = app.add_subcommand("compare", "side-by-side metric table for evaluated runs");
  compare->add_option("runs", targets, "run directories or eval.json files")->required();
  compare->add_option("-o,--out", out_dir, "output directory");

  auto* curves = app.add_subcommand("curves", "emit CSV and SVG learning curves for a run");
  std::string run;
  curves->add_option("run", run, "run directory")->required();
  curves->add_option("-o,--out", out_dir, "output directory (default: <run>/curves)");

  auto* tracks = app.add_subcommand("tracks", "inspect tracks");
  tracks->require_subcommand(1);
  tracks->add_subcommand("list", "list built-in tracks");
  auto* show = tracks->add_subcommand("show", "print a track as JSON");
  std::string track_name;
  show->add_option("name", track_name, "built-in name, custom:<path> or <file>.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(config_file, sets, quiet);
    if (*eval) return cmd_eval(targets, config_file, sets, stochastic, out_dir);
    if (*compare) return cmd_compare(targets, out_dir);
    if (*curves) return cmd_curves(run, out_dir);
    if (tracks->got_subcommand("list")) {
      for (const auto& n : crllk::builtin_track_names()) std::cout << n << "\n";
      return kExitOk;
    }
    return cmd_tracks_show(track_name);
  } catch (const crllk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const crllk::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << " (last good state kept as last_good.json)\n";
    return kExitNumeric;
  } catch (const crllk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
