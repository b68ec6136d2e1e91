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
 * Parallel trajectory collection. Each worker owns an environment instance
 * and a generator from seed_stream(base_seed, worker, iteration); workers
 * share only the read-only track and policy snapshot. Results are merged in
 * worker-index order.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <sstream>
#include <thread>
#include <vector>

#include "crllk/buffer.hpp"
#include "crllk/errors.hpp"
#include "crllk/policy.hpp"
#include "crllk/rng.hpp"
#include "crllk/track.hpp"
#include "crllk/vehicle.hpp"

namespace crllk {

struct WorkerSpec {
  int worker_count = 4;
  int episodes_per_worker = 2;
  std::uint64_t base_seed = 1;

  void validate() const {
    if (worker_count < 1 || static_cast<std::uint64_t>(worker_count) > kMaxWorkers)
      throw ArgumentError("worker_count must be in [1, 65536]");
    if (episodes_per_worker < 1) throw ArgumentError("episodes_per_worker must be >= 1");
  }
};

struct CollectReport {
  std::vector<TrajectoryBuffer> buffers;
  std::size_t steps_total = 0;
  int episodes_total = 0;
  std::vector<double> wall_ms;

  TrajectoryBuffer merged() const {
    TrajectoryBuffer all;
    for (const auto& b : buffers) all.append(b);
    return all;
  }
};

enum class ActingRule { kStochastic, kGreedy };

/// Runs one episode from reset(seed) to termination.
inline Episode run_episode(const TrackMap& track, const EnvConfig& cfg, const NetParams& policy,
                           const NetParams* critic, std::uint64_t reset_seed, int episode_id, ActingRule rule,
                           Rng& rng) {
  Episode ep;
  ep.id = episode_id;
  ep.reset_seed = reset_seed;
  auto [state, obs] = reset(track, cfg, reset_seed);
  ep.steps.reserve(static_cast<std::size_t>(cfg.horizon));
  while (!state.done) {
    const ActionDistribution dist = forward_policy(policy, obs);
    const ActionSample a = rule == ActingRule::kStochastic ? sample_and_logprob(dist, rng) : greedy_action(dist);
    StepRecord rec;
    rec.action = a;
    rec.log_prob_old = a.log_prob;
    rec.value_old = critic ? forward_value(*critic, obs) : 0.0;
    rec.episode_id = episode_id;
    auto [next, out] = step(track, cfg, state, a.action);
    rec.obs = std::move(obs);
    rec.reward = out.reward;
    rec.c_lane = out.cost_lane;
    rec.c_coll = out.cost_coll;
    rec.c_swt = out.cost_swt;
    rec.done = out.done;
    ep.steps.push_back(std::move(rec));
    state = std::move(next);
    obs = std::move(out.observation);
  }
  ep.reason = state.done_reason;
  ep.bootstrap_value = (state.done_reason == DoneReason::kHorizon && critic) ? forward_value(*critic, obs) : 0.0;
  return ep;
}

/// One worker's share: `episodes` consecutive episodes, each reset from the
/// next draw of `rng`. Episode ids start at `first_id`.
inline TrajectoryBuffer rollout_worker(const TrackMap& track, const EnvConfig& cfg, const NetParams& policy,
                                       const NetParams* critic, Rng rng, int episodes, int first_id,
                                       ActingRule rule = ActingRule::kStochastic) {
  TrajectoryBuffer buf;
  buf.episodes.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t seed = rng.next_u64();
    buf.episodes.push_back(run_episode(track, cfg, policy, critic, seed, first_id + e, rule, rng));
  }
  return buf;
}

inline CollectReport collect(const TrackMap& track, const EnvConfig& cfg, const NetParams& policy,
                             const NetParams* critic, const WorkerSpec& spec, std::uint64_t iteration,
                             ActingRule rule = ActingRule::kStochastic, std::uint64_t domain = 0) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.worker_count);
  CollectReport report;
  report.buffers.resize(n);
  report.wall_ms.resize(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t w) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Rng rng = seed_stream(spec.base_seed, w, iteration, domain);
      report.buffers[w] = rollout_worker(track, cfg, policy, critic, rng, spec.episodes_per_worker,
                                         static_cast<int>(w) * spec.episodes_per_worker, rule);
    } catch (...) {
      errors[w] = std::current_exception();
    }
    report.wall_ms[w] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  if (n == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t w = 0; w < n; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  for (std::size_t w = 0; w < n; ++w) {
    if (!errors[w]) continue;
    std::ostringstream os;
    os << "worker " << w << " (base_seed " << spec.base_seed << ", iteration " << iteration << ") failed: ";
    try {
      std::rethrow_exception(errors[w]);
    } catch (const std::exception& e) {
      os << e.what();
    } catch (...) {
      os << "unknown exception";
    }
    throw CollectionError(os.str());
  }
  for (const auto& b : report.buffers) {
    report.steps_total += b.total_steps();
    report.episodes_total += static_cast<int>(b.episodes.size());
  }
  return report;
}

}  // namespace crllk
