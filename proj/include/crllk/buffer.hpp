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

#pragma once

#include <cstdint>
#include <vector>

#include "crllk/errors.hpp"
#include "crllk/policy.hpp"
#include "crllk/vehicle.hpp"

namespace crllk {

struct StepRecord {
  ObsVector obs;
  ActionSample action;
  double log_prob_old = 0.0;
  double reward = 0.0;
  double c_lane = 0.0;
  int c_coll = 0;
  int c_swt = 0;
  double value_old = 0.0;
  bool done = false;
  int episode_id = 0;
};

struct Episode {
  int id = 0;
  std::uint64_t reset_seed = 0;
  std::vector<StepRecord> steps;
  /// Value of the state after the last step; zero when the episode terminated.
  double bootstrap_value = 0.0;
  DoneReason reason = DoneReason::kNone;

  double reward_sum() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.reward;
    return s;
  }
  double lane_mean() const {
    if (steps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& st : steps) s += st.c_lane;
    return s / static_cast<double>(steps.size());
  }
  int collision_sum() const {
    int s = 0;
    for (const auto& st : steps) s += st.c_coll;
    return s;
  }
  int switch_sum() const {
    int s = 0;
    for (const auto& st : steps) s += st.c_swt;
    return s;
  }
};

/// Complete episodes gathered against one policy snapshot.
struct TrajectoryBuffer {
  std::vector<Episode> episodes;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& e : episodes) n += e.steps.size();
    return n;
  }

  void validate(int horizon) const {
    for (const auto& e : episodes) {
      if (static_cast<int>(e.steps.size()) > horizon)
        throw ArgumentError("episode " + std::to_string(e.id) + " exceeds the horizon");
    }
  }

  void append(const TrajectoryBuffer& other) {
    episodes.insert(episodes.end(), other.episodes.begin(), other.episodes.end());
  }
};

}  // namespace crllk
