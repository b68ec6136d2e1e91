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

#include <string>

#include <gtest/gtest.h>

#include "crllk/rollout.hpp"

namespace crllk {
namespace {

bool same_buffer(const TrajectoryBuffer& a, const TrajectoryBuffer& b) {
  if (a.episodes.size() != b.episodes.size()) return false;
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    const Episode& x = a.episodes[e];
    const Episode& y = b.episodes[e];
    if (x.id != y.id || x.reset_seed != y.reset_seed || x.steps.size() != y.steps.size() ||
        x.bootstrap_value != y.bootstrap_value || x.reason != y.reason)
      return false;
    for (std::size_t k = 0; k < x.steps.size(); ++k) {
      const StepRecord& s = x.steps[k];
      const StepRecord& t = y.steps[k];
      if (s.obs != t.obs || s.action.raw != t.action.raw || s.action.index != t.action.index ||
          s.log_prob_old != t.log_prob_old || s.reward != t.reward || s.c_lane != t.c_lane || s.c_coll != t.c_coll ||
          s.c_swt != t.c_swt || s.value_old != t.value_old || s.done != t.done)
        return false;
    }
  }
  return true;
}

struct Fixture : ::testing::Test {
  TrackMap track = make_obstacle_loop();
  EnvConfig env = [] {
    EnvConfig e;
    e.horizon = 96;
    return e;
  }();
  NetParams policy = make_network(10, {16}, HeadKind::kGaussian2d, 3, 0.5);
  NetParams critic = make_network(10, {16}, HeadKind::kScalarValue, 4, 1.0);
};

using CollectTest = Fixture;

TEST_F(CollectTest, OneWorkerEqualsPlainSequentialRollout) {
  const WorkerSpec spec{1, 3, 17};
  const CollectReport r = collect(track, env, policy, &critic, spec, 5);
  const TrajectoryBuffer seq = rollout_worker(track, env, policy, &critic, seed_stream(17, 0, 5), 3, 0);
  ASSERT_EQ(r.buffers.size(), 1u);
  EXPECT_TRUE(same_buffer(r.buffers[0], seq));
}

TEST_F(CollectTest, FourWorkersEqualSequentialEmulation) {
  const WorkerSpec spec{4, 2, 99};
  const CollectReport r = collect(track, env, policy, &critic, spec, 12);
  ASSERT_EQ(r.buffers.size(), 4u);
  for (int w = 0; w < 4; ++w) {
    const TrajectoryBuffer seq = rollout_worker(track, env, policy, &critic, seed_stream(99, w, 12), 2, 2 * w);
    EXPECT_TRUE(same_buffer(r.buffers[w], seq)) << "worker " << w;
  }
  EXPECT_EQ(r.episodes_total, 8);
  EXPECT_EQ(r.steps_total, r.merged().total_steps());
}

TEST_F(CollectTest, RepeatedCollectionIsIdentical) {
  const WorkerSpec spec{3, 2, 4};
  EXPECT_TRUE(same_buffer(collect(track, env, policy, &critic, spec, 1).merged(),
                          collect(track, env, policy, &critic, spec, 1).merged()));
  EXPECT_FALSE(same_buffer(collect(track, env, policy, &critic, spec, 1).merged(),
                           collect(track, env, policy, &critic, spec, 2).merged()));
}

TEST_F(CollectTest, EpisodesRespectTheHorizon) {
  const CollectReport r = collect(track, env, policy, &critic, {2, 3, 8}, 0);
  for (const auto& b : r.buffers) {
    EXPECT_NO_THROW(b.validate(env.horizon));
    for (const auto& e : b.episodes) {
      EXPECT_LE(static_cast<int>(e.steps.size()), env.horizon);
      EXPECT_TRUE(e.steps.back().done);
      if (e.reason == DoneReason::kOffTrack) EXPECT_EQ(e.bootstrap_value, 0.0);
    }
  }
}

TEST_F(CollectTest, WorkerFailureNamesWorkerAndSeed) {
  const NetParams wrong = make_network(7, {4}, HeadKind::kGaussian2d, 1, 0.5);
  try {
    collect(track, env, wrong, nullptr, {2, 1, 31}, 6);
    FAIL() << "expected CollectionError";
  } catch (const CollectionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("worker 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("base_seed 31"), std::string::npos) << msg;
    EXPECT_NE(msg.find("iteration 6"), std::string::npos) << msg;
  }
}

TEST_F(CollectTest, InvalidSpecRejected) {
  EXPECT_THROW(collect(track, env, policy, &critic, {0, 1, 1}, 0), ArgumentError);
  EXPECT_THROW(collect(track, env, policy, &critic, {1, 0, 1}, 0), ArgumentError);
}

}  // namespace
}  // namespace crllk
