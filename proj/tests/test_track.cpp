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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "crllk/rng.hpp"
#include "crllk/track.hpp"

namespace crllk {
namespace {

constexpr double kPi = std::numbers::pi;

// Walk the segment endpoints directly instead of trusting the map's own
// continuity check.
double walked_residual(const TrackMap& t) {
  const auto& segs = t.segments();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < segs.size(); ++i)
    worst = std::max(worst, norm(segment_end(segs[i]) - segment_start(segs[i + 1])));
  if (t.closed()) worst = std::max(worst, norm(segment_end(segs.back()) - segment_start(segs.front())));
  return worst;
}

TEST(TrackTest, SmallLoopIsFourStraightsAndFourQuarterArcs) {
  const TrackMap t = build_track(TrackSpec::parse("small_loop"));
  ASSERT_EQ(t.segments().size(), 8u);
  int straights = 0, arcs = 0;
  for (const auto& s : t.segments()) {
    if (std::holds_alternative<StraightSegment>(s)) {
      ++straights;
    } else {
      ++arcs;
      EXPECT_NEAR(std::get<ArcSegment>(s).sweep, kPi / 2, 1e-15);
    }
  }
  EXPECT_EQ(straights, 4);
  EXPECT_EQ(arcs, 4);
  EXPECT_TRUE(t.closed());
  EXPECT_LT(walked_residual(t), 1e-9);
  EXPECT_LT(t.continuity_residual(), 1e-9);
}

TEST(TrackTest, LaneLengthMatchesClosedForm) {
  const TrackMap t = make_small_loop();
  // The right lane sits outside the counter-clockwise loop, so its arcs have
  // radius half a tile plus half a lane.
  const double expected = 4 * kTilePitch + 2 * kPi * (0.5 * kTilePitch + 0.5 * kDefaultLaneWidth);
  EXPECT_NEAR(t.lane_length(), expected, 1e-12);
  EXPECT_NEAR(t.road_length(), 4 * kTilePitch + kPi * kTilePitch, 1e-12);
}

TEST(TrackTest, EveryBuiltinSatisfiesInvariants) {
  for (const auto& name : builtin_track_names()) {
    const TrackMap t = build_track(TrackSpec::parse(name));
    EXPECT_LT(walked_residual(t), 1e-9) << name;
    EXPECT_GT(t.lane_width(), 0.0);
    EXPECT_GE(t.road_half_width(), t.lane_width());
    EXPECT_TRUE(std::isfinite(t.lane_length()));
    EXPECT_GT(t.lane_length(), 0.0);
  }
}

TEST(TrackTest, ObstacleLoopAddsObstaclesOnTheRightLane) {
  const TrackMap base = make_small_loop();
  const TrackMap t = make_obstacle_loop();
  ASSERT_GE(t.obstacles().size(), 1u);
  ASSERT_EQ(t.segments().size(), base.segments().size());
  for (std::size_t i = 0; i < t.segments().size(); ++i)
    EXPECT_LT(norm(segment_start(t.segments()[i]) - segment_start(base.segments()[i])), 1e-15);
  for (const auto& o : t.obstacles()) {
    const auto p = t.project(o.center, 0.0);
    EXPECT_LT(std::abs(p.pose.signed_deviation), 0.5 * t.lane_width());
    EXPECT_DOUBLE_EQ(o.radius, 0.04);
  }
}

TEST(TrackTest, GapBetweenSegmentsIsAGeometryError) {
  const std::string text = R"({
  "segments": [
    {"type": "straight", "start": [0, 0], "end": [1, 0]},
    {"type": "straight", "start": [1.01, 0], "end": [2, 0]}
  ],
  "closed": false
})";
  try {
    parse_track(text);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("segment"), std::string::npos);
  }
}

TEST(TrackTest, MalformedFileReportsLine) {
  const std::string text = "{\n  \"segments\": [\n    {\"type\": \"straight\", \"start\": [0, 0], \"end\": [1, 0]},\n"
                           "    {\"type\": \"straight\" \"start\": [1, 0]}\n  ]\n}\n";
  try {
    parse_track(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(TrackTest, SchemaErrorReportsElementLine) {
  const std::string text = "{\n  \"segments\": [\n    {\"type\": \"straight\", \"start\": [0, 0], \"end\": [1, 0]},\n"
                           "    {\"type\": \"spiral\"}\n  ]\n}\n";
  try {
    parse_track(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_NE(std::string(e.what()).find("spiral"), std::string::npos);
  }
}

TEST(TrackTest, JsonRoundTripPreservesGeometry) {
  for (const auto& name : builtin_track_names()) {
    const TrackMap t = build_track(TrackSpec::parse(name));
    const TrackMap u = parse_track(track_to_json(t).dump(2), name);
    ASSERT_EQ(u.segments().size(), t.segments().size());
    EXPECT_DOUBLE_EQ(u.lane_length(), t.lane_length());
    EXPECT_EQ(u.obstacles().size(), t.obstacles().size());
  }
}

TEST(TrackTest, CustomFileLoadsThroughSpec) {
  const auto path = std::filesystem::temp_directory_path() / "crllk_track_test.json";
  {
    std::ofstream out(path);
    out << track_to_json(make_zig_zag()).dump();
  }
  const TrackMap t = build_track(TrackSpec::parse("custom:" + path.string()));
  EXPECT_DOUBLE_EQ(t.lane_length(), make_zig_zag().lane_length());
  std::filesystem::remove(path);
  EXPECT_THROW(build_track(TrackSpec::parse("no_such_track")), ArgumentError);
}

TEST(ProjectPoseTest, OnCenterlineOfStraightIsZero) {
  const TrackMap t = make_small_loop();
  const double s = 0.5 * segment_length(t.lane()[0]);
  const Vec2 p = segment_point(t.lane()[0], s);
  const LanePose pose = project_pose(t, p, 0.0);
  EXPECT_EQ(pose.signed_deviation, 0.0);
  EXPECT_NEAR(pose.progress, s, 1e-12);
}

TEST(ProjectPoseTest, LateralOffsetOnStraight) {
  const TrackMap t = make_small_loop();
  const Vec2 base = segment_point(t.lane()[0], 0.3);
  const Vec2 n = left_normal(segment_tangent(t.lane()[0], 0.3));
  EXPECT_NEAR(project_pose(t, base + 0.05 * n, 0.0).signed_deviation, 0.05, 1e-12);
  EXPECT_NEAR(project_pose(t, base - 0.05 * n, 0.0).signed_deviation, -0.05, 1e-12);
}

TEST(ProjectPoseTest, ArcDeviationMatchesDenseSampling) {
  const TrackMap t = make_small_loop();
  const Segment& arc = t.lane()[1];
  const double L = t.lane_length();
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = rng.uniform(0.0, segment_length(arc));
    const Vec2 c = segment_point(arc, s);
    const Vec2 n = left_normal(segment_tangent(arc, s));
    const Vec2 p = c + rng.uniform(-0.2, 0.2) * n + Vec2{rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)};
    double best = std::numeric_limits<double>::infinity();
    const int samples = 100000;
    for (int k = 0; k < samples; ++k) best = std::min(best, norm(p - t.lane_point(L * k / samples)));
    const LanePose pose = project_pose(t, p, 0.0);
    EXPECT_NEAR(std::abs(pose.signed_deviation), best, 1e-4) << "trial " << trial;
  }
}

TEST(ProjectPoseTest, HeadingErrorIsWrapped) {
  const TrackMap t = make_small_loop();
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p = t.lane_point(rng.uniform(0.0, t.lane_length()));
    const double h = project_pose(t, p, rng.uniform(-20.0, 20.0)).heading_error;
    EXPECT_GT(h, -kPi);
    EXPECT_LE(h, kPi);
  }
}

TEST(ProjectPoseTest, ProgressIsMonotoneAlongTheLane) {
  const TrackMap t = make_zig_zag();
  double prev = -1.0;
  for (int k = 0; k < 2000; ++k) {
    const double s = t.lane_length() * k / 2000.0;
    const double pr = project_pose(t, t.lane_point(s), 0.0).progress;
    EXPECT_GT(pr, prev);
    EXPECT_NEAR(pr, s, 1e-9);
    prev = pr;
  }
}

TEST(ProjectPoseTest, FarAwayIsOffTrack) {
  const TrackMap t = make_small_loop();
  EXPECT_THROW(project_pose(t, {50.0, 50.0}, 0.0), OffTrackError);
}

TEST(ProjectPoseTest, RigidTransformLeavesPoseUnchanged) {
  const TrackMap t = make_zig_zag();
  const double angle = 0.7;
  const Vec2 shift{1.3, -2.1};
  const TrackMap u = t.transformed(angle, shift);
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const double s = rng.uniform(0.0, t.lane_length());
    const Vec2 p = t.lane_point(s) + rng.uniform(-0.15, 0.15) * left_normal(t.lane_tangent(s));
    const double h = rng.uniform(-kPi, kPi);
    const LanePose a = project_pose(t, p, h);
    const LanePose b = project_pose(u, rotate(p, angle) + shift, h + angle);
    EXPECT_NEAR(a.signed_deviation, b.signed_deviation, 1e-9);
    EXPECT_NEAR(a.progress, b.progress, 1e-9);
    EXPECT_NEAR(wrap_angle(a.heading_error - b.heading_error), 0.0, 1e-9);
  }
}

TEST(CollisionTest, CenterlineWithoutObstaclesIsClear) {
  const TrackMap t = make_small_loop();
  for (int k = 0; k < 100; ++k) EXPECT_EQ(collision_indicator(t, t.lane_point(0.01 * k), 0.06), 0);
}

TEST(CollisionTest, DiskOverlapWithObstacle) {
  const TrackMap t = make_small_loop();
  const Vec2 c = t.lane_point(0.3);
  const std::vector<Obstacle> obs = {{c, 0.04, {}}};
  const Vec2 along = t.lane_tangent(0.3);
  EXPECT_EQ(collision_indicator(t, obs, c + 0.0999 * along, 0.06), 1);
  EXPECT_EQ(collision_indicator(t, obs, c + 0.1001 * along, 0.06), 0);
}

TEST(CollisionTest, BoundaryGrazingPose) {
  const TrackMap t = make_small_loop();
  const double r = 0.06;
  for (double s : {0.2, 0.9, 1.7}) {
    const Vec2 n = left_normal(t.lane_tangent(s));
    // Distance to the outer boundary is road_half_width - |signed_deviation|.
    const double edge = t.road_half_width() - r;
    EXPECT_EQ(collision_indicator(t, t.lane_point(s) + (edge - 1e-6) * n, r), 0);
    EXPECT_EQ(collision_indicator(t, t.lane_point(s) + (edge + 1e-6) * n, r), 1);
    EXPECT_EQ(collision_indicator(t, t.lane_point(s) - (edge + 1e-6) * n, r), 1);
  }
}

TEST(LaneSwitchTest, DocumentedCases) {
  EXPECT_EQ(lane_switch_indicator(0.08, 0.12, 0.11, 0.9), 1);
  EXPECT_EQ(lane_switch_indicator(0.0, 0.0, 0.11, 0.9), 0);
  EXPECT_EQ(lane_switch_indicator(0.12, 0.08, 0.11, 0.9), 0);
}

}  // namespace
}  // namespace crllk
