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
 * Lane geometry: road centerline primitives, the derived right-lane
 * centerline, obstacles, and the geometric queries used by the simulator.
 *
 * Conventions: travel direction follows segment order; the right lane lies
 * `lane_width / 2` to the right of the road centerline. Signed deviation is
 * measured from the right-lane centerline and is positive toward the road
 * center (to the left of travel). The drivable corridor is modeled as
 * |signed_deviation| <= road_half_width.
 */

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "crllk/errors.hpp"

namespace crllk {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 left_normal(Vec2 t) { return {-t.y, t.x}; }

/// Rotates a vector by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - std::numbers::pi;
}

struct StraightSegment {
  Vec2 start;
  Vec2 end;
};

/// Circular arc; positive sweep turns left (counter-clockwise).
struct ArcSegment {
  Vec2 center;
  double radius = 0.0;
  double start_angle = 0.0;
  double sweep = 0.0;
};

using Segment = std::variant<StraightSegment, ArcSegment>;

inline double segment_length(const Segment& seg) {
  if (const auto* s = std::get_if<StraightSegment>(&seg)) return norm(s->end - s->start);
  const auto& a = std::get<ArcSegment>(seg);
  return a.radius * std::abs(a.sweep);
}

/// Signed curvature, positive for left turns.
inline double segment_curvature(const Segment& seg) {
  if (std::holds_alternative<StraightSegment>(seg)) return 0.0;
  const auto& a = std::get<ArcSegment>(seg);
  return a.sweep > 0.0 ? 1.0 / a.radius : -1.0 / a.radius;
}

inline Vec2 segment_point(const Segment& seg, double s) {
  if (const auto* st = std::get_if<StraightSegment>(&seg)) {
    const double len = norm(st->end - st->start);
    if (len == 0.0) return st->start;
    return st->start + (s / len) * (st->end - st->start);
  }
  const auto& a = std::get<ArcSegment>(seg);
  const double sign = a.sweep > 0.0 ? 1.0 : -1.0;
  return a.center + a.radius * unit_from_angle(a.start_angle + sign * s / a.radius);
}

/// Unit tangent in the direction of travel.
inline Vec2 segment_tangent(const Segment& seg, double s) {
  if (const auto* st = std::get_if<StraightSegment>(&seg)) {
    const Vec2 d = st->end - st->start;
    const double len = norm(d);
    return (1.0 / len) * d;
  }
  const auto& a = std::get<ArcSegment>(seg);
  const double theta = a.start_angle + (a.sweep > 0.0 ? 1.0 : -1.0) * s / a.radius;
  const Vec2 radial = unit_from_angle(theta);
  return a.sweep > 0.0 ? left_normal(radial) : -1.0 * left_normal(radial);
}

inline Vec2 segment_start(const Segment& seg) { return segment_point(seg, 0.0); }
inline Vec2 segment_end(const Segment& seg) { return segment_point(seg, segment_length(seg)); }

/// Closest point on a segment: local arc length and distance.
struct SegmentProjection {
  double local_s = 0.0;
  Vec2 point;
  double distance = 0.0;
};

inline SegmentProjection project_on_segment(const Segment& seg, Vec2 p) {
  if (const auto* st = std::get_if<StraightSegment>(&seg)) {
    const Vec2 d = st->end - st->start;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - st->start, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = st->start + t * d;
    return {t * std::sqrt(len2), q, norm(p - q)};
  }
  const auto& a = std::get<ArcSegment>(seg);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double sweep = std::abs(a.sweep);
  const Vec2 rel = p - a.center;
  double delta = 0.0;
  if (rel.x != 0.0 || rel.y != 0.0) {
    const double phi = std::atan2(rel.y, rel.x);
    delta = a.sweep > 0.0 ? phi - a.start_angle : a.start_angle - phi;
    delta = std::fmod(delta, kTwoPi);
    if (delta < 0.0) delta += kTwoPi;
  }
  if (delta > sweep) {
    const Vec2 ps = segment_point(seg, 0.0);
    const Vec2 pe = segment_point(seg, a.radius * sweep);
    delta = norm(p - ps) <= norm(p - pe) ? 0.0 : sweep;
  }
  const double s = a.radius * delta;
  const Vec2 q = segment_point(seg, s);
  return {s, q, norm(p - q)};
}

/// Parallel curve at `lateral` meters to the left (negative: right).
inline Segment offset_segment(const Segment& seg, double lateral) {
  if (const auto* st = std::get_if<StraightSegment>(&seg)) {
    const Vec2 n = left_normal(segment_tangent(seg, 0.0));
    return StraightSegment{st->start + lateral * n, st->end + lateral * n};
  }
  ArcSegment a = std::get<ArcSegment>(seg);
  // Left turns have the center on the left, so a left offset shrinks them.
  a.radius += a.sweep > 0.0 ? -lateral : lateral;
  if (!(a.radius > 0.0)) throw GeometryError("lane offset produces a non-positive arc radius");
  return a;
}

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
  Vec2 velocity;
};

struct LanePose {
  double signed_deviation = 0.0;
  double heading_error = 0.0;
  double progress = 0.0;
  bool in_right_lane = true;
};

/// Immutable lane map. All queries are const and thread-safe.
class TrackMap {
 public:
  static constexpr double kContinuityTolerance = 1e-9;

  TrackMap(std::string name, std::vector<Segment> segments, double lane_width,
           double road_half_width, std::vector<Obstacle> obstacles, bool closed)
      : name_(std::move(name)),
        segments_(std::move(segments)),
        lane_width_(lane_width),
        road_half_width_(road_half_width),
        obstacles_(std::move(obstacles)),
        closed_(closed) {
    validate();
    cumulative_.reserve(segments_.size() + 1);
    cumulative_.push_back(0.0);
    for (const auto& seg : segments_) {
      lane_.push_back(offset_segment(seg, -0.5 * lane_width_));
      cumulative_.push_back(cumulative_.back() + segment_length(lane_.back()));
    }
    if (!(lane_length() > 0.0) || !std::isfinite(lane_length()))
      throw GeometryError("track length must be positive and finite");
  }

  const std::string& name() const { return name_; }
  const std::vector<Segment>& segments() const { return segments_; }
  /// Right-lane centerline, one primitive per road segment.
  const std::vector<Segment>& lane() const { return lane_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  double lane_width() const { return lane_width_; }
  double road_half_width() const { return road_half_width_; }
  /// Midpoint distance of the right lane.
  double d_center() const { return 0.5 * lane_width_; }
  bool closed() const { return closed_; }
  double lane_length() const { return cumulative_.back(); }

  double road_length() const {
    double total = 0.0;
    for (const auto& seg : segments_) total += segment_length(seg);
    return total;
  }

  /// Largest gap between consecutive segment endpoints (including the
  /// closing joint for loops).
  double continuity_residual() const { return max_gap(segments_, closed_).first; }

  /// Nearest point on the right-lane centerline. `distance` is unsigned.
  struct Projection {
    LanePose pose;
    double distance = 0.0;
  };

  Projection project(Vec2 p, double heading) const {
    std::size_t best = 0;
    SegmentProjection best_proj;
    best_proj.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lane_.size(); ++i) {
      const SegmentProjection sp = project_on_segment(lane_[i], p);
      if (sp.distance < best_proj.distance) {
        best_proj = sp;
        best = i;
      }
    }
    const Vec2 t = segment_tangent(lane_[best], best_proj.local_s);
    const double side = cross(t, p - best_proj.point);
    Projection out;
    out.distance = best_proj.distance;
    out.pose.signed_deviation = side >= 0.0 ? best_proj.distance : -best_proj.distance;
    if (best_proj.distance == 0.0) out.pose.signed_deviation = 0.0;
    out.pose.heading_error = wrap_angle(heading - std::atan2(t.y, t.x));
    out.pose.progress = cumulative_[best] + best_proj.local_s;
    out.pose.in_right_lane = std::abs(out.pose.signed_deviation) <= d_center();
    return out;
  }

  /// Maps arc length to the containing lane primitive; loops wrap.
  std::pair<std::size_t, double> locate(double progress) const {
    if (closed_) {
      progress = std::fmod(progress, lane_length());
      if (progress < 0.0) progress += lane_length();
    } else {
      progress = std::clamp(progress, 0.0, lane_length());
    }
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), progress);
    std::size_t idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= lane_.size()) idx = lane_.size() - 1;
    return {idx, progress - cumulative_[idx]};
  }

  Vec2 lane_point(double progress) const {
    const auto [i, s] = locate(progress);
    return segment_point(lane_[i], s);
  }

  Vec2 lane_tangent(double progress) const {
    const auto [i, s] = locate(progress);
    return segment_tangent(lane_[i], s);
  }

  double lane_curvature(double progress) const {
    return segment_curvature(lane_[locate(progress).first]);
  }

  /// Signed progress change from `from` to `to`, unwrapped across the seam of
  /// a closed loop.
  double progress_delta(double from, double to) const {
    double d = to - from;
    if (closed_) {
      const double half = 0.5 * lane_length();
      if (d > half) d -= lane_length();
      if (d < -half) d += lane_length();
    }
    return d;
  }

  /// Copy with the rigid motion x -> R(angle) x + shift applied to all
  /// geometry and obstacles.
  TrackMap transformed(double angle, Vec2 shift) const {
    std::vector<Segment> segs;
    for (const auto& seg : segments_) {
      if (const auto* st = std::get_if<StraightSegment>(&seg)) {
        segs.emplace_back(StraightSegment{rotate(st->start, angle) + shift, rotate(st->end, angle) + shift});
      } else {
        ArcSegment a = std::get<ArcSegment>(seg);
        a.center = rotate(a.center, angle) + shift;
        a.start_angle += angle;
        segs.emplace_back(a);
      }
    }
    std::vector<Obstacle> obs = obstacles_;
    for (auto& o : obs) {
      o.center = rotate(o.center, angle) + shift;
      o.velocity = rotate(o.velocity, angle);
    }
    return TrackMap(name_, std::move(segs), lane_width_, road_half_width_, std::move(obs), closed_);
  }

 private:
  static std::pair<double, std::size_t> max_gap(const std::vector<Segment>& segs, bool closed) {
    double worst = 0.0;
    std::size_t where = 0;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const double gap = norm(segment_end(segs[i]) - segment_start(segs[i + 1]));
      if (gap > worst) {
        worst = gap;
        where = i;
      }
    }
    if (closed && !segs.empty()) {
      const double gap = norm(segment_end(segs.back()) - segment_start(segs.front()));
      if (gap > worst) {
        worst = gap;
        where = segs.size() - 1;
      }
    }
    return {worst, where};
  }

  void validate() const {
    if (segments_.empty()) throw GeometryError("track has no segments");
    if (!(lane_width_ > 0.0)) throw GeometryError("lane_width must be positive");
    if (!(road_half_width_ >= lane_width_))
      throw GeometryError("road_half_width must be at least lane_width");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (const auto* a = std::get_if<ArcSegment>(&segments_[i])) {
        if (!(a->radius > 0.0) || !(a->sweep != 0.0) || !std::isfinite(a->sweep))
          throw GeometryError("segment " + std::to_string(i) + ": arc needs positive radius and nonzero sweep");
      } else if (!(segment_length(segments_[i]) > 0.0)) {
        throw GeometryError("segment " + std::to_string(i) + ": straight has zero length");
      }
    }
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      if (!(obstacles_[i].radius > 0.0))
        throw GeometryError("obstacle " + std::to_string(i) + ": radius must be positive");
    }
    const auto [gap, where] = max_gap(segments_, closed_);
    if (gap > kContinuityTolerance) {
      const std::size_t next = (where + 1) % segments_.size();
      std::ostringstream os;
      os << "segments are discontinuous: segment " << where << " ends " << gap
         << " m away from the start of segment " << next;
      throw GeometryError(os.str());
    }
  }

  std::string name_;
  std::vector<Segment> segments_;
  std::vector<Segment> lane_;
  std::vector<double> cumulative_;
  double lane_width_;
  double road_half_width_;
  std::vector<Obstacle> obstacles_;
  bool closed_;
};

// ---------------------------------------------------------------------------
// Built-in maps

inline constexpr double kTilePitch = 0.585;
inline constexpr double kDefaultLaneWidth = 0.22;
inline constexpr double kDefaultRoadHalfWidth = 0.25;
inline constexpr double kObstacleRadius = 0.04;

namespace detail {

/// Incremental builder: appends straights and arcs tangent to the current
/// heading.
class Turtle {
 public:
  Turtle(Vec2 start, double heading) : pos_(start), heading_(heading) {}

  Turtle& straight(double length) {
    const Vec2 end = pos_ + length * unit_from_angle(heading_);
    segments_.emplace_back(StraightSegment{pos_, end});
    pos_ = end;
    return *this;
  }

  /// Positive sweep is a left turn.
  Turtle& arc(double radius, double sweep) {
    const Vec2 n = left_normal(unit_from_angle(heading_));
    ArcSegment a;
    a.radius = radius;
    a.sweep = sweep;
    if (sweep > 0.0) {
      a.center = pos_ + radius * n;
      a.start_angle = heading_ - 0.5 * std::numbers::pi;
    } else {
      a.center = pos_ - radius * n;
      a.start_angle = heading_ + 0.5 * std::numbers::pi;
    }
    segments_.emplace_back(a);
    pos_ = segment_end(segments_.back());
    heading_ += sweep;
    return *this;
  }

  std::vector<Segment> take() { return std::move(segments_); }

 private:
  Vec2 pos_;
  double heading_;
  std::vector<Segment> segments_;
};

}  // namespace detail

/// 3x3-tile ring driven counter-clockwise: four one-tile straights joined by
/// quarter arcs of radius half a tile.
inline TrackMap make_small_loop() {
  constexpr double t = kTilePitch;
  constexpr double q = 0.5 * std::numbers::pi;
  detail::Turtle turtle({0.5 * t, 0.0}, 0.0);
  for (int i = 0; i < 4; ++i) turtle.straight(t).arc(0.5 * t, q);
  return TrackMap("small_loop", turtle.take(), kDefaultLaneWidth, kDefaultRoadHalfWidth, {}, true);
}

/// S-shaped loop on a 5x3 tile grid: five left turns and one right turn.
inline TrackMap make_zig_zag() {
  constexpr double t = kTilePitch;
  constexpr double q = 0.5 * std::numbers::pi;
  constexpr double r = 0.5 * t;
  detail::Turtle turtle({0.5 * t, 0.0}, 0.0);
  turtle.straight(3.0 * t).arc(r, q).straight(t).arc(r, q).straight(t).arc(r, q).arc(r, -q)
      .straight(t).arc(r, q).arc(r, q);
  return TrackMap("zig_zag", turtle.take(), kDefaultLaneWidth, kDefaultRoadHalfWidth, {}, true);
}

/// Small loop with two static obstacles on the right-lane centerline, at the
/// midpoints of the first and third straights.
inline TrackMap make_obstacle_loop() {
  const TrackMap base = make_small_loop();
  std::vector<Obstacle> obstacles;
  for (std::size_t seg : {std::size_t{0}, std::size_t{4}}) {
    const Segment& lane = base.lane()[seg];
    obstacles.push_back({segment_point(lane, 0.5 * segment_length(lane)), kObstacleRadius, {}});
  }
  std::vector<Segment> segs = base.segments();
  return TrackMap("obstacle_loop", std::move(segs), base.lane_width(), base.road_half_width(),
                  std::move(obstacles), true);
}

inline const std::vector<std::string>& builtin_track_names() {
  static const std::vector<std::string> names = {"small_loop", "zig_zag", "obstacle_loop"};
  return names;
}

// ---------------------------------------------------------------------------
// Track files

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line numbers of the elements of the top-level array `key`, in order.
/// Only used to decorate error messages, so it tolerates odd input.
inline std::vector<int> array_element_lines(const std::string& text, const std::string& key) {
  std::vector<int> lines;
  int depth = 0;
  int line = 1;
  bool in_string = false;
  std::string current;
  std::string last_key;
  bool in_target = false;
  int target_depth = 0;
  bool expect_element = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') ++line;
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
        if (depth == 1) last_key = current;
      } else {
        current.push_back(c);
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (in_target && expect_element && depth == target_depth && c != ']') {
      lines.push_back(line);
      expect_element = false;
    }
    switch (c) {
      case '"':
        in_string = true;
        current.clear();
        break;
      case '{':
      case '[':
        if (c == '[' && depth == 1 && last_key == key && !in_target) {
          in_target = true;
          target_depth = depth + 1;
          expect_element = true;
        }
        ++depth;
        break;
      case '}':
      case ']':
        --depth;
        if (in_target && depth < target_depth) in_target = false;
        break;
      case ',':
        if (in_target && depth == target_depth) expect_element = true;
        break;
      default:
        break;
    }
  }
  return lines;
}

inline Vec2 parse_vec2(const nlohmann::json& j, const char* field, int line) {
  if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'", line);
  const auto& v = j.at(field);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ParseError(std::string("field '") + field + "' must be [x, y]", line);
  return {v[0].get<double>(), v[1].get<double>()};
}

inline double parse_number(const nlohmann::json& j, const char* field, int line) {
  if (!j.contains(field)) throw ParseError(std::string("missing field '") + field + "'", line);
  if (!j.at(field).is_number()) throw ParseError(std::string("field '") + field + "' must be a number", line);
  return j.at(field).get<double>();
}

inline nlohmann::json vec2_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

}  // namespace detail

/// Parses the JSON track format. Errors carry the line of the offending
/// element where it can be located.
inline TrackMap parse_track(const std::string& text, const std::string& name = "custom") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed track JSON: ") + e.what(),
                     detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ParseError("track file must hold a JSON object", 1);
  if (!doc.contains("segments") || !doc["segments"].is_array())
    throw ParseError("missing array 'segments'", 1);
  const std::vector<int> seg_lines = detail::array_element_lines(text, "segments");
  const std::vector<int> obs_lines = detail::array_element_lines(text, "obstacles");
  auto line_at = [](const std::vector<int>& lines, std::size_t i) {
    return i < lines.size() ? lines[i] : 0;
  };

  std::vector<Segment> segments;
  for (std::size_t i = 0; i < doc["segments"].size(); ++i) {
    const auto& s = doc["segments"][i];
    const int line = line_at(seg_lines, i);
    if (!s.is_object() || !s.contains("type") || !s["type"].is_string())
      throw ParseError("segment " + std::to_string(i) + " needs a string 'type'", line);
    const std::string type = s["type"].get<std::string>();
    if (type == "straight") {
      segments.emplace_back(StraightSegment{detail::parse_vec2(s, "start", line), detail::parse_vec2(s, "end", line)});
    } else if (type == "arc") {
      ArcSegment a;
      a.center = detail::parse_vec2(s, "center", line);
      a.radius = detail::parse_number(s, "radius", line);
      a.start_angle = detail::parse_number(s, "start_angle", line);
      a.sweep = detail::parse_number(s, "sweep", line);
      segments.emplace_back(a);
    } else {
      throw ParseError("segment " + std::to_string(i) + ": unknown type '" + type + "'", line);
    }
  }
  std::vector<Obstacle> obstacles;
  if (doc.contains("obstacles")) {
    if (!doc["obstacles"].is_array()) throw ParseError("'obstacles' must be an array", 1);
    for (std::size_t i = 0; i < doc["obstacles"].size(); ++i) {
      const auto& o = doc["obstacles"][i];
      const int line = line_at(obs_lines, i);
      Obstacle ob;
      ob.center = detail::parse_vec2(o, "center", line);
      ob.radius = detail::parse_number(o, "radius", line);
      if (o.contains("velocity")) ob.velocity = detail::parse_vec2(o, "velocity", line);
      obstacles.push_back(ob);
    }
  }
  const double lane_width = doc.contains("lane_width") ? detail::parse_number(doc, "lane_width", 1) : kDefaultLaneWidth;
  const double rhw = doc.contains("road_half_width") ? detail::parse_number(doc, "road_half_width", 1) : kDefaultRoadHalfWidth;
  bool closed = false;
  if (doc.contains("closed")) {
    if (!doc["closed"].is_boolean()) throw ParseError("'closed' must be a boolean", 1);
    closed = doc["closed"].get<bool>();
  }
  const std::string track_name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : name;
  return TrackMap(track_name, std::move(segments), lane_width, rhw, std::move(obstacles), closed);
}

inline nlohmann::json track_to_json(const TrackMap& track) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : track.segments()) {
    if (const auto* st = std::get_if<StraightSegment>(&seg)) {
      segs.push_back({{"type", "straight"}, {"start", detail::vec2_json(st->start)}, {"end", detail::vec2_json(st->end)}});
    } else {
      const auto& a = std::get<ArcSegment>(seg);
      segs.push_back({{"type", "arc"},
                      {"center", detail::vec2_json(a.center)},
                      {"radius", a.radius},
                      {"start_angle", a.start_angle},
                      {"sweep", a.sweep}});
    }
  }
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : track.obstacles())
    obs.push_back({{"center", detail::vec2_json(o.center)}, {"radius", o.radius}, {"velocity", detail::vec2_json(o.velocity)}});
  return {{"name", track.name()},
          {"segments", segs},
          {"lane_width", track.lane_width()},
          {"road_half_width", track.road_half_width()},
          {"obstacles", obs},
          {"closed", track.closed()}};
}

/// Track selector: a built-in name, or `custom:<path>` / a path to a JSON file.
struct TrackSpec {
  std::string name;
  std::string path;

  static TrackSpec parse(const std::string& s) {
    if (s.rfind("custom:", 0) == 0) return {"custom", s.substr(7)};
    if (s.size() > 5 && s.substr(s.size() - 5) == ".json") return {"custom", s};
    return {s, {}};
  }

  std::string to_string() const { return name == "custom" ? "custom:" + path : name; }
};

inline TrackMap build_track(const TrackSpec& spec) {
  if (spec.name == "small_loop") return make_small_loop();
  if (spec.name == "zig_zag") return make_zig_zag();
  if (spec.name == "obstacle_loop") return make_obstacle_loop();
  if (spec.name == "custom") {
    std::ifstream in(spec.path);
    if (!in) throw ParseError("cannot open track file '" + spec.path + "'", 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_track(ss.str(), spec.path);
  }
  throw ArgumentError("unknown track '" + spec.name + "'");
}

// ---------------------------------------------------------------------------
// Queries

/// Pose of `position` relative to the nearest right-lane centerline point.
/// Throws OffTrackError beyond road_half_width + 1 m.
inline LanePose project_pose(const TrackMap& track, Vec2 position, double heading) {
  const auto proj = track.project(position, heading);
  if (proj.distance > track.road_half_width() + 1.0) {
    std::ostringstream os;
    os << "position (" << position.x << ", " << position.y << ") is " << proj.distance
       << " m from the lane centerline";
    throw OffTrackError(os.str());
  }
  return proj.pose;
}

/// 1 when the bot disk overlaps an obstacle disk or crosses the road edge.
inline int collision_indicator(const TrackMap& track, const std::vector<Obstacle>& obstacles,
                               Vec2 position, double bot_radius) {
  for (const auto& o : obstacles) {
    if (norm(position - o.center) < bot_radius + o.radius) return 1;
  }
  const auto proj = track.project(position, 0.0);
  return std::abs(proj.pose.signed_deviation) + bot_radius > track.road_half_width() ? 1 : 0;
}

inline int collision_indicator(const TrackMap& track, Vec2 position, double bot_radius) {
  return collision_indicator(track, track.obstacles(), position, bot_radius);
}

/// 1 when the deviation magnitude rises through beta * d_center.
inline int lane_switch_indicator(double prev_dev, double curr_dev, double d_center, double beta) {
  const double threshold = beta * d_center;
  return (prev_dev < threshold && curr_dev > threshold) ? 1 : 0;
}

}  // namespace crllk
