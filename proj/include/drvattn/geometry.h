// Copyright 2026 The drvattn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRVATTN_GEOMETRY_H_
#define DRVATTN_GEOMETRY_H_

#include <span>
#include <vector>

namespace drvattn::geometry {

// Wraps degrees into (-180, 180]. Throws InvalidInput for non-finite input.
double WrapDegrees(double deg);

// An angle in degrees, always held in (-180, 180].
class Angle {
 public:
  constexpr Angle() = default;

  static Angle Degrees(double deg) { return Angle(WrapDegrees(deg)); }
  static Angle Radians(double rad);

  double degrees() const { return deg_; }
  double radians() const;

  // Signed shortest-arc difference a - b.
  friend Angle operator-(Angle a, Angle b) {
    return Degrees(a.deg_ - b.deg_);
  }
  friend Angle operator+(Angle a, Angle b) {
    return Degrees(a.deg_ + b.deg_);
  }
  friend bool operator==(Angle a, Angle b) = default;

 private:
  explicit constexpr Angle(double deg) : deg_(deg) {}
  double deg_ = 0.0;
};

Angle WrapAngle(double deg);

// Shortest-arc interpolation from a to b; f in [0, 1].
Angle LerpAngle(Angle a, Angle b, double f);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Planar pose in the world (UTM-style) frame. Heading is the vehicle
// forward direction, counterclockwise-positive from east.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  Angle heading;
};

struct TimedPose {
  double t = 0.0;
  Pose2D pose;
};

// Vehicle-local point: x forward, y to the left.
struct EgoPoint {
  double x_fwd = 0.0;
  double y_lat = 0.0;
};

class EgoTrajectory {
 public:
  // Requires >= 2 samples with strictly increasing timestamps.
  explicit EgoTrajectory(std::vector<TimedPose> samples);

  const std::vector<TimedPose>& samples() const { return samples_; }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }
  bool Contains(double t) const {
    return t >= start_time() && t <= end_time();
  }

 private:
  std::vector<TimedPose> samples_;
};

// Linear position, shortest-arc heading. Throws OutOfRange outside the
// trajectory time span.
Pose2D InterpolatePose(const EgoTrajectory& traj, double t);

EgoPoint WorldToEgo(const Pose2D& pose, Vec2 world_point);
Vec2 EgoToWorld(const Pose2D& pose, EgoPoint p);

// atan2(y_lat, x_fwd); 0 = straight ahead, positive = left. Throws
// DegenerateBearing at the origin.
Angle Bearing(EgoPoint p);

// Heading rate (deg/s) at each trajectory sample, central differences.
std::vector<double> HeadingRates(const EgoTrajectory& traj);

// Even-odd rule; points on the boundary count as inside.
bool PointInPolygon(std::span<const Vec2> ring, Vec2 p);

}  // namespace drvattn::geometry

#endif  // DRVATTN_GEOMETRY_H_
