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

#include "drvattn/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "drvattn/error.h"

namespace drvattn::geometry {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void CheckFinite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + " is not finite");
  }
}

}  // namespace

double WrapDegrees(double deg) {
  CheckFinite(deg, "angle");
  if (deg > -180.0 && deg <= 180.0) return deg;
  double r = std::fmod(deg + 180.0, 360.0);
  if (r <= 0.0) r += 360.0;
  return r - 180.0;
}

Angle Angle::Radians(double rad) { return Degrees(rad * kDegPerRad); }

double Angle::radians() const { return deg_ / kDegPerRad; }

Angle WrapAngle(double deg) { return Angle::Degrees(deg); }

Angle LerpAngle(Angle a, Angle b, double f) {
  const double delta = (b - a).degrees();
  return Angle::Degrees(a.degrees() + f * delta);
}

EgoTrajectory::EgoTrajectory(std::vector<TimedPose> samples)
    : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "trajectory needs at least 2 samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    CheckFinite(s.t, "trajectory timestamp");
    CheckFinite(s.pose.x, "trajectory x");
    CheckFinite(s.pose.y, "trajectory y");
    if (i > 0 && !(s.t > samples_[i - 1].t)) {
      throw Error(ErrorCode::kInvalidInput,
                  "trajectory timestamps not strictly increasing at index " +
                      std::to_string(i));
    }
  }
}

Pose2D InterpolatePose(const EgoTrajectory& traj, double t) {
  const auto& s = traj.samples();
  if (!std::isfinite(t) || t < s.front().t || t > s.back().t) {
    throw Error(ErrorCode::kOutOfRange,
                "time " + std::to_string(t) + " outside trajectory [" +
                    std::to_string(s.front().t) + ", " +
                    std::to_string(s.back().t) + "]");
  }
  auto it = std::upper_bound(
      s.begin(), s.end(), t,
      [](double v, const TimedPose& p) { return v < p.t; });
  if (it == s.end()) return s.back().pose;
  const TimedPose& b = *it;
  const TimedPose& a = *(it - 1);
  if (t == a.t) return a.pose;
  const double f = (t - a.t) / (b.t - a.t);
  Pose2D out;
  out.x = a.pose.x + f * (b.pose.x - a.pose.x);
  out.y = a.pose.y + f * (b.pose.y - a.pose.y);
  out.heading = LerpAngle(a.pose.heading, b.pose.heading, f);
  return out;
}

EgoPoint WorldToEgo(const Pose2D& pose, Vec2 world_point) {
  const double dx = world_point.x - pose.x;
  const double dy = world_point.y - pose.y;
  const double c = std::cos(pose.heading.radians());
  const double s = std::sin(pose.heading.radians());
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 EgoToWorld(const Pose2D& pose, EgoPoint p) {
  const double c = std::cos(pose.heading.radians());
  const double s = std::sin(pose.heading.radians());
  return {pose.x + c * p.x_fwd - s * p.y_lat,
          pose.y + s * p.x_fwd + c * p.y_lat};
}

Angle Bearing(EgoPoint p) {
  CheckFinite(p.x_fwd, "x_fwd");
  CheckFinite(p.y_lat, "y_lat");
  if (p.x_fwd == 0.0 && p.y_lat == 0.0) {
    throw Error(ErrorCode::kDegenerateBearing, "bearing of the ego origin");
  }
  return Angle::Degrees(std::atan2(p.y_lat, p.x_fwd) * kDegPerRad);
}

std::vector<double> HeadingRates(const EgoTrajectory& traj) {
  const auto& s = traj.samples();
  std::vector<double> rates(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == s.size() ? i : i + 1;
    rates[i] = (s[hi].pose.heading - s[lo].pose.heading).degrees() /
               (s[hi].t - s[lo].t);
  }
  return rates;
}

bool PointInPolygon(std::span<const Vec2> ring, Vec2 p) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    // Boundary check: collinear and within the segment's box.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (std::abs(cross) <= 1e-12 * (1.0 + std::abs(b.x - a.x) + std::abs(b.y - a.y)) &&
        p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
        p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace drvattn::geometry
