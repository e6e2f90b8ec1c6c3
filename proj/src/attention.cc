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

#include "drvattn/attention.h"

#include <algorithm>
#include <cmath>

#include "drvattn/error.h"

namespace drvattn::attention {
namespace {

constexpr double kDwellTolerance = 1e-9;

double MedianSpacing(const std::vector<double>& times) {
  if (times.size() < 2) return 0.0;
  std::vector<double> d;
  for (std::size_t i = 1; i < times.size(); ++i) d.push_back(times[i] - times[i - 1]);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

}  // namespace

void GatingConfig::Validate() const {
  if (!(fov_half > 0.0) || !(range_fwd > 0.0) || !(range_lat > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "gating limits must be positive");
  }
}

void GazeRegions::Validate() const {
  if (!(fv_half > 0.0) || !(pv_band >= 0.0) || !(pv_weight >= 0.0 && pv_weight <= 1.0) ||
      !(dwell_min >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "invalid gaze region configuration");
  }
}

std::string_view ToString(Region r) {
  switch (r) {
    case Region::kFocus: return "FV";
    case Region::kPeripheral: return "PV";
    case Region::kNone: return "None";
  }
  return "None";
}

bool Gate(EgoPoint p, const GatingConfig& cfg) {
  if (!(p.x_fwd > 0.0) || p.x_fwd > cfg.range_fwd) return false;
  if (std::abs(p.y_lat) > cfg.range_lat) return false;
  return std::abs(geometry::Bearing(p).degrees()) <= cfg.fov_half;
}

SplitResult SplitCases(const geometry::EgoTrajectory& traj, std::span<const Zone> zones,
                       const std::map<int, CaseAnnotation>& annotations,
                       double min_duration) {
  SplitResult result;
  const auto& s = traj.samples();
  for (const Zone& zone : zones) {
    if (zone.polygon.size() < 3) {
      throw Error(ErrorCode::kInvalidInput, "zone '" + zone.name + "' needs >= 3 vertices");
    }
    std::size_t i = 0;
    while (i < s.size()) {
      if (!geometry::PointInPolygon(zone.polygon, {s[i].pose.x, s[i].pose.y})) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < s.size() &&
             geometry::PointInPolygon(zone.polygon, {s[j + 1].pose.x, s[j + 1].pose.y})) {
        ++j;
      }
      if (s[j].t - s[i].t >= min_duration) {
        CaseWindow w;
        w.t0 = s[i].t;
        w.t1 = s[j].t;
        w.zone = zone.name;
        result.cases.push_back(std::move(w));
      } else {
        ++result.discarded_short;
      }
      i = j + 1;
    }
  }
  std::stable_sort(result.cases.begin(), result.cases.end(),
                   [](const CaseWindow& a, const CaseWindow& b) { return a.t0 < b.t0; });
  for (std::size_t k = 0; k < result.cases.size(); ++k) {
    CaseWindow& w = result.cases[k];
    w.case_id = static_cast<int>(k) + 1;
    if (auto it = annotations.find(w.case_id); it != annotations.end()) {
      w.driver_id = it->second.driver_id;
      w.lap = it->second.lap;
    }
  }
  if (result.cases.empty()) {
    result.warnings.push_back("trajectory never stays in any zone for " +
                              std::to_string(min_duration) + " s");
  }
  return result;
}

Region GazeHit(Angle yaw_vehicle, Angle obj_bearing, const GazeRegions& regions) {
  const double d = std::abs((obj_bearing - yaw_vehicle).degrees());
  if (d <= regions.fv_half) return Region::kFocus;
  if (d <= regions.fv_half + regions.pv_band) return Region::kPeripheral;
  return Region::kNone;
}

std::optional<Angle> YawAt(const yawfilter::YawSeries& yaw, double t, double max_gap) {
  const auto& s = yaw.samples;
  if (s.empty() || t < s.front().t || t > s.back().t) return std::nullopt;
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const yawfilter::YawSample& a, double v) { return a.t < v; });
  if (it->t == t) return it->yaw;
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (b.t - a.t > max_gap + 1e-9) return std::nullopt;
  return geometry::LerpAngle(a.yaw, b.yaw, (t - a.t) / (b.t - a.t));
}

std::vector<TrackObservation> ObserveTracks(const yawfilter::YawSeries& yaw,
                                            std::span<const tracker::Track> tracks,
                                            const geometry::EgoTrajectory& traj,
                                            const CaseWindow& window,
                                            const GatingConfig& gating,
                                            const GazeRegions& regions,
                                            double max_gap) {
  const double yaw_period = yawfilter::MedianPeriod(yaw);
  std::vector<TrackObservation> out;
  for (const auto& track : tracks) {
    TrackObservation obs;
    obs.track_id = track.id;
    obs.cls = track.cls;
    std::vector<double> times;
    times.reserve(track.states.size());
    for (const auto& st : track.states) times.push_back(st.t);
    double dwell = MedianSpacing(times);
    if (dwell <= 0.0) dwell = yaw_period;
    bool touches = false;
    for (const auto& st : track.states) {
      if (st.t < window.t0 || st.t > window.t1 || !traj.Contains(st.t)) continue;
      touches = true;
      const geometry::Pose2D pose = geometry::InterpolatePose(traj, st.t);
      const EgoPoint p = geometry::WorldToEgo(pose, {st.x(0), st.x(1)});
      if (!Gate(p, gating)) continue;
      obs.gated = true;
      const std::optional<Angle> y = YawAt(yaw, st.t, max_gap);
      if (!y) continue;
      switch (GazeHit(*y, geometry::Bearing(p), regions)) {
        case Region::kFocus: obs.fv_dwell += dwell; break;
        case Region::kPeripheral: obs.pv_dwell += dwell; break;
        case Region::kNone: break;
      }
    }
    if (!touches) continue;
    if (obs.fv_dwell + kDwellTolerance >= regions.dwell_min && obs.fv_dwell > 0.0) {
      obs.region = Region::kFocus;
    } else if (obs.fv_dwell + obs.pv_dwell + kDwellTolerance >= regions.dwell_min &&
               obs.fv_dwell + obs.pv_dwell > 0.0) {
      obs.region = Region::kPeripheral;
    }
    out.push_back(obs);
  }
  return out;
}

double WeightedScore(double fv, double pv, double pv_weight) {
  return fv + pv_weight * pv;
}

CaseMetrics ComputeCaseMetrics(std::span<const TrackObservation> observations,
                               const GazeRegions& regions) {
  int veh_fv = 0, veh_pv = 0, ped_fv = 0, ped_pv = 0;
  CaseMetrics m;
  for (const auto& o : observations) {
    if (!o.gated) continue;
    const bool veh = o.cls == ObjectClass::kVehicle;
    (veh ? m.n_veh : m.n_ped) += 1;
    if (o.region == Region::kFocus) (veh ? veh_fv : ped_fv) += 1;
    if (o.region == Region::kPeripheral) (veh ? veh_pv : ped_pv) += 1;
  }
  if (m.n_veh + m.n_ped == 0) {
    throw Error(ErrorCode::kEmptyCase, "no gated tracks in case");
  }
  m.veh_absent = m.n_veh == 0;
  m.ped_absent = m.n_ped == 0;
  if (!m.veh_absent) {
    m.veh_fv = static_cast<double>(veh_fv) / m.n_veh;
    m.veh_pv = static_cast<double>(veh_pv) / m.n_veh;
  }
  if (!m.ped_absent) {
    m.ped_fv = static_cast<double>(ped_fv) / m.n_ped;
    m.ped_pv = static_cast<double>(ped_pv) / m.n_ped;
  }
  m.ped_share = static_cast<double>(m.n_ped) / (m.n_veh + m.n_ped);
  m.s_veh = WeightedScore(m.veh_fv, m.veh_pv, regions.pv_weight);
  m.s_ped = WeightedScore(m.ped_fv, m.ped_pv, regions.pv_weight);
  return m;
}

}  // namespace drvattn::attention
