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

#ifndef DRVATTN_ATTENTION_H_
#define DRVATTN_ATTENTION_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drvattn/geometry.h"
#include "drvattn/tracker.h"
#include "drvattn/yawfilter.h"

namespace drvattn::attention {

using geometry::Angle;
using geometry::EgoPoint;
using geometry::Vec2;
using tracker::ObjectClass;

// Driver-relevant field around the ego vehicle.
struct GatingConfig {
  double fov_half = 45.0;   // degrees
  double range_fwd = 15.0;  // meters
  double range_lat = 10.0;  // meters

  void Validate() const;
};

// Focus vision is |yaw - bearing| <= fv_half; peripheral vision is the band
// of width pv_band beyond it on each side.
struct GazeRegions {
  double fv_half = 5.0;
  double pv_band = 5.0;
  double pv_weight = 0.5;
  double dwell_min = 0.2;  // seconds

  void Validate() const;
};

enum class Region { kNone, kPeripheral, kFocus };

std::string_view ToString(Region r);

struct Zone {
  std::string name;
  std::vector<Vec2> polygon;
};

struct CaseAnnotation {
  std::string driver_id;
  int lap = 0;
};

struct CaseWindow {
  int case_id = 0;
  std::string driver_id;
  int lap = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string zone;
};

struct CaseMetrics {
  int n_veh = 0;
  int n_ped = 0;
  double veh_fv = 0.0;
  double veh_pv = 0.0;
  double ped_fv = 0.0;
  double ped_pv = 0.0;
  double ped_share = 0.0;
  double s_veh = 0.0;
  double s_ped = 0.0;
  bool veh_absent = false;
  bool ped_absent = false;
};

struct TrackObservation {
  int track_id = 0;
  ObjectClass cls = ObjectClass::kVehicle;
  bool gated = false;
  double fv_dwell = 0.0;
  double pv_dwell = 0.0;
  Region region = Region::kNone;
};

// 0 < x_fwd <= range_fwd, |y_lat| <= range_lat, |bearing| <= fov_half.
bool Gate(EgoPoint p, const GatingConfig& cfg);

struct SplitResult {
  std::vector<CaseWindow> cases;  // ordered by t0, ids from 1
  std::size_t discarded_short = 0;
  std::vector<std::string> warnings;
};

// One case per maximal run of trajectory samples inside a zone polygon;
// runs shorter than min_duration seconds are discarded.
SplitResult SplitCases(const geometry::EgoTrajectory& traj, std::span<const Zone> zones,
                       const std::map<int, CaseAnnotation>& annotations,
                       double min_duration = 3.0);

Region GazeHit(Angle yaw_vehicle, Angle obj_bearing, const GazeRegions& regions);

// Yaw at t, interpolated between neighbors no more than max_gap apart;
// nullopt inside open gaps or outside the series.
std::optional<Angle> YawAt(const yawfilter::YawSeries& yaw, double t, double max_gap);

// Accumulates per-track FV/PV dwell over the gated states inside the case.
// Each state counts for the track's median state spacing.
std::vector<TrackObservation> ObserveTracks(const yawfilter::YawSeries& yaw,
                                            std::span<const tracker::Track> tracks,
                                            const geometry::EgoTrajectory& traj,
                                            const CaseWindow& window,
                                            const GatingConfig& gating,
                                            const GazeRegions& regions,
                                            double max_gap);

double WeightedScore(double fv, double pv, double pv_weight);

// Per-track fractions over gated tracks. Throws EmptyCase when no track
// was gated.
CaseMetrics ComputeCaseMetrics(std::span<const TrackObservation> observations,
                               const GazeRegions& regions);

}  // namespace drvattn::attention

#endif  // DRVATTN_ATTENTION_H_
