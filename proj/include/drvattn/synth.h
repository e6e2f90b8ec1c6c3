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

#ifndef DRVATTN_SYNTH_H_
#define DRVATTN_SYNTH_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drvattn/attention.h"
#include "drvattn/classify.h"
#include "drvattn/geometry.h"
#include "drvattn/headpose.h"
#include "drvattn/tracker.h"
#include "drvattn/yawfilter.h"

// Synthetic scenarios with full ground truth: a looping drive through a
// T-junction, objects around the junction, noisy detections with misses and
// clutter, gaze traces and rendered facial landmarks.
namespace drvattn::synth {

using geometry::Vec2;
using tracker::ObjectClass;

// Rounded-rectangle loop. The lap starts at (0, -block/2) heading north and
// turns right at the junction at the origin. The analysis zone is the
// square of half-width zone_half around the junction.
struct LoopGeometry {
  double block = 80.0;         // m, side of the loop
  double corner_radius = 10.0; // m
  double speed = 5.0;          // m/s
  double zone_half = 30.0;     // m
  void Validate() const;
};

double LapLength(const LoopGeometry& g);
double LapDuration(const LoopGeometry& g);
// Pose at arc length s along the lap (s wraps modulo the lap length).
geometry::Pose2D LapPose(const LoopGeometry& g, double s);
std::vector<attention::Zone> JunctionZones(const LoopGeometry& g);

struct ObjectSpec {
  int id = 0;
  ObjectClass cls = ObjectClass::kVehicle;
  double spawn_t = 0.0;
  double despawn_t = 0.0;
  Vec2 start;     // position at spawn_t
  Vec2 velocity;  // m/s
  bool Alive(double t) const { return t >= spawn_t && t <= despawn_t; }
  Vec2 PositionAt(double t) const;
};

struct SensorSpec {
  double rate_hz = 10.0;
  double p_detect = 0.95;
  double clutter_rate = 0.1;  // mean false alarms per scan, over the gating region
  double meas_noise = 0.2;    // m, per axis
  double range = 35.0;        // m, detection radius around the ego
  double confidence = 0.9;
  double clutter_confidence = 0.5;
  void Validate() const;
};

enum class GazeProfile { kAttentive, kInattentive, kScripted };

struct Glance {
  int object_index = 0;  // index into the lap roster
  double delay = 0.0;    // s after the object is first gated
  double dwell = 0.3;    // s
};

struct GazeSpec {
  GazeProfile profile = GazeProfile::kAttentive;
  std::vector<Glance> script;
  double glance_s = 0.8;           // attentive glance length
  double min_glance_s = 0.4;       // shorter gated windows are skipped
  double baseline_sigma_deg = 2.0; // forward gaze jitter, marginal
  double baseline_correlation = 0.8;  // lag-1, per camera sample
  double glance_sigma_deg = 0.5;
};

GazeSpec AttentiveGaze();
GazeSpec InattentiveGaze();

struct CameraSpec {
  headpose::CameraIntrinsics intrinsics{800.0, 800.0, 320.0, 240.0, 0.0, 0.0, 0.0, 0.0};
  headpose::FaceTemplate face;
  double depth_m = 0.6;
  headpose::YawMapping mapping{-1, 8.0};
  double rate_hz = 10.0;
  double noise_px = 0.5;
  double outlier_rate = 0.0;
  double pitch_deg = 10.0;  // camera mounted below eye level
  double pose_sigma_deg = 1.0;  // pitch and roll jitter
  double width_px = 640.0;
  double height_px = 480.0;
  void Validate() const;
};

struct RosterSpec {
  int min_vehicles = 3;
  int max_vehicles = 5;
  int min_pedestrians = 1;
  int max_pedestrians = 3;
  double min_lateral = 5.0;  // m, ego-frame offset at placement
  double max_lateral = 9.0;
  double min_gated_s = 1.2;
  double min_bearing_deg = 15.0;
  double min_separation = 5.0;
};

struct LapSpec {
  std::string driver_id = "A";
  int lap = 1;
  GazeSpec gaze;
  std::uint64_t scene_seed = 0;
  // Explicit roster with times relative to the lap start; generated from
  // scene_seed when empty.
  std::vector<ObjectSpec> objects;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  LoopGeometry geometry;
  double ego_rate_hz = 100.0;
  SensorSpec sensor;
  CameraSpec camera;
  RosterSpec roster;
  attention::GatingConfig gating;
  attention::GazeRegions regions;
  std::vector<LapSpec> laps;
  void Validate() const;
};

struct SynthDetection {
  tracker::Detection world;
  geometry::EgoPoint ego;
  int truth_id = -1;  // -1 for clutter
};

struct ObjectTruth {
  int object_id = 0;
  int lap_index = 0;
  double gated_s = 0.0;
  double fv_dwell_s = 0.0;
  double glance_s = 0.0;  // scheduled glance time while gated
  bool observed = false;  // fv_dwell_s >= dwell_min
};

struct HeadTruth {
  double t = 0.0;
  double yaw_cam_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
};

struct Scenario {
  ScenarioSpec spec;
  geometry::EgoTrajectory trajectory{{{0.0, {}}, {1.0, {}}}};
  std::vector<ObjectSpec> objects;  // absolute times
  std::vector<SynthDetection> detections;
  std::size_t clutter_count = 0;
  yawfilter::YawSeries true_yaw;  // vehicle frame
  std::vector<HeadTruth> head;
  std::vector<headpose::LandmarkFrame> landmarks;
  std::vector<double> corrupted_times;
  std::vector<ObjectTruth> object_truth;
  std::vector<attention::Zone> zones;
  std::map<int, attention::CaseAnnotation> annotations;
};

// Forward camera model: template corners under head rotation r_head (model
// frame rotated by the frontal pose), placed depth_m in front of the camera.
headpose::Quad ProjectTemplate(const headpose::FaceTemplate& face,
                               const headpose::CameraIntrinsics& k,
                               const Eigen::Matrix3d& r_head, double depth_m);

std::vector<headpose::LandmarkFrame> RenderLandmarks(
    std::span<const HeadTruth> truth, const headpose::FaceTemplate& face,
    const headpose::CameraIntrinsics& k, double depth_m, double noise_px,
    double outlier_rate, std::uint64_t seed, std::vector<double>* corrupted_times,
    double width_px = 640.0, double height_px = 480.0);

Scenario Generate(const ScenarioSpec& spec);

// Presets.
ScenarioSpec AttentivePreset(std::uint64_t seed, int laps = 3);
ScenarioSpec InattentivePreset(std::uint64_t seed, int laps = 3);
// pairs attentive laps followed by the same scenes driven inattentively.
ScenarioSpec PairedCohortPreset(std::uint64_t seed, int pairs = 12);
// Seven drivers, three laps each; five degrade after lap 1, two stay
// attentive.
ScenarioSpec LapDriftPreset(std::uint64_t seed);
// One lap, one vehicle and one pedestrian, with a pedestrian glance landing
// 1.67 s after it enters the field of view.
ScenarioSpec ScriptedPreset(std::uint64_t seed);
ScenarioSpec PresetByName(const std::string& name, std::uint64_t seed);

// Constant-velocity multi-target scenes for tracker evaluation.
struct CvTarget {
  Vec2 start;
  Vec2 velocity;
};

struct CvScene {
  std::vector<double> times;
  std::vector<std::vector<Vec2>> truth;         // per scan
  std::vector<std::vector<Vec2>> measurements;  // per scan
  std::vector<std::vector<int>> truth_ids;      // -1 for clutter
  std::size_t clutter_count = 0;
};

struct CvSceneSpec {
  std::vector<CvTarget> targets;
  int scans = 50;
  double dt = 0.1;
  double p_detect = 1.0;
  double meas_noise = 0.0;
  double clutter_rate = 0.0;
  Vec2 region_min{-50.0, -50.0};
  Vec2 region_max{50.0, 50.0};
  std::uint64_t seed = 1;
};

CvScene GenerateCvScene(const CvSceneSpec& spec);

// Metrics-level cohort drawn from the published observation ranges.
struct CohortCase {
  attention::CaseMetrics metrics;
  classify::Attention attention = classify::Attention::kRegular;
  classify::Scenario scenario = classify::Scenario::kI;
};

struct CohortSpec {
  std::uint64_t seed = 1;
  int low_scenario1 = 6;
  int low_scenario2 = 4;
  int regular_scenario1 = 9;
  int regular_scenario2 = 6;
  double scenario1_ped_share_max = 0.05;
  double scenario2_ped_share_min = 0.05;
  double scenario2_ped_share_max = 0.45;
  double low_veh_max = 0.20;
  double regular_veh_min = 0.30;
  double regular_veh_max = 0.60;
  double regular_ped_max = 0.25;
  double low_ped_max = 0.25;
  double low_scenario1_ped_max = 0.05;
};

std::vector<CohortCase> GenerateCohort(const CohortSpec& spec);

}  // namespace drvattn::synth

#endif  // DRVATTN_SYNTH_H_
