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

#ifndef DRVATTN_TRACKER_H_
#define DRVATTN_TRACKER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "drvattn/geometry.h"

// Gaussian-mixture PHD filter over centroid detections in the world frame,
// with a constant-velocity motion model (state [x, y, vx, vy]) and post-hoc
// nearest-neighbor linking of extracted estimates into identity-stable
// tracks.
namespace drvattn::tracker {

using geometry::Vec2;

enum class ObjectClass { kVehicle, kPedestrian };

std::string_view ToString(ObjectClass c);
// Accepts "vehicle" / "pedestrian"; throws ParseError otherwise.
ObjectClass ParseObjectClass(std::string_view s);

struct Detection {
  double t = 0.0;
  ObjectClass cls = ObjectClass::kVehicle;
  Vec2 position;  // world frame, meters
  double confidence = 1.0;
};

struct GaussianComponent {
  double weight = 0.0;
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
};

using Mixture = std::vector<GaussianComponent>;

struct GmphdParams {
  double p_survival = 0.99;
  double p_detect = 0.9;
  double clutter_density = 1e-4;     // per m^2 per scan
  double process_noise_accel = 1.0;  // m/s^2
  double meas_noise = 0.5;           // m
  double prune_threshold = 1e-5;
  double merge_threshold = 4.0;  // Mahalanobis^2
  int max_components = 100;
  double birth_weight = 0.05;
  Eigen::Matrix4d birth_cov = Eigen::Vector4d(4.0, 4.0, 4.0, 4.0).asDiagonal();
  double extract_threshold = 0.5;
  bool adaptive_birth = true;

  // Track linking.
  double link_gate = 9.21;  // chi^2, 2 dof, 99%
  int max_missed_scans = 3;
  int min_track_states = 3;
  double min_confidence = 0.3;

  static GmphdParams Vehicle();
  static GmphdParams Pedestrian();
  void Validate() const;
};

Eigen::Matrix4d TransitionMatrix(double dt);
Eigen::Matrix4d ProcessNoise(double dt, double accel);

// Survival-weighted constant-velocity prediction, plus one birth component
// per birth source (the previous scan's measurements) when adaptive birth
// is enabled.
Mixture Predict(const Mixture& mixture, const GmphdParams& params, double dt,
                std::span<const Vec2> birth_sources = {});

// Standard GM-PHD measurement update. Throws ScanFailure if an innovation
// covariance cannot be factorized after symmetrization and jitter.
Mixture Update(const Mixture& predicted, std::span<const Vec2> measurements,
               const GmphdParams& params);

// Prune below prune_threshold, greedily merge around the strongest
// remaining component, cap at max_components.
Mixture PruneMerge(const Mixture& mixture, const GmphdParams& params);

double ExpectedCount(const Mixture& mixture);

struct ScanMixture {
  double t = 0.0;
  Mixture mixture;
};

enum class Provenance { kExtracted, kCoasted };

struct TrackState {
  double t = 0.0;
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
  Provenance provenance = Provenance::kExtracted;
};

struct Track {
  int id = 0;
  ObjectClass cls = ObjectClass::kVehicle;
  std::vector<TrackState> states;
};

// Per-scan components above extract_threshold become estimates; estimates
// are linked greedily by Mahalanobis distance under link_gate. Tracks
// unmatched for more than max_missed_scans scans are closed; re-linked
// tracks receive coasted states for the scans they missed. Tracks with
// fewer than min_track_states extracted states are dropped.
std::vector<Track> ExtractTracks(std::span<const ScanMixture> scans,
                                 const GmphdParams& params, ObjectClass cls,
                                 int first_id = 1);

// Runs one class through predict / update / prune-merge per scan.
class GmphdFilter {
 public:
  explicit GmphdFilter(GmphdParams params);

  // Seeds the intensity (used when births are disabled).
  void SetMixture(Mixture mixture, double t);

  // Advances to time t (must be later than the previous scan) and
  // incorporates the scan's measurements. Returns false if the update
  // failed and the scan was carried forward by prediction only.
  bool Step(double t, std::span<const Vec2> measurements);

  const Mixture& mixture() const { return mixture_; }
  double time() const { return time_; }
  bool started() const { return started_; }

 private:
  GmphdParams params_;
  Mixture mixture_;
  std::vector<Vec2> previous_measurements_;
  double time_ = 0.0;
  bool started_ = false;
};

struct SceneResult {
  std::vector<Track> tracks;  // vehicles first, then pedestrians
  std::vector<double> scan_times;
  std::size_t detections_in = 0;
  std::size_t detections_low_confidence = 0;
  std::size_t scans_inserted = 0;
  std::vector<std::string> warnings;
};

// Groups detections into scans (shared timestamps), inserts empty scans
// where the timeline skips more than 1.5 nominal periods, and runs each
// class independently. Track ids are unique across classes.
SceneResult TrackScene(std::span<const Detection> detections,
                       const GmphdParams& vehicle_params,
                       const GmphdParams& pedestrian_params);

}  // namespace drvattn::tracker

#endif  // DRVATTN_TRACKER_H_
