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

#ifndef DRVATTN_HEADPOSE_H_
#define DRVATTN_HEADPOSE_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drvattn/geometry.h"

// Head orientation from four coplanar facial landmarks: undistortion,
// a minimal four-point homography, and the closed-form infinitesimal
// plane-based pose decomposition, which yields two candidate poses that are
// disambiguated by reprojection error.
//
// Frames. The camera frame is x right, y down, z along the optical axis.
// The face template frame is X right, Y up, Z out of the face. A frontal
// face therefore has model-to-camera rotation diag(1, -1, -1); head yaw,
// pitch and roll are read off the rotation relative to that frontal pose,
// as intrinsic rotations about the camera y, x and z axes in that order.
namespace drvattn::headpose {

using geometry::Angle;
using geometry::Vec2;

// Points A, B, C, D in that order.
using Quad = std::array<Vec2, 4>;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  void Validate() const;
};

// A, B are the outer eye canthi and C, D the jaw angles, in millimeters on
// the z = 0 plane.
struct FaceTemplate {
  Quad points_mm{{{-45.0, 35.0}, {45.0, 35.0}, {-65.0, -45.0}, {65.0, -45.0}}};

  // Coplanarity is structural; checks non-collinearity and bilateral
  // symmetry about the vertical axis.
  void Validate() const;
  Quad ModelMeters() const;
};

struct LandmarkFrame {
  double t = 0.0;
  Quad px;
};

struct HeadPoseSample {
  double t = 0.0;
  Angle yaw;
  Angle pitch;
  Angle roll;
  double reproj_err = 0.0;       // pixels, RMS over the four points
  double ambiguity_ratio = 0.0;  // selected error / rejected error
  bool ambiguous = false;
  bool gimbal = false;
};

struct RigidPose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

// Forward lens model on normalized coordinates (radial k1, k2; tangential
// p1, p2).
Vec2 DistortNormalized(Vec2 n, const CameraIntrinsics& k);
Vec2 NormalizedToPixel(Vec2 n, const CameraIntrinsics& k);

// Inverts the lens model with 10 fixed-point iterations. Throws
// UndistortFailure if the inversion does not converge.
Vec2 UndistortNormalizePoint(Vec2 px, const CameraIntrinsics& k);
Quad UndistortNormalize(const Quad& px, const CameraIntrinsics& k);

// Exact homography for four correspondences, H(2,2) == 1. Throws
// DegenerateHomography if three model points are collinear or the DLT
// system is rank deficient.
Eigen::Matrix3d Homography4pt(const Quad& model_xy, const Quad& img_norm);

// The two rotation candidates from the homography's Jacobian at the model
// origin. Translation is the image of the origin scaled to the recovered
// depth. Throws PoseInfeasible when no candidate has positive depth.
std::array<RigidPose, 2> IppeDecompose(const Eigen::Matrix3d& H);

// Least-squares translation for a fixed rotation.
Eigen::Vector3d SolveTranslation(const Eigen::Matrix3d& R, const Quad& model_xy,
                                 const Quad& img_norm);

// RMS reprojection error; residuals are scaled per axis by pixel_scale.
// Returns +inf if any model point lands behind the camera.
double ReprojectionRms(const RigidPose& pose, const Quad& model_xy,
                       const Quad& img_norm, Vec2 pixel_scale = {1.0, 1.0});

struct Ranking {
  std::size_t index = 0;
  double ambiguity_ratio = 1.0;
};

// Lower error wins, ties go to the first candidate. Ratio is 1 when both
// errors are zero.
Ranking RankByError(double err0, double err1);

struct SelectedPose {
  RigidPose pose;
  double reproj_err = 0.0;
  double ambiguity_ratio = 1.0;
};

SelectedPose SelectPose(const std::array<RigidPose, 2>& candidates,
                        const Quad& model_xy, const Quad& img_norm,
                        Vec2 pixel_scale = {1.0, 1.0});

struct EulerAngles {
  Angle yaw;
  Angle pitch;
  Angle roll;
  bool gimbal = false;  // |pitch| > 89 deg
};

// R_head = Ry(yaw) * Rx(pitch) * Rz(roll).
Eigen::Matrix3d HeadRotation(double yaw_deg, double pitch_deg, double roll_deg);
EulerAngles ExtractYaw(const Eigen::Matrix3d& r_head);

// Model-to-camera rotation of a frontal face.
Eigen::Matrix3d FrontalRotation();

struct EstimateOptions {
  double ambiguity_flag_ratio = 0.9;
  double max_reproj_err_px = 5.0;
};

HeadPoseSample EstimateHeadPose(const LandmarkFrame& frame,
                                const FaceTemplate& face,
                                const CameraIntrinsics& k,
                                const EstimateOptions& opts = {});

struct FrameFailure {
  double t = 0.0;
  std::string code;
  std::string message;
};

struct BatchResult {
  std::vector<HeadPoseSample> samples;  // ordered by timestamp
  std::vector<FrameFailure> failures;
};

// Per-frame estimation; failures are collected, never thrown. Frames are
// processed on up to `threads` workers.
BatchResult EstimateHeadPoses(std::span<const LandmarkFrame> frames,
                              const FaceTemplate& face,
                              const CameraIntrinsics& k,
                              const EstimateOptions& opts = {},
                              unsigned threads = 0);

// yaw_vehicle = sign * (yaw_camera - mount_offset).
struct YawMapping {
  int sign = 1;
  double mount_offset_deg = 0.0;

  Angle ToVehicle(Angle camera_yaw) const;
  Angle ToCamera(Angle vehicle_yaw) const;
};

struct MountCalibration {
  double offset_deg = 0.0;
  std::size_t samples_used = 0;
  bool fallback = false;  // no straight segment found, offset left at 0
};

// Median camera yaw over straight-driving segments (|heading rate| below
// max_rate_dps for at least min_duration_s).
MountCalibration CalibrateMountOffset(std::span<const HeadPoseSample> samples,
                                      const geometry::EgoTrajectory& traj,
                                      double max_rate_dps = 1.0,
                                      double min_duration_s = 3.0);

}  // namespace drvattn::headpose

#endif  // DRVATTN_HEADPOSE_H_
