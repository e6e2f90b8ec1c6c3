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

#include "drvattn/headpose.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "drvattn/error.h"

namespace drvattn::headpose {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr int kUndistortIterations = 10;

double Cross(Vec2 o, Vec2 a, Vec2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// True if any three of the four points are (nearly) collinear.
bool HasCollinearTriple(const Quad& q) {
  double scale = 0.0;
  for (const auto& p : q) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-12 * std::max(scale * scale, 1e-300);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (std::abs(Cross(q[i], q[j], q[k])) <= tol) return true;
      }
    }
  }
  return false;
}

// Similarity that moves the centroid to the origin and the mean distance
// to sqrt(2).
Eigen::Matrix3d Conditioner(const Quad& q) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : q) {
    mx += p.x;
    my += p.y;
  }
  mx /= 4.0;
  my /= 4.0;
  double d = 0.0;
  for (const auto& p : q) d += std::hypot(p.x - mx, p.y - my);
  d /= 4.0;
  const double s = d > 0.0 ? std::sqrt(2.0) / d : 1.0;
  Eigen::Matrix3d T;
  T << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  return T;
}

Vec2 Apply(const Eigen::Matrix3d& T, Vec2 p) {
  const Eigen::Vector3d r = T * Eigen::Vector3d(p.x, p.y, 1.0);
  return {r.x() / r.z(), r.y() / r.z()};
}

Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

// Rotation taking the z axis onto the unit direction u.
Eigen::Matrix3d RotateZTo(const Eigen::Vector3d& u) {
  return Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), u)
      .toRotationMatrix();
}

}  // namespace

void CameraIntrinsics::Validate() const {
  for (double v : {fx, fy, cx, cy, k1, k2, p1, p2}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidInput, "intrinsics contain non-finite values");
    }
  }
  if (fx <= 0.0 || fy <= 0.0) {
    throw Error(ErrorCode::kInvalidInput, "focal lengths must be positive");
  }
  if (cx < 0.0 || cx > 4096.0 || cy < 0.0 || cy > 4096.0) {
    throw Error(ErrorCode::kInvalidInput, "principal point outside [0, 4096]");
  }
}

void FaceTemplate::Validate() const {
  for (const auto& p : points_mm) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidInput, "template point not finite");
    }
  }
  if (HasCollinearTriple(points_mm)) {
    throw Error(ErrorCode::kInvalidInput, "template has three collinear points");
  }
  const auto mirrored = [](Vec2 a, Vec2 b) {
    return std::abs(a.x + b.x) <= 1e-9 && std::abs(a.y - b.y) <= 1e-9;
  };
  if (!mirrored(points_mm[0], points_mm[1]) ||
      !mirrored(points_mm[2], points_mm[3])) {
    throw Error(ErrorCode::kInvalidInput,
                "template must be symmetric about its vertical axis");
  }
}

Quad FaceTemplate::ModelMeters() const {
  Quad out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {points_mm[i].x * 1e-3, points_mm[i].y * 1e-3};
  }
  return out;
}

Vec2 DistortNormalized(Vec2 n, const CameraIntrinsics& k) {
  const double r2 = n.x * n.x + n.y * n.y;
  const double radial = 1.0 + k.k1 * r2 + k.k2 * r2 * r2;
  const double dx = 2.0 * k.p1 * n.x * n.y + k.p2 * (r2 + 2.0 * n.x * n.x);
  const double dy = k.p1 * (r2 + 2.0 * n.y * n.y) + 2.0 * k.p2 * n.x * n.y;
  return {n.x * radial + dx, n.y * radial + dy};
}

Vec2 NormalizedToPixel(Vec2 n, const CameraIntrinsics& k) {
  const Vec2 d = DistortNormalized(n, k);
  return {k.fx * d.x + k.cx, k.fy * d.y + k.cy};
}

Vec2 UndistortNormalizePoint(Vec2 px, const CameraIntrinsics& k) {
  const Vec2 xd{(px.x - k.cx) / k.fx, (px.y - k.cy) / k.fy};
  Vec2 x = xd;
  for (int i = 0; i < kUndistortIterations; ++i) {
    const double r2 = x.x * x.x + x.y * x.y;
    const double radial = 1.0 + k.k1 * r2 + k.k2 * r2 * r2;
    const double dx = 2.0 * k.p1 * x.x * x.y + k.p2 * (r2 + 2.0 * x.x * x.x);
    const double dy = k.p1 * (r2 + 2.0 * x.y * x.y) + 2.0 * k.p2 * x.x * x.y;
    if (!(radial > 0.0)) {
      throw Error(ErrorCode::kUndistortFailure, "radial factor non-positive");
    }
    x = {(xd.x - dx) / radial, (xd.y - dy) / radial};
  }
  const Vec2 back = DistortNormalized(x, k);
  const double residual = std::hypot(back.x - xd.x, back.y - xd.y);
  if (!std::isfinite(residual) || residual > 1e-4) {
    throw Error(ErrorCode::kUndistortFailure,
                "distortion inversion diverged (residual " +
                    std::to_string(residual) + ")");
  }
  return x;
}

Quad UndistortNormalize(const Quad& px, const CameraIntrinsics& k) {
  Quad out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = UndistortNormalizePoint(px[i], k);
  return out;
}

Eigen::Matrix3d Homography4pt(const Quad& model_xy, const Quad& img_norm) {
  if (HasCollinearTriple(model_xy)) {
    throw Error(ErrorCode::kDegenerateHomography,
                "three model points are collinear");
  }
  const Eigen::Matrix3d tm = Conditioner(model_xy);
  const Eigen::Matrix3d ti = Conditioner(img_norm);
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Vec2 m = Apply(tm, model_xy[i]);
    const Vec2 p = Apply(ti, img_norm[i]);
    a.row(2 * i) << m.x, m.y, 1.0, 0.0, 0.0, 0.0, -p.x * m.x, -p.x * m.y, -p.x;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, m.x, m.y, 1.0, -p.y * m.x, -p.y * m.y, -p.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-12 * sv(0))) {
    throw Error(ErrorCode::kDegenerateHomography, "DLT system is rank deficient");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d H = ti.inverse() * hn * tm;
  if (!(std::abs(H(2, 2)) > 1e-14 * H.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kDegenerateHomography,
                "model origin maps to infinity");
  }
  H /= H(2, 2);
  return H;
}

constexpr double kSmallTilt = 1e-4;

std::array<RigidPose, 2> IppeDecompose(const Eigen::Matrix3d& h_in) {
  if (!h_in.allFinite() || h_in(2, 2) == 0.0) {
    throw Error(ErrorCode::kPoseInfeasible, "homography not normalizable");
  }
  const Eigen::Matrix3d H = h_in / h_in(2, 2);
  // Jacobian of the homography at the model origin and the image of the
  // origin.
  Eigen::Matrix2d J;
  J << H(0, 0) - H(2, 0) * H(0, 2), H(0, 1) - H(2, 1) * H(0, 2),
      H(1, 0) - H(2, 0) * H(1, 2), H(1, 1) - H(2, 1) * H(1, 2);
  const Eigen::Vector2d v(H(0, 2), H(1, 2));

  const Eigen::Matrix3d rv = RotateZTo(Eigen::Vector3d(v.x(), v.y(), 1.0).normalized());
  Eigen::Matrix2d B;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) B(i, j) = rv(i, j) - v(i) * rv(2, j);
  }
  const double det_b = B.determinant();
  if (!(std::abs(det_b) > 1e-14)) {
    throw Error(ErrorCode::kPoseInfeasible, "degenerate viewing direction");
  }
  const Eigen::Matrix2d A = B.inverse() * J;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(A, Eigen::ComputeFullV);
  const double gamma = svd.singularValues()(0);
  if (!std::isfinite(gamma) || gamma < 1e-12) {
    throw Error(ErrorCode::kPoseInfeasible, "homography Jacobian vanishes");
  }
  const Eigen::Matrix2d rt = A / gamma;
  // I - rt^T rt = (1 - r^2) v2 v2^T with r = s2 / s1; factored to avoid
  // cancellation near fronto-parallel poses.
  const double s2 = svd.singularValues()(1);
  const double tilt = std::sqrt(std::max(0.0, (gamma - s2) * (gamma + s2))) / gamma;
  double b0 = tilt * svd.matrixV()(0, 1);
  double b1 = tilt * svd.matrixV()(1, 1);
  if (tilt < kSmallTilt && std::abs(rv(2, 2)) > 0.5) {
    // The closed form is square-root conditioned here; the projective row of
    // H gives the third rotation row to first order.
    for (int j = 0; j < 2; ++j) {
      const double r3j = H(2, j) / gamma;
      const double bj = (r3j - rv(2, 0) * rt(0, j) - rv(2, 1) * rt(1, j)) / rv(2, 2);
      (j == 0 ? b0 : b1) = bj;
    }
  }

  const Eigen::Vector3d t = Eigen::Vector3d(v.x(), v.y(), 1.0) / gamma;
  std::array<RigidPose, 2> out;
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    const Eigen::Vector3d c0(rt(0, 0), rt(1, 0), sign * b0);
    const Eigen::Vector3d c1(rt(0, 1), rt(1, 1), sign * b1);
    Eigen::Matrix3d m;
    m.col(0) = c0;
    m.col(1) = c1;
    m.col(2) = c0.cross(c1);
    out[s].R = NearestRotation(rv * m);
    out[s].t = t;
  }
  return out;
}

Eigen::Vector3d SolveTranslation(const Eigen::Matrix3d& R, const Quad& model_xy,
                                 const Quad& img_norm) {
  // u * (r3.X + tz) = r1.X + tx  =>  tx - u tz = u r3.X - r1.X
  Eigen::Matrix<double, 8, 3> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d X(model_xy[i].x, model_xy[i].y, 0.0);
    const Eigen::Vector3d rx = R * X;
    const double u = img_norm[i].x, w = img_norm[i].y;
    a.row(2 * i) << 1.0, 0.0, -u;
    a.row(2 * i + 1) << 0.0, 1.0, -w;
    b(2 * i) = u * rx.z() - rx.x();
    b(2 * i + 1) = w * rx.z() - rx.y();
  }
  return a.colPivHouseholderQr().solve(b);
}

double ReprojectionRms(const RigidPose& pose, const Quad& model_xy,
                       const Quad& img_norm, Vec2 pixel_scale) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d X(model_xy[i].x, model_xy[i].y, 0.0);
    const Eigen::Vector3d c = pose.R * X + pose.t;
    if (!(c.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const double dx = (c.x() / c.z() - img_norm[i].x) * pixel_scale.x;
    const double dy = (c.y() / c.z() - img_norm[i].y) * pixel_scale.y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / 4.0);
}

Ranking RankByError(double err0, double err1) {
  Ranking r;
  r.index = err1 < err0 ? 1 : 0;
  const double sel = r.index == 0 ? err0 : err1;
  const double rej = r.index == 0 ? err1 : err0;
  if (sel == rej) {
    r.ambiguity_ratio = 1.0;
  } else if (std::isinf(rej)) {
    r.ambiguity_ratio = 0.0;
  } else {
    r.ambiguity_ratio = sel / rej;
  }
  return r;
}

SelectedPose SelectPose(const std::array<RigidPose, 2>& candidates,
                        const Quad& model_xy, const Quad& img_norm,
                        Vec2 pixel_scale) {
  const double e0 = ReprojectionRms(candidates[0], model_xy, img_norm, pixel_scale);
  const double e1 = ReprojectionRms(candidates[1], model_xy, img_norm, pixel_scale);
  if (std::isinf(e0) && std::isinf(e1)) {
    throw Error(ErrorCode::kPoseInfeasible,
                "no candidate places the face in front of the camera");
  }
  const Ranking rank = RankByError(e0, e1);
  return {candidates[rank.index], rank.index == 0 ? e0 : e1, rank.ambiguity_ratio};
}

Eigen::Matrix3d HeadRotation(double yaw_deg, double pitch_deg, double roll_deg) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(yaw_deg / kDegPerRad, Eigen::Vector3d::UnitY()) *
          AngleAxisd(pitch_deg / kDegPerRad, Eigen::Vector3d::UnitX()) *
          AngleAxisd(roll_deg / kDegPerRad, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

EulerAngles ExtractYaw(const Eigen::Matrix3d& r) {
  EulerAngles e;
  const double cos_pitch = std::hypot(r(1, 0), r(1, 1));
  const double pitch = std::atan2(-r(1, 2), cos_pitch) * kDegPerRad;
  e.yaw = Angle::Degrees(std::atan2(r(0, 2), r(2, 2)) * kDegPerRad);
  e.pitch = Angle::Degrees(pitch);
  e.roll = Angle::Degrees(std::atan2(r(1, 0), r(1, 1)) * kDegPerRad);
  e.gimbal = std::abs(pitch) > 89.0;
  return e;
}

Eigen::Matrix3d FrontalRotation() {
  return Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
}

namespace {

// Gauss-Newton on reprojection error; the closed-form decomposition loses
// half its digits near fronto-parallel poses.
RigidPose PolishPose(const RigidPose& start, const Quad& model_xy, const Quad& img_norm) {
  RigidPose best = start;
  double best_err = ReprojectionRms(best, model_xy, img_norm);
  for (int iter = 0; iter < 10 && best_err > 0.0; ++iter) {
    Eigen::Matrix<double, 8, 6> jac;
    Eigen::Matrix<double, 8, 1> res;
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d rx = best.R * Eigen::Vector3d(model_xy[i].x, model_xy[i].y, 0.0);
      const Eigen::Vector3d c = rx + best.t;
      if (!(c.z() > 0.0)) return best;
      const double iz = 1.0 / c.z();
      res(2 * i) = c.x() * iz - img_norm[i].x;
      res(2 * i + 1) = c.y() * iz - img_norm[i].y;
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << iz, 0.0, -c.x() * iz * iz, 0.0, iz, -c.y() * iz * iz;
      Eigen::Matrix3d skew;
      skew << 0.0, rx.z(), -rx.y(), -rx.z(), 0.0, rx.x(), rx.y(), -rx.x(), 0.0;
      jac.block<2, 3>(2 * i, 0) = dproj * skew;
      jac.block<2, 3>(2 * i, 3) = dproj;
    }
    const Eigen::Matrix<double, 6, 1> step = jac.colPivHouseholderQr().solve(-res);
    if (!step.allFinite()) return best;
    RigidPose next;
    const Eigen::Vector3d w = step.head<3>();
    next.R = w.norm() > 0.0 ? Eigen::Matrix3d(Eigen::AngleAxisd(w.norm(), w.normalized())) * best.R
                            : best.R;
    next.t = best.t + step.tail<3>();
    const double err = ReprojectionRms(next, model_xy, img_norm);
    if (!(err < best_err)) break;
    best = next;
    best_err = err;
  }
  return best;
}

}  // namespace

HeadPoseSample EstimateHeadPose(const LandmarkFrame& frame,
                                const FaceTemplate& face,
                                const CameraIntrinsics& k,
                                const EstimateOptions& opts) {
  for (const auto& p : frame.px) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidInput, "landmark not finite");
    }
  }
  const Quad img = UndistortNormalize(frame.px, k);
  const Quad model = face.ModelMeters();
  const Eigen::Matrix3d H = Homography4pt(model, img);
  std::array<RigidPose, 2> candidates = IppeDecompose(H);
  for (auto& c : candidates) c.t = SolveTranslation(c.R, model, img);
  SelectedPose sel = SelectPose(candidates, model, img, {k.fx, k.fy});
  sel.pose = PolishPose(sel.pose, model, img);
  sel.reproj_err = ReprojectionRms(sel.pose, model, img, {k.fx, k.fy});
  if (sel.reproj_err > opts.max_reproj_err_px) {
    throw Error(ErrorCode::kReprojectionGate,
                "reprojection error " + std::to_string(sel.reproj_err) +
                    " px exceeds gate");
  }
  const EulerAngles e = ExtractYaw(sel.pose.R * FrontalRotation().transpose());
  HeadPoseSample s;
  s.t = frame.t;
  s.yaw = e.yaw;
  s.pitch = e.pitch;
  s.roll = e.roll;
  s.gimbal = e.gimbal;
  s.reproj_err = sel.reproj_err;
  s.ambiguity_ratio = sel.ambiguity_ratio;
  s.ambiguous = sel.ambiguity_ratio > opts.ambiguity_flag_ratio;
  return s;
}

BatchResult EstimateHeadPoses(std::span<const LandmarkFrame> frames,
                              const FaceTemplate& face,
                              const CameraIntrinsics& k,
                              const EstimateOptions& opts, unsigned threads) {
  k.Validate();
  face.Validate();
  struct Slot {
    bool ok = false;
    HeadPoseSample sample;
    FrameFailure failure;
  };
  std::vector<Slot> slots(frames.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        slots[i].sample = EstimateHeadPose(frames[i], face, k, opts);
        slots[i].ok = true;
      } catch (const Error& e) {
        slots[i].failure = {frames[i].t, std::string(ToString(e.code())),
                            e.what()};
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n = frames.size();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n / 256, 1)));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  BatchResult out;
  for (auto& s : slots) {
    if (s.ok) {
      out.samples.push_back(s.sample);
    } else {
      out.failures.push_back(std::move(s.failure));
    }
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

Angle YawMapping::ToVehicle(Angle camera_yaw) const {
  return Angle::Degrees(sign * (camera_yaw.degrees() - mount_offset_deg));
}

Angle YawMapping::ToCamera(Angle vehicle_yaw) const {
  return Angle::Degrees(sign * vehicle_yaw.degrees() + mount_offset_deg);
}

MountCalibration CalibrateMountOffset(std::span<const HeadPoseSample> samples,
                                      const geometry::EgoTrajectory& traj,
                                      double max_rate_dps,
                                      double min_duration_s) {
  const auto& poses = traj.samples();
  const std::vector<double> rates = geometry::HeadingRates(traj);
  std::vector<std::pair<double, double>> segments;
  std::size_t i = 0;
  while (i < poses.size()) {
    if (std::abs(rates[i]) >= max_rate_dps) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < poses.size() && std::abs(rates[j + 1]) < max_rate_dps) ++j;
    if (poses[j].t - poses[i].t >= min_duration_s) {
      segments.emplace_back(poses[i].t, poses[j].t);
    }
    i = j + 1;
  }
  std::vector<double> yaws;
  std::size_t seg = 0;
  for (const auto& s : samples) {
    while (seg < segments.size() && segments[seg].second < s.t) ++seg;
    if (seg == segments.size()) break;
    if (s.t >= segments[seg].first) yaws.push_back(s.yaw.degrees());
  }
  MountCalibration cal;
  if (yaws.empty()) {
    cal.fallback = true;
    return cal;
  }
  std::sort(yaws.begin(), yaws.end());
  const std::size_t n = yaws.size();
  cal.offset_deg = n % 2 == 1 ? yaws[n / 2] : 0.5 * (yaws[n / 2 - 1] + yaws[n / 2]);
  cal.samples_used = n;
  return cal;
}

}  // namespace drvattn::headpose
