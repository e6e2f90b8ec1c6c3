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


// Independent reference implementations used as test oracles. None of these
// call into the library under test.

#ifndef DRVATTN_TESTS_ORACLES_H_
#define DRVATTN_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Constant-velocity Kalman filter with white-acceleration process noise and
// position-only measurements.
class ConstantVelocityKf {
 public:
  ConstantVelocityKf(Eigen::Vector4d x0, Eigen::Matrix4d p0, double accel, double meas_sigma)
      : x_(std::move(x0)), p_(std::move(p0)), q_(accel * accel), r_(meas_sigma * meas_sigma) {}

  void Predict(double dt) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    q(0, 0) = q(1, 1) = dt4 / 4.0;
    q(0, 2) = q(2, 0) = q(1, 3) = q(3, 1) = dt3 / 2.0;
    q(2, 2) = q(3, 3) = dt2;
    x_ = f * x_;
    p_ = f * p_ * f.transpose() + q_ * q;
  }

  void Update(double zx, double zy) {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    const Eigen::Matrix2d s = h * p_ * h.transpose() + r_ * Eigen::Matrix2d::Identity();
    const Eigen::Matrix<double, 4, 2> k = p_ * h.transpose() * s.inverse();
    x_ = x_ + k * (Eigen::Vector2d(zx, zy) - h * x_);
    p_ = (Eigen::Matrix4d::Identity() - k * h) * p_;
  }

  const Eigen::Vector4d& x() const { return x_; }

 private:
  Eigen::Vector4d x_;
  Eigen::Matrix4d p_;
  double q_;
  double r_;
};

struct P2 {
  double x;
  double y;
};

// OSPA by enumerating every injection of the smaller set into the larger.
inline double BruteOspa(std::vector<P2> x, std::vector<P2> y, double c, double p) {
  if (x.empty() && y.empty()) return 0.0;
  if (x.size() > y.size()) std::swap(x, y);
  const std::size_t m = x.size(), n = y.size();
  if (m == 0) return c;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = std::hypot(x[i].x - y[perm[i]].x, x[i].y - y[perm[i]].y);
      sum += std::pow(std::min(d, c), p);
    }
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double total = best + std::pow(c, p) * static_cast<double>(n - m);
  return std::pow(total / static_cast<double>(n), 1.0 / p);
}

// Optimal two-cluster SSE of scalar data by trying every split of the sorted
// values.
inline double ExhaustiveSplitSse(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto sse = [&](std::size_t a, std::size_t b) {
    double mean = 0.0;
    for (std::size_t i = a; i < b; ++i) mean += v[i];
    mean /= static_cast<double>(b - a);
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += (v[i] - mean) * (v[i] - mean);
    return s;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t cut = 1; cut < v.size(); ++cut) {
    best = std::min(best, sse(0, cut) + sse(cut, v.size()));
  }
  return best;
}

// Optimal two-cluster SSE over all 2-partitions (small inputs only).
inline double BruteForcePartitionSse(const std::vector<std::vector<double>>& pts,
                                     std::vector<int>* best_mask = nullptr) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.front().size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != static_cast<unsigned>(side)) continue;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[i][d];
        ++count;
      }
      for (auto& m : mean) m /= count;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != static_cast<unsigned>(side)) continue;
        for (std::size_t d = 0; d < dim; ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
      }
    }
    if (total < best) {
      best = total;
      if (best_mask) {
        best_mask->assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) (*best_mask)[i] = (mask >> i) & 1u;
      }
    }
  }
  return best;
}

// Brown-Conrady forward distortion on normalized coordinates.
inline P2 Distort(P2 n, double k1, double k2, double p1, double p2) {
  const double r2 = n.x * n.x + n.y * n.y;
  const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
  return {n.x * radial + 2.0 * p1 * n.x * n.y + p2 * (r2 + 2.0 * n.x * n.x),
          n.y * radial + p1 * (r2 + 2.0 * n.y * n.y) + 2.0 * p2 * n.x * n.y};
}

// Pinhole projection of a planar face template rotated by r about its
// origin and placed `depth` meters along the optical axis.
inline std::vector<P2> ProjectPinhole(const std::vector<P2>& model_m, const Eigen::Matrix3d& r,
                                      double depth, double fx, double fy, double cx, double cy) {
  std::vector<P2> out;
  for (const auto& m : model_m) {
    const Eigen::Vector3d c = r * Eigen::Vector3d(m.x, m.y, 0.0) + Eigen::Vector3d(0, 0, depth);
    out.push_back({fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy});
  }
  return out;
}

inline double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle

#endif  // DRVATTN_TESTS_ORACLES_H_
