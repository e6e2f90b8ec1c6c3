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

#include "drvattn/tracker.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include <Eigen/Dense>

#include "drvattn/error.h"

namespace drvattn::tracker {
namespace {

using Matrix24 = Eigen::Matrix<double, 2, 4>;

Matrix24 MeasurementMatrix() {
  Matrix24 h = Matrix24::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

Eigen::Matrix4d Symmetrized(const Eigen::Matrix4d& p) {
  return 0.5 * (p + p.transpose());
}

// Cholesky of a 2x2 innovation covariance, with one repair attempt.
Eigen::LLT<Eigen::Matrix2d> FactorInnovation(Eigen::Matrix2d& s) {
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() == Eigen::Success && s.allFinite()) return llt;
  s = 0.5 * (s + s.transpose()) + 1e-9 * Eigen::Matrix2d::Identity();
  llt.compute(s);
  if (llt.info() != Eigen::Success || !s.allFinite()) {
    throw Error(ErrorCode::kScanFailure, "innovation covariance not positive definite");
  }
  return llt;
}

struct Innovation {
  Eigen::Vector2d predicted_z;
  Eigen::Matrix2d s;
  Eigen::LLT<Eigen::Matrix2d> llt;
  Eigen::Matrix<double, 4, 2> gain;
  Eigen::Matrix4d posterior_cov;
  double log_norm = 0.0;  // -log(2 pi sqrt(det S))
};

Innovation MakeInnovation(const GaussianComponent& c, double meas_var) {
  const Matrix24 h = MeasurementMatrix();
  Innovation in;
  in.predicted_z = h * c.mean;
  in.s = h * c.cov * h.transpose() + meas_var * Eigen::Matrix2d::Identity();
  in.llt = FactorInnovation(in.s);
  const Eigen::Matrix<double, 4, 2> pht = c.cov * h.transpose();
  in.gain = in.llt.solve(pht.transpose()).transpose();
  in.posterior_cov = Symmetrized(c.cov - in.gain * in.s * in.gain.transpose());
  const Eigen::Matrix2d l = in.llt.matrixL();
  in.log_norm = -std::log(2.0 * std::numbers::pi) - std::log(l(0, 0) * l(1, 1));
  return in;
}

double Mahalanobis2(const Eigen::Vector2d& d, const Eigen::Matrix2d& s) {
  Eigen::Matrix2d m = s;
  const Eigen::LLT<Eigen::Matrix2d> llt = FactorInnovation(m);
  return d.dot(llt.solve(d));
}

}  // namespace

std::string_view ToString(ObjectClass c) {
  return c == ObjectClass::kVehicle ? "vehicle" : "pedestrian";
}

ObjectClass ParseObjectClass(std::string_view s) {
  if (s == "vehicle") return ObjectClass::kVehicle;
  if (s == "pedestrian") return ObjectClass::kPedestrian;
  throw Error(ErrorCode::kParseError, "unknown object class '" + std::string(s) + "'");
}

GmphdParams GmphdParams::Vehicle() { return GmphdParams{}; }

GmphdParams GmphdParams::Pedestrian() {
  GmphdParams p;
  p.process_noise_accel = 0.5;
  return p;
}

void GmphdParams::Validate() const {
  const auto prob = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!prob(p_survival) || !prob(p_detect)) {
    throw Error(ErrorCode::kInvalidInput, "probabilities must lie in (0, 1]");
  }
  if (!(clutter_density >= 0.0) || !(process_noise_accel > 0.0) ||
      !(meas_noise > 0.0) || !(prune_threshold > 0.0) ||
      !(merge_threshold > 0.0) || !(birth_weight > 0.0) ||
      !(extract_threshold > 0.0) || !(link_gate > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "GM-PHD thresholds must be positive");
  }
  if (max_components < 1 || max_missed_scans < 0 || min_track_states < 1) {
    throw Error(ErrorCode::kInvalidInput, "GM-PHD counts out of range");
  }
  Eigen::LLT<Eigen::Matrix4d> llt(birth_cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidInput, "birth covariance not positive definite");
  }
}

Eigen::Matrix4d TransitionMatrix(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

Eigen::Matrix4d ProcessNoise(double dt, double accel) {
  const double q = accel * accel;
  const double dt2 = dt * dt;
  const double a = q * dt2 * dt2 / 4.0;
  const double b = q * dt2 * dt / 2.0;
  const double c = q * dt2;
  Eigen::Matrix4d m;
  m << a, 0, b, 0,  //
      0, a, 0, b,   //
      b, 0, c, 0,   //
      0, b, 0, c;
  return m;
}

Mixture Predict(const Mixture& mixture, const GmphdParams& params, double dt,
                std::span<const Vec2> birth_sources) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "prediction interval must be positive");
  }
  const Eigen::Matrix4d f = TransitionMatrix(dt);
  const Eigen::Matrix4d q = ProcessNoise(dt, params.process_noise_accel);
  Mixture out;
  out.reserve(mixture.size() + birth_sources.size());
  for (const auto& c : mixture) {
    GaussianComponent p;
    p.weight = params.p_survival * c.weight;
    p.mean = f * c.mean;
    p.cov = Symmetrized(f * c.cov * f.transpose() + q);
    out.push_back(std::move(p));
  }
  if (params.adaptive_birth) {
    for (const auto& z : birth_sources) {
      GaussianComponent b;
      b.weight = params.birth_weight;
      b.mean << z.x, z.y, 0.0, 0.0;
      b.cov = params.birth_cov;
      out.push_back(std::move(b));
    }
  }
  return out;
}

Mixture Update(const Mixture& predicted, std::span<const Vec2> measurements,
               const GmphdParams& params) {
  const double meas_var = params.meas_noise * params.meas_noise;
  std::vector<Innovation> innov;
  innov.reserve(predicted.size());
  for (const auto& c : predicted) innov.push_back(MakeInnovation(c, meas_var));

  Mixture out;
  out.reserve(predicted.size() * (measurements.size() + 1));
  for (const auto& c : predicted) {
    GaussianComponent m = c;
    m.weight = (1.0 - params.p_detect) * c.weight;
    out.push_back(std::move(m));
  }
  std::vector<GaussianComponent> per_z(predicted.size());
  for (const auto& z : measurements) {
    const Eigen::Vector2d zv(z.x, z.y);
    double norm = params.clutter_density;
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      const Innovation& in = innov[j];
      const Eigen::Vector2d r = zv - in.predicted_z;
      const double d2 = r.dot(in.llt.solve(r));
      const double likelihood = std::exp(in.log_norm - 0.5 * d2);
      GaussianComponent& u = per_z[j];
      u.weight = params.p_detect * predicted[j].weight * likelihood;
      u.mean = predicted[j].mean + in.gain * r;
      u.cov = in.posterior_cov;
      norm += u.weight;
    }
    for (auto& u : per_z) {
      u.weight = norm > 0.0 ? u.weight / norm : 0.0;
      out.push_back(u);
    }
  }
  return out;
}

Mixture PruneMerge(const Mixture& mixture, const GmphdParams& params) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    if (mixture[i].weight >= params.prune_threshold) live.push_back(i);
  }
  Mixture merged;
  while (!live.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < live.size(); ++k) {
      if (mixture[live[k]].weight > mixture[live[best]].weight) best = k;
    }
    const GaussianComponent& anchor = mixture[live[best]];
    std::vector<std::size_t> group;
    std::vector<std::size_t> rest;
    for (std::size_t idx : live) {
      const GaussianComponent& c = mixture[idx];
      const Eigen::Vector4d d = c.mean - anchor.mean;
      Eigen::LDLT<Eigen::Matrix4d> ldlt(c.cov);
      const double m2 = idx == live[best] ? 0.0 : d.dot(ldlt.solve(d));
      if (m2 <= params.merge_threshold) {
        group.push_back(idx);
      } else {
        rest.push_back(idx);
      }
    }
    GaussianComponent out;
    out.mean.setZero();
    for (std::size_t idx : group) {
      out.weight += mixture[idx].weight;
      out.mean += mixture[idx].weight * mixture[idx].mean;
    }
    out.mean /= out.weight;
    out.cov.setZero();
    for (std::size_t idx : group) {
      const Eigen::Vector4d d = out.mean - mixture[idx].mean;
      out.cov += mixture[idx].weight * (mixture[idx].cov + d * d.transpose());
    }
    out.cov = Symmetrized(out.cov / out.weight);
    merged.push_back(std::move(out));
    live = std::move(rest);
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const auto& a, const auto& b) { return a.weight > b.weight; });
  if (merged.size() > static_cast<std::size_t>(params.max_components)) {
    merged.resize(static_cast<std::size_t>(params.max_components));
  }
  return merged;
}

double ExpectedCount(const Mixture& mixture) {
  double s = 0.0;
  for (const auto& c : mixture) s += c.weight;
  return s;
}

namespace {

// Incremental version of ExtractTracks, fed one scan at a time.
class TrackLinker {
 public:
  TrackLinker(const GmphdParams& params, ObjectClass cls)
      : params_(params), cls_(cls) {}

  void AddScan(double t, const Mixture& mixture) {
    std::vector<const GaussianComponent*> estimates;
    for (const auto& c : mixture) {
      if (c.weight > params_.extract_threshold) estimates.push_back(&c);
    }
    std::stable_sort(estimates.begin(), estimates.end(),
                     [](const auto* a, const auto* b) { return a->weight > b->weight; });

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t ti = 0; ti < active_.size(); ++ti) {
      const Pending& p = active_[ti];
      const TrackState& last = tracks_[p.track].states.back();
      const double dt = t - last.t;
      const Eigen::Matrix4d f = TransitionMatrix(dt);
      const Eigen::Vector4d xp = f * last.x;
      const Eigen::Matrix4d pp =
          f * last.cov * f.transpose() + ProcessNoise(dt, params_.process_noise_accel);
      for (std::size_t ei = 0; ei < estimates.size(); ++ei) {
        const Eigen::Vector2d d = estimates[ei]->mean.head<2>() - xp.head<2>();
        const Eigen::Matrix2d s =
            pp.topLeftCorner<2, 2>() + estimates[ei]->cov.topLeftCorner<2, 2>();
        const double m2 = Mahalanobis2(d, s);
        if (m2 <= params_.link_gate) pairs.emplace_back(m2, ti, ei);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> track_used(active_.size(), false);
    std::vector<bool> est_used(estimates.size(), false);
    for (const auto& [m2, ti, ei] : pairs) {
      if (track_used[ti] || est_used[ei]) continue;
      track_used[ti] = true;
      est_used[ei] = true;
      Pending& p = active_[ti];
      Track& track = tracks_[p.track];
      const TrackState anchor = track.states.back();
      for (double tm : p.missed_times) {
        const double dt = tm - anchor.t;
        const Eigen::Matrix4d f = TransitionMatrix(dt);
        TrackState coast;
        coast.t = tm;
        coast.x = f * anchor.x;
        coast.cov = f * anchor.cov * f.transpose() +
                    ProcessNoise(dt, params_.process_noise_accel);
        coast.provenance = Provenance::kCoasted;
        track.states.push_back(coast);
      }
      p.missed_times.clear();
      track.states.push_back(
          {t, estimates[ei]->mean, estimates[ei]->cov, Provenance::kExtracted});
      ++extracted_[p.track];
    }
    std::vector<Pending> still_active;
    for (std::size_t ti = 0; ti < active_.size(); ++ti) {
      Pending p = std::move(active_[ti]);
      if (!track_used[ti]) {
        p.missed_times.push_back(t);
        if (static_cast<int>(p.missed_times.size()) > params_.max_missed_scans) continue;
      }
      still_active.push_back(std::move(p));
    }
    active_ = std::move(still_active);
    for (std::size_t ei = 0; ei < estimates.size(); ++ei) {
      if (est_used[ei]) continue;
      Track track;
      track.cls = cls_;
      track.states.push_back(
          {t, estimates[ei]->mean, estimates[ei]->cov, Provenance::kExtracted});
      tracks_.push_back(std::move(track));
      extracted_.push_back(1);
      active_.push_back({tracks_.size() - 1, {}});
    }
  }

  std::vector<Track> Finish(int first_id) {
    std::vector<Track> out;
    int id = first_id;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (extracted_[i] < params_.min_track_states) continue;
      tracks_[i].id = id++;
      out.push_back(std::move(tracks_[i]));
    }
    return out;
  }

 private:
  struct Pending {
    std::size_t track;
    std::vector<double> missed_times;
  };

  GmphdParams params_;
  ObjectClass cls_;
  std::vector<Track> tracks_;
  std::vector<int> extracted_;
  std::vector<Pending> active_;
};

}  // namespace

std::vector<Track> ExtractTracks(std::span<const ScanMixture> scans,
                                 const GmphdParams& params, ObjectClass cls,
                                 int first_id) {
  TrackLinker linker(params, cls);
  for (const auto& s : scans) linker.AddScan(s.t, s.mixture);
  return linker.Finish(first_id);
}

GmphdFilter::GmphdFilter(GmphdParams params) : params_(std::move(params)) {
  params_.Validate();
}

void GmphdFilter::SetMixture(Mixture mixture, double t) {
  mixture_ = std::move(mixture);
  time_ = t;
  started_ = true;
}

bool GmphdFilter::Step(double t, std::span<const Vec2> measurements) {
  if (!started_) {
    started_ = true;
    time_ = t;
    mixture_ = PruneMerge(Update(mixture_, measurements, params_), params_);
    previous_measurements_.assign(measurements.begin(), measurements.end());
    return true;
  }
  if (!(t > time_)) {
    throw Error(ErrorCode::kInvalidInput, "scan times must increase");
  }
  const Mixture predicted = Predict(mixture_, params_, t - time_, previous_measurements_);
  time_ = t;
  previous_measurements_.assign(measurements.begin(), measurements.end());
  try {
    mixture_ = PruneMerge(Update(predicted, measurements, params_), params_);
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kScanFailure) throw;
    mixture_ = PruneMerge(predicted, params_);
    return false;
  }
}

SceneResult TrackScene(std::span<const Detection> detections,
                       const GmphdParams& vehicle_params,
                       const GmphdParams& pedestrian_params) {
  SceneResult result;
  result.detections_in = detections.size();
  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection& a, const Detection& b) { return a.t < b.t; });

  // Scan timeline: distinct timestamps (within 1 microsecond).
  std::vector<double> times;
  for (const auto& d : sorted) {
    if (times.empty() || d.t - times.back() > 1e-6) times.push_back(d.t);
  }
  if (times.empty()) return result;
  if (times.size() >= 3) {
    std::vector<double> dts;
    for (std::size_t i = 1; i < times.size(); ++i) dts.push_back(times[i] - times[i - 1]);
    std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
    const double period = dts[dts.size() / 2];
    std::vector<double> full;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i > 0) {
        const double gap = times[i] - times[i - 1];
        if (gap > 1.5 * period) {
          const long missing = std::lround(gap / period) - 1;
          for (long k = 1; k <= missing; ++k) {
            full.push_back(times[i - 1] + gap * static_cast<double>(k) /
                                              static_cast<double>(missing + 1));
            ++result.scans_inserted;
          }
        }
      }
      full.push_back(times[i]);
    }
    times = std::move(full);
  }
  result.scan_times = times;

  int next_id = 1;
  for (ObjectClass cls : {ObjectClass::kVehicle, ObjectClass::kPedestrian}) {
    const GmphdParams& params =
        cls == ObjectClass::kVehicle ? vehicle_params : pedestrian_params;
    GmphdFilter filter(params);
    TrackLinker linker(params, cls);
    std::size_t cursor = 0;
    std::vector<Vec2> z;
    for (double t : times) {
      z.clear();
      while (cursor < sorted.size() && sorted[cursor].t <= t + 1e-6) {
        const Detection& d = sorted[cursor++];
        if (d.cls != cls) continue;
        if (d.confidence < params.min_confidence) {
          ++result.detections_low_confidence;
          continue;
        }
        z.push_back(d.position);
      }
      if (!filter.Step(t, z)) {
        result.warnings.push_back("ScanFailure: " + std::string(ToString(cls)) +
                                  " scan at t=" + std::to_string(t) +
                                  " carried forward by prediction");
      }
      linker.AddScan(t, filter.mixture());
    }
    std::vector<Track> tracks = linker.Finish(next_id);
    next_id += static_cast<int>(tracks.size());
    for (auto& tr : tracks) result.tracks.push_back(std::move(tr));
  }
  return result;
}

}  // namespace drvattn::tracker
