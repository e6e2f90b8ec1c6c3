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

#include "drvattn/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "drvattn/error.h"

namespace drvattn::synth {
namespace {

using geometry::Angle;
using geometry::Pose2D;

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Stream ids keep noise sources independent of one another.
enum Stream : std::uint32_t {
  kRoster = 1,
  kDetectNoise = 2,
  kMiss = 3,
  kClutter = 4,
  kGaze = 5,
  kLandmarks = 6,
  kCohort = 7,
};

std::mt19937_64 MakeRng(std::uint64_t seed, std::uint64_t a, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), stream};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double Normal(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

struct Segment {
  double length = 0.0;
  bool arc = false;
};

std::vector<Segment> LapSegments(const LoopGeometry& g) {
  const double r = g.corner_radius;
  const double straight = g.block - 2.0 * r;
  const double arc = 0.5 * std::numbers::pi * r;
  return {{0.5 * g.block - r, false}, {arc, true},      {straight, false},
          {arc, true},                {straight, false}, {arc, true},
          {straight, false},          {arc, true},       {0.5 * g.block - r, false}};
}

// Sample indices k with k / rate in [t0, t1).
std::pair<long long, long long> IndexRange(double t0, double t1, double rate) {
  const long long a = static_cast<long long>(std::ceil(t0 * rate - 1e-9));
  const long long b = static_cast<long long>(std::ceil(t1 * rate - 1e-9));
  return {a, b};
}

geometry::EgoPoint EgoOf(const geometry::EgoTrajectory& traj, const ObjectSpec& o, double t) {
  return geometry::WorldToEgo(geometry::InterpolatePose(traj, t), o.PositionAt(t));
}

// Gating stats of one object over lap-relative camera samples.
struct GateStats {
  double gated_s = 0.0;
  double min_bearing = 180.0;
};

GateStats ObjectGateStats(const LoopGeometry& g, const ObjectSpec& o,
                          const attention::GatingConfig& gating, double rate) {
  GateStats st;
  const auto [a, b] = IndexRange(o.spawn_t, o.despawn_t, rate);
  for (long long k = a; k < b; ++k) {
    const double t = static_cast<double>(k) / rate;
    const Pose2D pose = LapPose(g, g.speed * t);
    const geometry::EgoPoint e = geometry::WorldToEgo(pose, o.PositionAt(t));
    if (!attention::Gate(e, gating)) continue;
    st.gated_s += 1.0 / rate;
    st.min_bearing = std::min(st.min_bearing, std::abs(geometry::Bearing(e).degrees()));
  }
  return st;
}

bool Separated(const ObjectSpec& a, const ObjectSpec& b, double min_sep) {
  const double t0 = std::max(a.spawn_t, b.spawn_t);
  const double t1 = std::min(a.despawn_t, b.despawn_t);
  for (double t = t0; t <= t1; t += 0.25) {
    const Vec2 pa = a.PositionAt(t);
    const Vec2 pb = b.PositionAt(t);
    if (std::hypot(pa.x - pb.x, pa.y - pb.y) < min_sep) return false;
  }
  return true;
}

std::pair<double, double> ZoneInterval(const LoopGeometry& g) {
  const auto zones = JunctionZones(g);
  const double len = LapLength(g);
  double s_in = -1.0, s_out = -1.0;
  for (double s = 0.0; s < len; s += 0.05) {
    const Pose2D p = LapPose(g, s);
    const bool in = geometry::PointInPolygon(zones.front().polygon, {p.x, p.y});
    if (in && s_in < 0.0) s_in = s;
    if (in) s_out = s;
  }
  if (s_in < 0.0) throw Error(ErrorCode::kSpecError, "lap never enters the junction zone");
  return {s_in / g.speed, s_out / g.speed};
}

std::vector<ObjectSpec> GenerateRoster(const ScenarioSpec& spec, std::uint64_t scene_seed) {
  const LoopGeometry& g = spec.geometry;
  const RosterSpec& r = spec.roster;
  auto rng = MakeRng(scene_seed, 0, kRoster);
  const int n_veh = std::uniform_int_distribution<int>(r.min_vehicles, r.max_vehicles)(rng);
  const int n_ped = std::uniform_int_distribution<int>(r.min_pedestrians, r.max_pedestrians)(rng);
  std::vector<ObjectClass> classes(static_cast<std::size_t>(n_veh), ObjectClass::kVehicle);
  classes.insert(classes.end(), static_cast<std::size_t>(n_ped), ObjectClass::kPedestrian);
  std::shuffle(classes.begin(), classes.end(), rng);

  const auto [t_in, t_out] = ZoneInterval(g);
  const double lap_t = LapDuration(g);
  const double slot = (t_out - t_in - 2.0) / std::max<std::size_t>(1, classes.size());
  std::vector<ObjectSpec> roster;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      ObjectSpec o;
      o.id = static_cast<int>(i);
      o.cls = classes[i];
      // Stratified placement first, then anywhere along the traversal.
      const double tau = attempt < 200
                             ? t_in + 1.0 + slot * (static_cast<double>(i) + Uniform(rng, 0.0, 1.0))
                             : Uniform(rng, t_in + 1.0, t_out - 1.0);
      const Pose2D at = LapPose(g, g.speed * tau);
      const double side = Uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const geometry::EgoPoint rel{Uniform(rng, 10.0, 14.0),
                                   side * Uniform(rng, r.min_lateral, r.max_lateral)};
      const Vec2 p = geometry::EgoToWorld(at, rel);
      const double dir = Uniform(rng, -std::numbers::pi, std::numbers::pi);
      double speed = 0.0;
      if (o.cls == ObjectClass::kPedestrian) {
        speed = Uniform(rng, 0.8, 1.4);
      } else if (Uniform(rng, 0.0, 1.0) < 0.5) {
        speed = Uniform(rng, 1.0, 3.0);
      }
      o.velocity = {speed * std::cos(dir), speed * std::sin(dir)};
      o.spawn_t = std::max(0.0, tau - 10.0);
      o.despawn_t = std::min(lap_t, tau + 8.0);
      o.start = {p.x - o.velocity.x * (tau - o.spawn_t), p.y - o.velocity.y * (tau - o.spawn_t)};
      const GateStats st = ObjectGateStats(g, o, spec.gating, spec.camera.rate_hz);
      if (st.gated_s < r.min_gated_s || st.min_bearing < r.min_bearing_deg) continue;
      bool ok = true;
      for (const auto& other : roster) ok = ok && Separated(o, other, r.min_separation);
      if (!ok) continue;
      roster.push_back(o);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::kSpecError, "could not place roster object " + std::to_string(i));
    }
  }
  return roster;
}

Vec2 SampleGatingRegion(std::mt19937_64& rng, const attention::GatingConfig& g) {
  for (;;) {
    const geometry::EgoPoint p{Uniform(rng, 0.0, g.range_fwd),
                               Uniform(rng, -g.range_lat, g.range_lat)};
    if (attention::Gate(p, g)) return {p.x_fwd, p.y_lat};
  }
}

// True yaw (vehicle frame) at lap-relative camera samples [a, b).
struct LapGaze {
  std::vector<double> t;
  std::vector<double> yaw;
  std::vector<double> glance_s;  // per roster object
};

LapGaze GenerateGaze(const ScenarioSpec& spec, const LapSpec& lap, std::size_t lap_index,
                     const std::vector<ObjectSpec>& objects, const geometry::EgoTrajectory& traj,
                     double t0, double t1) {
  const double rate = spec.camera.rate_hz;
  const auto [a, b] = IndexRange(t0, t1, rate);
  const std::size_t n = static_cast<std::size_t>(b - a);
  LapGaze gz;
  gz.glance_s.assign(objects.size(), 0.0);
  gz.t.resize(n);
  for (std::size_t j = 0; j < n; ++j) gz.t[j] = static_cast<double>(a + static_cast<long long>(j)) / rate;

  // gated[o][j] and bearing[o][j] from the true geometry.
  std::vector<std::vector<char>> gated(objects.size(), std::vector<char>(n, 0));
  std::vector<std::vector<double>> bearing(objects.size(), std::vector<double>(n, 0.0));
  for (std::size_t o = 0; o < objects.size(); ++o) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!objects[o].Alive(gz.t[j]) || !traj.Contains(gz.t[j])) continue;
      const geometry::EgoPoint e = EgoOf(traj, objects[o], gz.t[j]);
      gated[o][j] = attention::Gate(e, spec.gating) ? 1 : 0;
      if (e.x_fwd != 0.0 || e.y_lat != 0.0) bearing[o][j] = geometry::Bearing(e).degrees();
    }
  }
  auto run_end = [&](std::size_t o, std::size_t j) {
    std::size_t k = j;
    while (k < n && gated[o][k]) ++k;
    return k;
  };

  auto rng = MakeRng(spec.seed, lap_index, kGaze);
  const GazeSpec& gs = lap.gaze;
  gz.yaw.assign(n, 0.0);
  std::vector<int> target(n, -1);
  if (gs.profile == GazeProfile::kAttentive) {
    const std::size_t glance_len = static_cast<std::size_t>(std::llround(gs.glance_s * rate));
    const std::size_t min_len = static_cast<std::size_t>(std::llround(gs.min_glance_s * rate));
    std::vector<char> glanced(objects.size(), 0);
    int current = -1;
    std::size_t end = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (current >= 0 && (j >= end || !gated[static_cast<std::size_t>(current)][j])) current = -1;
      if (current < 0) {
        std::size_t best_end = n + 1;
        for (std::size_t o = 0; o < objects.size(); ++o) {
          if (glanced[o] || !gated[o][j]) continue;
          const std::size_t e = run_end(o, j);
          if (e - j < min_len) continue;
          if (e < best_end) {
            best_end = e;
            current = static_cast<int>(o);
          }
        }
        if (current >= 0) {
          glanced[static_cast<std::size_t>(current)] = 1;
          end = std::min(best_end, j + glance_len);
        }
      }
      target[j] = current;
    }
  } else if (gs.profile == GazeProfile::kScripted) {
    for (const Glance& gl : gs.script) {
      if (gl.object_index < 0 || static_cast<std::size_t>(gl.object_index) >= objects.size()) {
        throw Error(ErrorCode::kSpecError, "scripted glance references unknown object");
      }
      const std::size_t o = static_cast<std::size_t>(gl.object_index);
      std::size_t first = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (gated[o][j]) {
          first = j;
          break;
        }
      }
      if (first == n) throw Error(ErrorCode::kSpecError, "scripted glance target never gated");
      const double start = gz.t[first] + gl.delay;
      for (std::size_t j = first; j < n; ++j) {
        if (gz.t[j] >= start - 1e-9 && gz.t[j] < start + gl.dwell - 1e-9) {
          target[j] = static_cast<int>(o);
        }
      }
    }
  }
  // Forward gaze jitter is AR(1) with the configured marginal sigma.
  const double phi = gs.baseline_correlation;
  double jitter = Normal(rng, gs.baseline_sigma_deg);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) jitter = phi * jitter + std::sqrt(1.0 - phi * phi) * Normal(rng, gs.baseline_sigma_deg);
    if (target[j] >= 0) {
      const std::size_t o = static_cast<std::size_t>(target[j]);
      gz.yaw[j] = geometry::WrapDegrees(bearing[o][j] + Normal(rng, gs.glance_sigma_deg));
      if (gated[o][j]) gz.glance_s[o] += 1.0 / rate;
    } else {
      gz.yaw[j] = geometry::WrapDegrees(jitter);
    }
  }
  return gz;
}

}  // namespace

void LoopGeometry::Validate() const {
  if (!(block > 0.0) || !(corner_radius > 0.0) || !(speed > 0.0) || !(zone_half > 0.0)) {
    throw Error(ErrorCode::kSpecError, "loop dimensions and speed must be positive");
  }
  if (2.0 * corner_radius >= block * 0.5) {
    throw Error(ErrorCode::kSpecError, "corner radius too large for the block");
  }
  if (zone_half >= 0.5 * block) {
    throw Error(ErrorCode::kSpecError, "zone must not reach the far corners");
  }
}

double LapLength(const LoopGeometry& g) {
  double len = 0.0;
  for (const auto& s : LapSegments(g)) len += s.length;
  return len;
}

double LapDuration(const LoopGeometry& g) { return LapLength(g) / g.speed; }

Pose2D LapPose(const LoopGeometry& g, double s) {
  const double len = LapLength(g);
  s = std::fmod(s, len);
  if (s < 0.0) s += len;
  double x = 0.0, y = -0.5 * g.block;
  double heading = 90.0;
  for (const auto& seg : LapSegments(g)) {
    const double d = std::min(s, seg.length);
    const double h = heading / kDegPerRad;
    if (!seg.arc) {
      x += d * std::cos(h);
      y += d * std::sin(h);
    } else {
      // Right turn: center lies to the right of the heading.
      const double r = g.corner_radius;
      const double cx = x + r * std::sin(h);
      const double cy = y - r * std::cos(h);
      const double phi = -d / r;
      const double dx = x - cx, dy = y - cy;
      x = cx + std::cos(phi) * dx - std::sin(phi) * dy;
      y = cy + std::sin(phi) * dx + std::cos(phi) * dy;
      heading += phi * kDegPerRad;
    }
    s -= d;
    if (s <= 0.0) break;
  }
  return {x, y, Angle::Degrees(heading)};
}

std::vector<attention::Zone> JunctionZones(const LoopGeometry& g) {
  const double h = g.zone_half;
  return {{"junction", {{-h, -h}, {h, -h}, {h, h}, {-h, h}}}};
}

Vec2 ObjectSpec::PositionAt(double t) const {
  const double dt = t - spawn_t;
  return {start.x + velocity.x * dt, start.y + velocity.y * dt};
}

void SensorSpec::Validate() const {
  if (!(rate_hz > 0.0) || !(p_detect >= 0.0 && p_detect <= 1.0) || !(clutter_rate >= 0.0) ||
      !(meas_noise >= 0.0) || !(range > 0.0)) {
    throw Error(ErrorCode::kSpecError, "invalid sensor spec");
  }
}

void CameraSpec::Validate() const {
  intrinsics.Validate();
  face.Validate();
  if (!(rate_hz > 0.0) || !(depth_m > 0.0) || !(noise_px >= 0.0) ||
      !(outlier_rate >= 0.0 && outlier_rate <= 1.0) || (mapping.sign != 1 && mapping.sign != -1)) {
    throw Error(ErrorCode::kSpecError, "invalid camera spec");
  }
}

void ScenarioSpec::Validate() const {
  geometry.Validate();
  sensor.Validate();
  camera.Validate();
  gating.Validate();
  regions.Validate();
  if (!(ego_rate_hz > 0.0)) throw Error(ErrorCode::kSpecError, "ego rate must be positive");
  if (laps.empty()) throw Error(ErrorCode::kSpecError, "scenario needs at least one lap");
  if (roster.min_vehicles < 0 || roster.max_vehicles < roster.min_vehicles ||
      roster.min_pedestrians < 0 || roster.max_pedestrians < roster.min_pedestrians) {
    throw Error(ErrorCode::kSpecError, "invalid roster counts");
  }
}

GazeSpec AttentiveGaze() { return GazeSpec{}; }

GazeSpec InattentiveGaze() {
  GazeSpec g;
  g.profile = GazeProfile::kInattentive;
  g.baseline_sigma_deg = 3.0;
  return g;
}

headpose::Quad ProjectTemplate(const headpose::FaceTemplate& face,
                               const headpose::CameraIntrinsics& k,
                               const Eigen::Matrix3d& r_head, double depth_m) {
  const Eigen::Matrix3d r = r_head * headpose::FrontalRotation();
  const headpose::Quad model = face.ModelMeters();
  headpose::Quad out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector3d x = r * Eigen::Vector3d(model[i].x, model[i].y, 0.0) +
                              Eigen::Vector3d(0.0, 0.0, depth_m);
    if (!(x.z() > 0.0)) throw Error(ErrorCode::kSpecError, "template behind the camera");
    out[i] = headpose::NormalizedToPixel(
        headpose::DistortNormalized({x.x() / x.z(), x.y() / x.z()}, k), k);
  }
  return out;
}

std::vector<headpose::LandmarkFrame> RenderLandmarks(
    std::span<const HeadTruth> truth, const headpose::FaceTemplate& face,
    const headpose::CameraIntrinsics& k, double depth_m, double noise_px, double outlier_rate,
    std::uint64_t seed, std::vector<double>* corrupted_times, double width_px,
    double height_px) {
  auto noise = MakeRng(seed, 0, kLandmarks);
  auto corrupt = MakeRng(seed, 1, kLandmarks);
  std::vector<headpose::LandmarkFrame> frames;
  frames.reserve(truth.size());
  for (const auto& h : truth) {
    headpose::LandmarkFrame f;
    f.t = h.t;
    f.px = ProjectTemplate(face, k, headpose::HeadRotation(h.yaw_cam_deg, h.pitch_deg, h.roll_deg),
                           depth_m);
    for (auto& p : f.px) {
      p.x += Normal(noise, noise_px);
      p.y += Normal(noise, noise_px);
    }
    if (outlier_rate > 0.0 && Uniform(corrupt, 0.0, 1.0) < outlier_rate) {
      for (auto& p : f.px) p = {Uniform(corrupt, 0.0, width_px), Uniform(corrupt, 0.0, height_px)};
      if (corrupted_times) corrupted_times->push_back(h.t);
    }
    frames.push_back(f);
  }
  return frames;
}

Scenario Generate(const ScenarioSpec& spec) {
  spec.Validate();
  const LoopGeometry& g = spec.geometry;
  const double lap_t = LapDuration(g);
  const double total_t = lap_t * static_cast<double>(spec.laps.size());

  Scenario sc;
  sc.spec = spec;
  sc.zones = JunctionZones(g);

  // Ego trajectory: integer-indexed samples so sensor timestamps coincide
  // exactly with pose samples.
  std::vector<geometry::TimedPose> poses;
  const long long n_ego = static_cast<long long>(std::floor(total_t * spec.ego_rate_hz + 1e-9));
  poses.reserve(static_cast<std::size_t>(n_ego + 1));
  for (long long i = 0; i <= n_ego; ++i) {
    const double t = static_cast<double>(i) / spec.ego_rate_hz;
    poses.push_back({t, LapPose(g, g.speed * t)});
  }
  sc.trajectory = geometry::EgoTrajectory(std::move(poses));
  const double t_end = sc.trajectory.end_time();

  int next_id = 1;
  for (std::size_t li = 0; li < spec.laps.size(); ++li) {
    const LapSpec& lap = spec.laps[li];
    const double t0 = lap_t * static_cast<double>(li);
    const double t1 = li + 1 == spec.laps.size() ? t_end + 1e-9 : lap_t * static_cast<double>(li + 1);
    sc.annotations[static_cast<int>(li) + 1] = {lap.driver_id, lap.lap};

    const std::vector<ObjectSpec> rel =
        lap.objects.empty() ? GenerateRoster(spec, lap.scene_seed) : lap.objects;
    std::vector<ObjectSpec> objs;
    for (const auto& o : rel) {
      ObjectSpec a = o;
      a.id = next_id++;
      a.spawn_t = std::max(o.spawn_t + t0, 0.0);
      a.despawn_t = std::min(o.despawn_t + t0, t_end);
      a.start = o.PositionAt(a.spawn_t - t0);
      objs.push_back(a);
    }

    // Detections, drawn in lap-relative order so identical scenes on
    // different laps produce identical logs.
    auto noise = MakeRng(lap.scene_seed, 0, kDetectNoise);
    auto miss = MakeRng(lap.scene_seed, 0, kMiss);
    auto clutter = MakeRng(lap.scene_seed, 0, kClutter);
    std::poisson_distribution<int> n_clutter(spec.sensor.clutter_rate > 0.0 ? spec.sensor.clutter_rate : 1.0);
    const auto [ka, kb] = IndexRange(t0, t1, spec.sensor.rate_hz);
    for (long long k = ka; k < kb; ++k) {
      const double t = static_cast<double>(k) / spec.sensor.rate_hz;
      const Pose2D pose = geometry::InterpolatePose(sc.trajectory, t);
      for (const auto& o : objs) {
        // Draw noise and miss variables unconditionally to keep streams aligned.
        const double nx = Normal(noise, spec.sensor.meas_noise);
        const double ny = Normal(noise, spec.sensor.meas_noise);
        const bool detected = Uniform(miss, 0.0, 1.0) < spec.sensor.p_detect;
        if (!o.Alive(t) || !detected) continue;
        const Vec2 p = o.PositionAt(t);
        if (std::hypot(p.x - pose.x, p.y - pose.y) > spec.sensor.range) continue;
        SynthDetection d;
        d.world = {t, o.cls, {p.x + nx, p.y + ny}, spec.sensor.confidence};
        d.ego = geometry::WorldToEgo(pose, d.world.position);
        d.truth_id = o.id;
        sc.detections.push_back(d);
      }
      const int nc = spec.sensor.clutter_rate > 0.0 ? n_clutter(clutter) : 0;
      for (int c = 0; c < nc; ++c) {
        const Vec2 e = SampleGatingRegion(clutter, spec.gating);
        SynthDetection d;
        d.ego = {e.x, e.y};
        d.world = {t,
                   Uniform(clutter, 0.0, 1.0) < 0.5 ? ObjectClass::kVehicle : ObjectClass::kPedestrian,
                   geometry::EgoToWorld(pose, d.ego), spec.sensor.clutter_confidence};
        sc.detections.push_back(d);
        ++sc.clutter_count;
      }
    }

    // Gaze and head pose.
    const LapGaze gz = GenerateGaze(spec, lap, li, objs, sc.trajectory, t0, t1);
    auto pose_rng = MakeRng(spec.seed, li, kLandmarks + 16);
    for (std::size_t j = 0; j < gz.t.size(); ++j) {
      sc.true_yaw.samples.push_back({gz.t[j], Angle::Degrees(gz.yaw[j]), {}});
      HeadTruth h;
      h.t = gz.t[j];
      h.yaw_cam_deg = spec.camera.mapping.ToCamera(Angle::Degrees(gz.yaw[j])).degrees();
      h.pitch_deg = spec.camera.pitch_deg + Normal(pose_rng, spec.camera.pose_sigma_deg);
      h.roll_deg = Normal(pose_rng, spec.camera.pose_sigma_deg);
      sc.head.push_back(h);
    }

    // Observation flags replayed from the true signals.
    for (std::size_t o = 0; o < objs.size(); ++o) {
      ObjectTruth ot;
      ot.object_id = objs[o].id;
      ot.lap_index = static_cast<int>(li);
      ot.glance_s = gz.glance_s[o];
      for (std::size_t j = 0; j < gz.t.size(); ++j) {
        if (!objs[o].Alive(gz.t[j])) continue;
        const geometry::EgoPoint e = EgoOf(sc.trajectory, objs[o], gz.t[j]);
        if (!attention::Gate(e, spec.gating)) continue;
        ot.gated_s += 1.0 / spec.camera.rate_hz;
        if (attention::GazeHit(Angle::Degrees(gz.yaw[j]), geometry::Bearing(e), spec.regions) ==
            attention::Region::kFocus) {
          ot.fv_dwell_s += 1.0 / spec.camera.rate_hz;
        }
      }
      ot.observed = ot.gated_s > 0.0 && ot.fv_dwell_s >= spec.regions.dwell_min - 1e-9;
      sc.object_truth.push_back(ot);
    }
    sc.objects.insert(sc.objects.end(), objs.begin(), objs.end());
  }

  sc.landmarks = RenderLandmarks(sc.head, spec.camera.face, spec.camera.intrinsics,
                                 spec.camera.depth_m, spec.camera.noise_px,
                                 spec.camera.outlier_rate, spec.seed, &sc.corrupted_times,
                                 spec.camera.width_px, spec.camera.height_px);
  return sc;
}

namespace {

ScenarioSpec BaseSpec(std::uint64_t seed) {
  ScenarioSpec s;
  s.seed = seed;
  return s;
}

std::uint64_t SceneSeed(std::uint64_t seed, std::uint64_t index) {
  return seed * 1000003ULL + index + 1;
}

}  // namespace

ScenarioSpec AttentivePreset(std::uint64_t seed, int laps) {
  ScenarioSpec s = BaseSpec(seed);
  for (int i = 0; i < laps; ++i) {
    s.laps.push_back({"A", i + 1, AttentiveGaze(), SceneSeed(seed, static_cast<std::uint64_t>(i)), {}});
  }
  return s;
}

ScenarioSpec InattentivePreset(std::uint64_t seed, int laps) {
  ScenarioSpec s = BaseSpec(seed);
  for (int i = 0; i < laps; ++i) {
    s.laps.push_back({"A", i + 1, InattentiveGaze(), SceneSeed(seed, static_cast<std::uint64_t>(i)), {}});
  }
  return s;
}

ScenarioSpec PairedCohortPreset(std::uint64_t seed, int pairs) {
  ScenarioSpec s = BaseSpec(seed);
  for (int i = 0; i < pairs; ++i) {
    s.laps.push_back({"att" + std::to_string(i + 1), 1, AttentiveGaze(),
                      SceneSeed(seed, static_cast<std::uint64_t>(i)), {}});
  }
  for (int i = 0; i < pairs; ++i) {
    s.laps.push_back({"ina" + std::to_string(i + 1), 1, InattentiveGaze(),
                      SceneSeed(seed, static_cast<std::uint64_t>(i)), {}});
  }
  return s;
}

ScenarioSpec LapDriftPreset(std::uint64_t seed) {
  ScenarioSpec s = BaseSpec(seed);
  const std::string drivers = "ABCDEFG";
  std::uint64_t scene = 0;
  for (std::size_t d = 0; d < drivers.size(); ++d) {
    const bool degrades = d < 5;
    for (int lap = 1; lap <= 3; ++lap) {
      const GazeSpec gaze = (lap == 1 || !degrades) ? AttentiveGaze() : InattentiveGaze();
      s.laps.push_back({std::string(1, drivers[d]), lap, gaze, SceneSeed(seed, scene++), {}});
    }
  }
  return s;
}

ScenarioSpec ScriptedPreset(std::uint64_t seed) {
  ScenarioSpec s = BaseSpec(seed);
  s.roster.min_vehicles = s.roster.max_vehicles = 1;
  s.roster.min_pedestrians = s.roster.max_pedestrians = 1;
  s.sensor.clutter_rate = 0.0;
  // The glance lands 1.67 s after the target enters the gate and must end
  // while it is still gated.
  s.roster.min_gated_s = 2.8;
  LapSpec lap{"A", 1, {}, SceneSeed(seed, 0), {}};
  lap.gaze.profile = GazeProfile::kScripted;
  lap.gaze.baseline_sigma_deg = 0.5;
  // Resolve the pedestrian's roster index from the generated scene.
  const auto roster = GenerateRoster(s, lap.scene_seed);
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (roster[i].cls == ObjectClass::kPedestrian) {
      lap.gaze.script.push_back({static_cast<int>(i), 1.67, 0.8});
    }
  }
  s.laps.push_back(lap);
  return s;
}

ScenarioSpec PresetByName(const std::string& name, std::uint64_t seed) {
  if (name == "attentive") return AttentivePreset(seed);
  if (name == "inattentive") return InattentivePreset(seed);
  if (name == "paired-cohort") return PairedCohortPreset(seed);
  if (name == "lap-drift") return LapDriftPreset(seed);
  if (name == "scripted") return ScriptedPreset(seed);
  throw Error(ErrorCode::kSpecError, "unknown preset '" + name + "'");
}

CvScene GenerateCvScene(const CvSceneSpec& spec) {
  if (spec.scans <= 0 || !(spec.dt > 0.0) || !(spec.p_detect >= 0.0 && spec.p_detect <= 1.0) ||
      !(spec.meas_noise >= 0.0) || !(spec.clutter_rate >= 0.0) ||
      !(spec.region_max.x > spec.region_min.x) || !(spec.region_max.y > spec.region_min.y)) {
    throw Error(ErrorCode::kSpecError, "invalid constant-velocity scene spec");
  }
  auto noise = MakeRng(spec.seed, 0, kDetectNoise);
  auto miss = MakeRng(spec.seed, 0, kMiss);
  auto clutter = MakeRng(spec.seed, 0, kClutter);
  std::poisson_distribution<int> n_clutter(spec.clutter_rate > 0.0 ? spec.clutter_rate : 1.0);
  CvScene sc;
  for (int k = 0; k < spec.scans; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    sc.times.push_back(t);
    std::vector<Vec2> truth, meas;
    std::vector<int> ids;
    for (std::size_t i = 0; i < spec.targets.size(); ++i) {
      const auto& tg = spec.targets[i];
      const Vec2 p{tg.start.x + tg.velocity.x * t, tg.start.y + tg.velocity.y * t};
      truth.push_back(p);
      const double nx = Normal(noise, spec.meas_noise);
      const double ny = Normal(noise, spec.meas_noise);
      if (Uniform(miss, 0.0, 1.0) < spec.p_detect) {
        meas.push_back({p.x + nx, p.y + ny});
        ids.push_back(static_cast<int>(i));
      }
    }
    const int nc = spec.clutter_rate > 0.0 ? n_clutter(clutter) : 0;
    for (int c = 0; c < nc; ++c) {
      meas.push_back({Uniform(clutter, spec.region_min.x, spec.region_max.x),
                      Uniform(clutter, spec.region_min.y, spec.region_max.y)});
      ids.push_back(-1);
    }
    sc.clutter_count += static_cast<std::size_t>(nc);
    sc.truth.push_back(std::move(truth));
    sc.measurements.push_back(std::move(meas));
    sc.truth_ids.push_back(std::move(ids));
  }
  return sc;
}

std::vector<CohortCase> GenerateCohort(const CohortSpec& spec) {
  auto rng = MakeRng(spec.seed, 0, kCohort);
  std::vector<CohortCase> out;
  auto make = [&](classify::Attention att, classify::Scenario scen) {
    CohortCase c;
    c.attention = att;
    c.scenario = scen;
    const double share = scen == classify::Scenario::kI
                             ? Uniform(rng, 0.0, spec.scenario1_ped_share_max)
                             : Uniform(rng, spec.scenario2_ped_share_min, spec.scenario2_ped_share_max);
    auto& m = c.metrics;
    m.n_ped = static_cast<int>(std::lround(share * 100.0));
    m.n_veh = 100 - m.n_ped;
    m.ped_share = static_cast<double>(m.n_ped) / 100.0;
    double veh_total, veh_fv_share, ped_total, ped_fv_share;
    if (att == classify::Attention::kLow) {
      veh_total = Uniform(rng, 0.0, spec.low_veh_max);
      veh_fv_share = Uniform(rng, 0.0, 0.5);
      ped_total = scen == classify::Scenario::kI
                      ? Uniform(rng, 0.0, spec.low_scenario1_ped_max)
                      : Uniform(rng, veh_total, std::max(veh_total, spec.low_ped_max));
      ped_fv_share = 0.5;
    } else {
      veh_total = Uniform(rng, spec.regular_veh_min, spec.regular_veh_max);
      veh_fv_share = Uniform(rng, 0.5, 1.0);
      ped_total = Uniform(rng, 0.0, spec.regular_ped_max);
      ped_fv_share = Uniform(rng, 0.5, 1.0);
    }
    if (m.n_ped == 0) ped_total = 0.0;
    m.veh_fv = veh_total * veh_fv_share;
    m.veh_pv = veh_total - m.veh_fv;
    m.ped_fv = ped_total * ped_fv_share;
    m.ped_pv = ped_total - m.ped_fv;
    m.ped_absent = m.n_ped == 0;
    m.s_veh = attention::WeightedScore(m.veh_fv, m.veh_pv, 0.5);
    m.s_ped = attention::WeightedScore(m.ped_fv, m.ped_pv, 0.5);
    out.push_back(c);
  };
  for (int i = 0; i < spec.regular_scenario1; ++i) make(classify::Attention::kRegular, classify::Scenario::kI);
  for (int i = 0; i < spec.low_scenario1; ++i) make(classify::Attention::kLow, classify::Scenario::kI);
  for (int i = 0; i < spec.regular_scenario2; ++i) make(classify::Attention::kRegular, classify::Scenario::kII);
  for (int i = 0; i < spec.low_scenario2; ++i) make(classify::Attention::kLow, classify::Scenario::kII);
  return out;
}

}  // namespace drvattn::synth
