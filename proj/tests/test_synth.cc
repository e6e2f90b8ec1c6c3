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


#include <algorithm>
#include <cmath>
#include <map>
#include <ranges>
#include <set>
#include <vector>

#include "doctest.h"
#include "drvattn/error.h"
#include "drvattn/headpose.h"
#include "drvattn/io.h"
#include "drvattn/synth.h"
#include "drvattn/yawfilter.h"

namespace sy = drvattn::synth;
namespace at = drvattn::attention;
namespace g = drvattn::geometry;
namespace tr = drvattn::tracker;

namespace {

// Fraction of gated objects that the replayed true gaze observes.
double ObservedFraction(const sy::Scenario& sc) {
  std::vector<tr::Track> tracks;
  for (const auto& o : sc.objects) {
    tr::Track t;
    t.id = o.id;
    t.cls = o.cls;
    for (double time : sc.true_yaw.samples | std::views::transform([](const auto& s) { return s.t; })) {
      if (!o.Alive(time)) continue;
      tr::TrackState st;
      st.t = time;
      const auto p = o.PositionAt(time);
      st.x << p.x, p.y, o.velocity.x, o.velocity.y;
      t.states.push_back(st);
    }
    if (!t.states.empty()) tracks.push_back(t);
  }
  const at::CaseWindow all{1, "", 0, sc.trajectory.start_time(), sc.trajectory.end_time(), ""};
  const auto obs = at::ObserveTracks(sc.true_yaw, tracks, sc.trajectory, all, sc.spec.gating,
                                     sc.spec.regions, 0.5);
  int gated = 0, seen = 0;
  for (const auto& o : obs) {
    if (!o.gated) continue;
    ++gated;
    seen += o.region == at::Region::kFocus;
  }
  REQUIRE(gated > 0);
  return static_cast<double>(seen) / gated;
}

}  // namespace

TEST_CASE("lap geometry") {
  const sy::LoopGeometry geo;
  CHECK(sy::LapLength(geo) == doctest::Approx(4 * 60.0 + 2 * M_PI * 10.0));
  CHECK(sy::LapDuration(geo) == doctest::Approx(sy::LapLength(geo) / geo.speed));
  const auto p0 = sy::LapPose(geo, 0.0);
  CHECK(p0.x == doctest::Approx(0.0));
  CHECK(p0.y == doctest::Approx(-40.0));
  CHECK(p0.heading.degrees() == doctest::Approx(90.0));
  const auto wrap = sy::LapPose(geo, sy::LapLength(geo));
  CHECK(wrap.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(wrap.y == doctest::Approx(-40.0));
  double prev_x = p0.x, prev_y = p0.y;
  for (double s = 0.5; s < sy::LapLength(geo); s += 0.5) {
    const auto p = sy::LapPose(geo, s);
    CHECK(std::hypot(p.x - prev_x, p.y - prev_y) == doctest::Approx(0.5).epsilon(1e-3));
    prev_x = p.x;
    prev_y = p.y;
  }
  CHECK(sy::JunctionZones(geo).size() == 1);
}

TEST_CASE("noise-free detections equal true positions") {
  auto spec = sy::AttentivePreset(4, 1);
  spec.sensor.p_detect = 1.0;
  spec.sensor.meas_noise = 0.0;
  spec.sensor.clutter_rate = 0.0;
  const auto sc = sy::Generate(spec);
  REQUIRE_FALSE(sc.detections.empty());
  CHECK(sc.clutter_count == 0);
  std::map<int, const sy::ObjectSpec*> by_id;
  for (const auto& o : sc.objects) by_id[o.id] = &o;
  for (const auto& d : sc.detections) {
    REQUIRE(d.truth_id >= 0);
    const auto p = by_id.at(d.truth_id)->PositionAt(d.world.t);
    CHECK(d.world.position.x == p.x);
    CHECK(d.world.position.y == p.y);
  }
}

TEST_CASE("every non-clutter detection belongs to one object") {
  const auto sc = sy::Generate(sy::AttentivePreset(2, 2));
  std::set<int> ids;
  for (const auto& o : sc.objects) ids.insert(o.id);
  CHECK(ids.size() == sc.objects.size());
  std::size_t clutter = 0;
  for (const auto& d : sc.detections) {
    if (d.truth_id < 0) {
      ++clutter;
    } else {
      CHECK(ids.count(d.truth_id) == 1);
    }
  }
  CHECK(clutter == sc.clutter_count);
}

TEST_CASE("clutter counts follow Poisson statistics") {
  sy::CvSceneSpec spec;
  spec.scans = 300;
  spec.clutter_rate = 5.0;
  spec.seed = 19;
  const auto scene = sy::GenerateCvScene(spec);
  CHECK(std::abs(static_cast<double>(scene.clutter_count) - 1500.0) <= 3.0 * std::sqrt(1500.0));

  auto sp = sy::AttentivePreset(6, 1);
  sp.sensor.clutter_rate = 5.0;
  const auto sc = sy::Generate(sp);
  std::set<double> scans;
  for (const auto& d : sc.detections) scans.insert(std::round(d.world.t * 1000.0));
  const double scan_count = std::floor(sy::LapDuration(sp.geometry) * sp.sensor.rate_hz) + 1.0;
  const double expect = 5.0 * scan_count;
  CHECK(std::abs(static_cast<double>(sc.clutter_count) - expect) <= 3.0 * std::sqrt(expect) + 1.0);
}

TEST_CASE("generation is deterministic") {
  const auto a = sy::Generate(sy::LapDriftPreset(3));
  const auto b = sy::Generate(sy::LapDriftPreset(3));
  CHECK(drvattn::io::DetectionsJsonl(a.detections, true) ==
        drvattn::io::DetectionsJsonl(b.detections, true));
  CHECK(drvattn::io::LandmarksJsonl(a.landmarks) == drvattn::io::LandmarksJsonl(b.landmarks));
  CHECK(drvattn::io::GroundTruthJson(a) == drvattn::io::GroundTruthJson(b));
  const auto c = sy::Generate(sy::LapDriftPreset(4));
  CHECK(drvattn::io::LandmarksJsonl(a.landmarks) != drvattn::io::LandmarksJsonl(c.landmarks));
}

TEST_CASE("noise streams are independent") {
  auto spec = sy::AttentivePreset(8, 1);
  const auto base = sy::Generate(spec);
  spec.sensor.clutter_rate = 0.0;
  const auto no_clutter = sy::Generate(spec);
  std::vector<g::Vec2> a, b;
  for (const auto& d : base.detections) {
    if (d.truth_id >= 0) a.push_back(d.world.position);
  }
  for (const auto& d : no_clutter.detections) {
    if (d.truth_id >= 0) b.push_back(d.world.position);
  }
  CHECK(a == b);
  CHECK(drvattn::io::LandmarksJsonl(base.landmarks) ==
        drvattn::io::LandmarksJsonl(no_clutter.landmarks));
}

TEST_CASE("attentive gaze observes nearly every gated object") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto sc = sy::Generate(sy::AttentivePreset(seed, 2));
    CHECK(ObservedFraction(sc) >= 0.9);
    int observed = 0;
    for (const auto& o : sc.object_truth) observed += o.observed;
    CHECK(observed >= 0.9 * static_cast<double>(sc.object_truth.size()));
  }
}

TEST_CASE("inattentive gaze observes few gated objects") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto sc = sy::Generate(sy::InattentivePreset(seed, 2));
    CHECK(ObservedFraction(sc) <= 0.1);
  }
}

TEST_CASE("scripted glance observes exactly its target") {
  const auto sc = sy::Generate(sy::ScriptedPreset(1));
  REQUIRE(sc.object_truth.size() == 2);
  int observed = 0;
  for (const auto& o : sc.object_truth) observed += o.observed;
  CHECK(observed == 1);
  const auto& target = sc.objects[sc.spec.laps[0].gaze.script[0].object_index];
  for (const auto& o : sc.object_truth) {
    CHECK(o.observed == (o.object_id == target.id));
  }
  CHECK(target.cls == tr::ObjectClass::kPedestrian);
}

TEST_CASE("rendered landmarks round trip through the estimator") {
  const sy::CameraSpec cam;
  std::vector<sy::HeadTruth> truth;
  for (int i = 0; i <= 16; ++i) truth.push_back({i * 0.1, -40.0 + 5.0 * i, 10.0, 3.0});
  const auto frames =
      sy::RenderLandmarks(truth, cam.face, cam.intrinsics, cam.depth_m, 0.0, 0.0, 1, nullptr);
  REQUIRE(frames.size() == truth.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto s = drvattn::headpose::EstimateHeadPose(frames[i], cam.face, cam.intrinsics);
    CHECK(std::abs(s.yaw.degrees() - truth[i].yaw_cam_deg) <= 0.5);
  }
}

TEST_CASE("frontal landmarks are symmetric about the principal column") {
  const sy::CameraSpec cam;
  const auto q = sy::ProjectTemplate(cam.face, cam.intrinsics,
                                     drvattn::headpose::HeadRotation(0.0, 0.0, 0.0), 0.6);
  const double cx = cam.intrinsics.cx;
  CHECK(q[0].x - cx == doctest::Approx(cx - q[1].x));
  CHECK(q[2].x - cx == doctest::Approx(cx - q[3].x));
  CHECK(q[0].y == doctest::Approx(q[1].y));
  CHECK(q[2].y == doctest::Approx(q[3].y));
}

TEST_CASE("corrupted frames are removed by the yaw filter") {
  auto spec = sy::AttentivePreset(5, 2);
  spec.camera.outlier_rate = 0.05;
  const auto sc = sy::Generate(spec);
  REQUIRE_FALSE(sc.corrupted_times.empty());
  const auto batch = drvattn::headpose::EstimateHeadPoses(sc.landmarks, spec.camera.face,
                                                          spec.camera.intrinsics);
  drvattn::yawfilter::YawSeries raw;
  for (const auto& s : batch.samples) {
    raw.samples.push_back({s.t, spec.camera.mapping.ToVehicle(s.yaw), {s.ambiguous, false}});
  }
  const auto r = drvattn::yawfilter::Hampel(raw, 11, 3.0);
  std::set<long> gone;
  for (double t : r.removed_times) gone.insert(std::lround(t * 1000.0));
  for (const auto& f : batch.failures) gone.insert(std::lround(f.t * 1000.0));
  int removed = 0;
  for (double t : sc.corrupted_times) removed += gone.count(std::lround(t * 1000.0));
  CHECK(removed >= 0.95 * static_cast<double>(sc.corrupted_times.size()));
}

TEST_CASE("specs are validated") {
  auto spec = sy::AttentivePreset(1, 1);
  spec.sensor.rate_hz = 0.0;
  CHECK_THROWS_AS(sy::Generate(spec), drvattn::Error);
  spec = sy::AttentivePreset(1, 1);
  spec.geometry.corner_radius = 50.0;
  CHECK_THROWS_AS(sy::Generate(spec), drvattn::Error);
  CHECK_THROWS_AS(sy::PresetByName("nope", 1), drvattn::Error);
  CHECK_NOTHROW(sy::PresetByName("scripted", 1));
}

TEST_CASE("cohort draws respect the published ranges") {
  sy::CohortSpec spec;
  spec.seed = 11;
  const auto cohort = sy::GenerateCohort(spec);
  REQUIRE(cohort.size() == 25);
  int low = 0, s1 = 0;
  for (const auto& c : cohort) {
    const auto& m = c.metrics;
    const double veh = m.veh_fv + m.veh_pv;
    const double ped = m.ped_fv + m.ped_pv;
    if (c.attention == drvattn::classify::Attention::kLow) {
      ++low;
      CHECK(veh <= 0.2);
    } else {
      CHECK(veh >= 0.3);
      CHECK(veh <= 0.6);
      CHECK(ped <= 0.25);
    }
    if (c.scenario == drvattn::classify::Scenario::kI) {
      ++s1;
      CHECK(m.ped_share <= 0.05);
    } else {
      CHECK(m.ped_share >= 0.05);
      CHECK(m.ped_share <= 0.45);
    }
    CHECK(m.s_veh == doctest::Approx(m.veh_fv + 0.5 * m.veh_pv));
  }
  CHECK(low == 10);
  CHECK(s1 == 15);
}
