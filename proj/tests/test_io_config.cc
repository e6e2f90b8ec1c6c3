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


#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "drvattn/config.h"
#include "drvattn/error.h"
#include "drvattn/io.h"
#include "drvattn/synth.h"
#include "test_util.h"

namespace io = drvattn::io;
namespace cf = drvattn::config;
namespace g = drvattn::geometry;
using drvattn::ErrorCode;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const drvattn::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidInput;
}

}  // namespace

TEST_CASE("format double round trips") {
  for (double v : {0.0, 0.1, 1.0 / 3.0, -123.456, 1e-300, 6.02e23}) {
    CHECK(std::stod(io::FormatDouble(v)) == v);
  }
  CHECK(io::FormatDouble(0.5) == "0.5");
}

TEST_CASE("trajectory csv round trip and malformed rows") {
  testutil::TempDir dir("traj");
  const g::EgoTrajectory traj({{0.0, {1.0, 2.0, g::Angle::Degrees(10.0)}},
                               {0.1, {1.5, 2.0, g::Angle::Degrees(-170.0)}},
                               {0.2, {2.0, 2.5, g::Angle::Degrees(180.0)}}});
  io::WriteFile(dir.path() / "t.csv", io::TrajectoryCsv(traj));
  std::vector<io::ParseIssue> issues;
  const auto back = io::ReadTrajectoryCsv(dir.path() / "t.csv", &issues);
  CHECK(issues.empty());
  REQUIRE(back.samples().size() == 3);
  CHECK(back.samples()[1].pose.heading.degrees() == -170.0);
  CHECK(back.samples()[2].pose.y == 2.5);

  io::WriteFile(dir.path() / "bad.csv",
                "t,x,y,heading_deg\n0,0,0,0\nabc,1,1,0\n0.1,1,0,0\n0.1,2,0,0\n0.2,3,0,0\n");
  issues.clear();
  std::size_t in = 0;
  const auto partial = io::ReadTrajectoryCsv(dir.path() / "bad.csv", &issues, &in);
  CHECK(in == 5);
  CHECK(partial.samples().size() == 3);
  REQUIRE(issues.size() == 2);
  CHECK(issues[0].line == 3);
  CHECK(issues[1].line == 5);

  io::WriteFile(dir.path() / "hdr.csv", "time,x\n0,0\n");
  CHECK(CodeOf([&] { io::ReadTrajectoryCsv(dir.path() / "hdr.csv", &issues); }) ==
        ErrorCode::kParseError);
  CHECK(CodeOf([&] { io::ReadTrajectoryCsv(dir.path() / "missing.csv", &issues); }) ==
        ErrorCode::kIoError);
}

TEST_CASE("landmark jsonl round trip and skipped records") {
  testutil::TempDir dir("lm");
  std::vector<drvattn::headpose::LandmarkFrame> frames{
      {0.0, {{{1, 2}, {3, 4}, {5, 6}, {7, 8}}}}, {0.1, {{{1.5, 2}, {3, 4}, {5, 6}, {7, 8.25}}}}};
  io::WriteFile(dir.path() / "l.jsonl", io::LandmarksJsonl(frames) + "{\"t\": 0.2, \"A\": [1]}\nnot json\n");
  std::vector<io::ParseIssue> issues;
  std::size_t in = 0;
  const auto back = io::ReadLandmarksJsonl(dir.path() / "l.jsonl", &issues, &in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].px[3].y == 8.25);
  CHECK(in == 4);
  CHECK(issues.size() == 2);
  CHECK(issues[0].line == 3);
}

TEST_CASE("intrinsics and template round trip") {
  testutil::TempDir dir("k");
  drvattn::headpose::CameraIntrinsics k{640.5, 641.0, 320.0, 240.0, 0.01, -0.002, 0.0001, 0.0};
  io::WriteFile(dir.path() / "k.json", io::IntrinsicsJson(k));
  const auto kb = io::ReadIntrinsicsJson(dir.path() / "k.json");
  CHECK(kb.fx == k.fx);
  CHECK(kb.k2 == k.k2);
  drvattn::headpose::FaceTemplate face;
  face.points_mm[0] = {-40.0, 30.0};
  face.points_mm[1] = {40.0, 30.0};
  io::WriteFile(dir.path() / "f.json", io::TemplateJson(face));
  CHECK(io::ReadTemplateJson(dir.path() / "f.json").points_mm[1].x == 40.0);
  io::WriteFile(dir.path() / "bad.json", "{\"fx\": 1}");
  CHECK_THROWS_AS(io::ReadIntrinsicsJson(dir.path() / "bad.json"), drvattn::Error);
}

TEST_CASE("detections in the ego frame map to the world") {
  testutil::TempDir dir("det");
  io::WriteFile(dir.path() / "d.jsonl",
                "{\"t\": 0.5, \"class\": \"vehicle\", \"x\": 3, \"y\": 4, \"frame\": \"ego\", \"conf\": 0.9}\n"
                "{\"t\": 0.5, \"class\": \"pedestrian\", \"x\": 3, \"y\": 4, \"frame\": \"world\", \"conf\": 0.8}\n"
                "{\"t\": 5.0, \"class\": \"vehicle\", \"x\": 3, \"y\": 4, \"frame\": \"ego\", \"conf\": 0.9}\n"
                "{\"t\": 0.6, \"class\": \"bus\", \"x\": 3, \"y\": 4, \"frame\": \"ego\", \"conf\": 0.9}\n");
  std::vector<io::ParseIssue> issues;
  const auto raw = io::ReadDetectionsJsonl(dir.path() / "d.jsonl", &issues);
  CHECK(raw.size() == 3);
  CHECK(issues.size() == 1);
  const g::EgoTrajectory traj({{0.0, {10.0, 0.0, g::Angle::Degrees(90.0)}},
                               {1.0, {10.0, 0.0, g::Angle::Degrees(90.0)}}});
  const auto world = io::ToWorld(raw, traj, "d.jsonl", &issues);
  REQUIRE(world.size() == 2);
  CHECK(world[0].position.x == doctest::Approx(6.0));
  CHECK(world[0].position.y == doctest::Approx(3.0));
  CHECK(world[1].position.x == 3.0);
  CHECK(world[1].cls == drvattn::tracker::ObjectClass::kPedestrian);
  CHECK(issues.size() == 2);
  CHECK(issues[1].code == "OutOfRange");
}

TEST_CASE("zones and annotations round trip") {
  testutil::TempDir dir("z");
  const auto zones = drvattn::synth::JunctionZones({});
  io::WriteFile(dir.path() / "z.json", io::ZonesJson(zones));
  const auto zb = io::ReadZonesJson(dir.path() / "z.json");
  REQUIRE(zb.size() == 1);
  CHECK(zb[0].polygon.size() == zones[0].polygon.size());
  const std::map<int, drvattn::attention::CaseAnnotation> ann{{1, {"A", 1}}, {2, {"B", 3}}};
  io::WriteFile(dir.path() / "a.csv", io::AnnotationsCsv(ann) + "x,y,z\n");
  std::vector<io::ParseIssue> issues;
  const auto ab = io::ReadAnnotationsCsv(dir.path() / "a.csv", &issues);
  CHECK(ab.at(2).driver_id == "B");
  CHECK(ab.at(2).lap == 3);
  CHECK(issues.size() == 1);
}

TEST_CASE("config defaults dump lists every key and reparses") {
  const cf::PipelineConfig def;
  const std::string dump = cf::Dump(def);
  for (const auto& key : cf::Keys()) CHECK(dump.find(key + " = ") != std::string::npos);
  const auto back = cf::Parse(dump, ".");
  CHECK(cf::Dump(back) == dump);
  CHECK(def.filter.hampel_window == 11);
  CHECK(def.vehicle.p_survival == 0.99);
  CHECK(def.pedestrian.process_noise_accel == 0.5);
  CHECK(def.gating.range_fwd == 15.0);
  CHECK(def.regions.pv_weight == 0.5);
  CHECK(def.min_case_duration == 3.0);
  CHECK_FALSE(def.mount_offset_deg.has_value());
}

TEST_CASE("config overrides and errors") {
  cf::PipelineConfig cfg;
  cf::ApplyOverride(cfg, "yawfilter.hampel_window=7");
  cf::ApplyOverride(cfg, "tracker.pedestrian.meas_noise = 0.3");
  cf::ApplyOverride(cfg, "headpose.mount_offset_deg=4.5");
  cf::ApplyOverride(cfg, "classify.stage2=binary");
  CHECK(cfg.filter.hampel_window == 7);
  CHECK(cfg.pedestrian.meas_noise == 0.3);
  CHECK(cfg.mount_offset_deg.value() == 4.5);
  CHECK(cfg.classify.stage2 == drvattn::classify::Stage2Features::kBinary);
  cf::ApplyOverride(cfg, "headpose.mount_offset_deg=auto");
  CHECK_FALSE(cfg.mount_offset_deg.has_value());
  CHECK(CodeOf([&] { cf::ApplyOverride(cfg, "no.such.key=1"); }) == ErrorCode::kConfigError);
  CHECK(CodeOf([&] { cf::ApplyOverride(cfg, "yawfilter.max_gap=fast"); }) == ErrorCode::kConfigError);
  CHECK(CodeOf([&] { cf::ApplyOverride(cfg, "missing_equals"); }) == ErrorCode::kConfigError);
  cfg.filter.hampel_window = 4;
  CHECK(CodeOf([&] { cfg.Validate(); }) == ErrorCode::kConfigError);

  try {
    cf::Parse("# comment\n\nyawfilter.hampel_window = 9\nbogus = 1\n", ".", "c.txt");
    FAIL("expected ConfigError");
  } catch (const drvattn::Error& e) {
    CHECK(std::string(e.what()).find("c.txt:4") != std::string::npos);
  }
}

TEST_CASE("config paths resolve against the file directory") {
  testutil::TempDir dir("cfg");
  io::WriteFile(dir.path() / "sub" / "run.txt", "paths.trajectory = traj.csv\n");
  const auto cfg = cf::Load(dir.path() / "sub" / "run.txt", {"paths.output=o"});
  CHECK(cfg.Resolve(cfg.paths.trajectory) == dir.path() / "sub" / "traj.csv");
  CHECK(cfg.Resolve("/abs/x") == "/abs/x");
  CHECK(cfg.paths.output == "o");
}
