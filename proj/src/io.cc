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

#include "drvattn/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drvattn/error.h"
#include "json.hpp"

namespace drvattn::io {
namespace {

using nlohmann::json;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(Trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool ParseInt(std::string_view s, int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void Issue(std::vector<ParseIssue>* issues, const fs::path& path, std::size_t line,
           std::string code, std::string message) {
  if (issues) issues->push_back({path.string(), line, std::move(code), std::move(message)});
}

[[noreturn]] void Fatal(const fs::path& path, std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kParseError,
              path.string() + (line ? ":" + std::to_string(line) : std::string()) + ": " + message);
}

json ParseJsonDocument(const fs::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    Fatal(path, 0, std::string("invalid JSON: ") + e.what());
  }
}

double FiniteNumber(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("missing or non-numeric '") + key + "'");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite '") + key + "'");
  return v;
}

geometry::Vec2 Pair(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2 ||
      !j.at(key)[0].is_number() || !j.at(key)[1].is_number()) {
    throw std::invalid_argument(std::string("'") + key + "' must be a [x, y] pair");
  }
  const geometry::Vec2 v{j.at(key)[0].get<double>(), j.at(key)[1].get<double>()};
  if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
    throw std::invalid_argument(std::string("non-finite '") + key + "'");
  }
  return v;
}

json PairJson(geometry::Vec2 v) { return json::array({v.x, v.y}); }

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": cannot open for writing");
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": write failed");
}

geometry::EgoTrajectory ReadTrajectoryCsv(const fs::path& path, std::vector<ParseIssue>* issues,
                                          std::size_t* records_in) {
  const auto lines = Lines(ReadFile(path));
  if (lines.empty()) Fatal(path, 1, "empty trajectory file");
  const auto header = SplitCsv(lines[0]);
  if (header.size() != 4 || header[0] != "t" || header[1] != "x" || header[2] != "y" ||
      header[3] != "heading_deg") {
    Fatal(path, 1, "expected header 't,x,y,heading_deg'");
  }
  std::vector<geometry::TimedPose> poses;
  std::size_t n = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    ++n;
    const auto f = SplitCsv(lines[i]);
    double t, x, y, h;
    if (f.size() != 4 || !ParseDouble(f[0], t) || !ParseDouble(f[1], x) || !ParseDouble(f[2], y) ||
        !ParseDouble(f[3], h)) {
      Issue(issues, path, i + 1, "ParseError", "malformed trajectory row");
      continue;
    }
    if (!poses.empty() && !(t > poses.back().t)) {
      Issue(issues, path, i + 1, "InvalidInput", "timestamp not strictly increasing");
      continue;
    }
    poses.push_back({t, {x, y, geometry::Angle::Degrees(h)}});
  }
  if (records_in) *records_in = n;
  if (poses.size() < 2) Fatal(path, 0, "trajectory needs at least 2 valid samples");
  return geometry::EgoTrajectory(std::move(poses));
}

std::string TrajectoryCsv(const geometry::EgoTrajectory& traj) {
  std::string out = "t,x,y,heading_deg\n";
  for (const auto& s : traj.samples()) {
    out += FormatDouble(s.t) + "," + FormatDouble(s.pose.x) + "," + FormatDouble(s.pose.y) + "," +
           FormatDouble(s.pose.heading.degrees()) + "\n";
  }
  return out;
}

std::vector<headpose::LandmarkFrame> ReadLandmarksJsonl(const fs::path& path,
                                                        std::vector<ParseIssue>* issues,
                                                        std::size_t* records_in) {
  const auto lines = Lines(ReadFile(path));
  std::vector<headpose::LandmarkFrame> frames;
  std::size_t n = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    ++n;
    headpose::LandmarkFrame f;
    try {
      const json j = json::parse(lines[i]);
      f.t = FiniteNumber(j, "t");
      f.px = {Pair(j, "A"), Pair(j, "B"), Pair(j, "C"), Pair(j, "D")};
    } catch (const std::exception& e) {
      Issue(issues, path, i + 1, "ParseError", e.what());
      continue;
    }
    if (!frames.empty() && !(f.t > frames.back().t)) {
      Issue(issues, path, i + 1, "InvalidInput", "timestamp not strictly increasing");
      continue;
    }
    frames.push_back(f);
  }
  if (records_in) *records_in = n;
  return frames;
}

std::string LandmarksJsonl(const std::vector<headpose::LandmarkFrame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    json j;
    j["t"] = f.t;
    j["A"] = PairJson(f.px[0]);
    j["B"] = PairJson(f.px[1]);
    j["C"] = PairJson(f.px[2]);
    j["D"] = PairJson(f.px[3]);
    out += j.dump() + "\n";
  }
  return out;
}

headpose::CameraIntrinsics ReadIntrinsicsJson(const fs::path& path) {
  const json j = ParseJsonDocument(path);
  headpose::CameraIntrinsics k;
  try {
    k.fx = FiniteNumber(j, "fx");
    k.fy = FiniteNumber(j, "fy");
    k.cx = FiniteNumber(j, "cx");
    k.cy = FiniteNumber(j, "cy");
    k.k1 = j.contains("k1") ? FiniteNumber(j, "k1") : 0.0;
    k.k2 = j.contains("k2") ? FiniteNumber(j, "k2") : 0.0;
    k.p1 = j.contains("p1") ? FiniteNumber(j, "p1") : 0.0;
    k.p2 = j.contains("p2") ? FiniteNumber(j, "p2") : 0.0;
  } catch (const std::exception& e) {
    Fatal(path, 0, e.what());
  }
  k.Validate();
  return k;
}

std::string IntrinsicsJson(const headpose::CameraIntrinsics& k) {
  json j;
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["k1"] = k.k1;
  j["k2"] = k.k2;
  j["p1"] = k.p1;
  j["p2"] = k.p2;
  return j.dump(2) + "\n";
}

headpose::FaceTemplate ReadTemplateJson(const fs::path& path) {
  const json j = ParseJsonDocument(path);
  headpose::FaceTemplate face;
  try {
    face.points_mm = {Pair(j, "A"), Pair(j, "B"), Pair(j, "C"), Pair(j, "D")};
  } catch (const std::exception& e) {
    Fatal(path, 0, e.what());
  }
  face.Validate();
  return face;
}

std::string TemplateJson(const headpose::FaceTemplate& face) {
  json j;
  j["A"] = PairJson(face.points_mm[0]);
  j["B"] = PairJson(face.points_mm[1]);
  j["C"] = PairJson(face.points_mm[2]);
  j["D"] = PairJson(face.points_mm[3]);
  return j.dump(2) + "\n";
}

std::vector<RawDetection> ReadDetectionsJsonl(const fs::path& path, std::vector<ParseIssue>* issues,
                                              std::size_t* records_in) {
  const auto lines = Lines(ReadFile(path));
  std::vector<RawDetection> out;
  std::size_t n = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    ++n;
    RawDetection d;
    d.line = i + 1;
    try {
      const json j = json::parse(lines[i]);
      d.t = FiniteNumber(j, "t");
      d.x = FiniteNumber(j, "x");
      d.y = FiniteNumber(j, "y");
      if (!j.contains("class") || !j.at("class").is_string()) {
        throw std::invalid_argument("missing 'class'");
      }
      d.cls = tracker::ParseObjectClass(j.at("class").get<std::string>());
      const std::string frame = j.value("frame", std::string("world"));
      if (frame != "world" && frame != "ego") throw std::invalid_argument("unknown frame '" + frame + "'");
      d.ego_frame = frame == "ego";
      d.confidence = j.contains("conf") ? FiniteNumber(j, "conf") : 1.0;
      if (d.confidence < 0.0 || d.confidence > 1.0) throw std::invalid_argument("conf outside [0, 1]");
    } catch (const std::exception& e) {
      Issue(issues, path, i + 1, "ParseError", e.what());
      continue;
    }
    out.push_back(d);
  }
  if (records_in) *records_in = n;
  return out;
}

std::vector<tracker::Detection> ToWorld(const std::vector<RawDetection>& raw,
                                        const geometry::EgoTrajectory& traj,
                                        const std::string& file,
                                        std::vector<ParseIssue>* issues) {
  std::vector<tracker::Detection> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    tracker::Detection d;
    d.t = r.t;
    d.cls = r.cls;
    d.confidence = r.confidence;
    if (r.ego_frame) {
      if (!traj.Contains(r.t)) {
        if (issues) issues->push_back({file, r.line, "OutOfRange", "ego-frame detection outside trajectory time span"});
        continue;
      }
      d.position = geometry::EgoToWorld(geometry::InterpolatePose(traj, r.t), {r.x, r.y});
    } else {
      d.position = {r.x, r.y};
    }
    out.push_back(d);
  }
  return out;
}

std::string DetectionsJsonl(const std::vector<synth::SynthDetection>& dets, bool ego_frame) {
  std::string out;
  for (const auto& d : dets) {
    json j;
    j["t"] = d.world.t;
    j["class"] = std::string(tracker::ToString(d.world.cls));
    j["x"] = ego_frame ? d.ego.x_fwd : d.world.position.x;
    j["y"] = ego_frame ? d.ego.y_lat : d.world.position.y;
    j["frame"] = ego_frame ? "ego" : "world";
    j["conf"] = d.world.confidence;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<attention::Zone> ReadZonesJson(const fs::path& path) {
  const json j = ParseJsonDocument(path);
  std::vector<attention::Zone> zones;
  try {
    if (!j.contains("zones") || !j.at("zones").is_array()) throw std::invalid_argument("missing 'zones' array");
    for (const auto& z : j.at("zones")) {
      attention::Zone zone;
      zone.name = z.value("name", std::string("zone") + std::to_string(zones.size() + 1));
      if (!z.contains("polygon_xy") || !z.at("polygon_xy").is_array()) {
        throw std::invalid_argument("zone '" + zone.name + "' missing 'polygon_xy'");
      }
      for (const auto& p : z.at("polygon_xy")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw std::invalid_argument("zone '" + zone.name + "' has a malformed vertex");
        }
        zone.polygon.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      if (zone.polygon.size() < 3) throw std::invalid_argument("zone '" + zone.name + "' needs >= 3 vertices");
      zones.push_back(std::move(zone));
    }
  } catch (const std::invalid_argument& e) {
    Fatal(path, 0, e.what());
  } catch (const json::exception& e) {
    Fatal(path, 0, e.what());
  }
  return zones;
}

std::string ZonesJson(const std::vector<attention::Zone>& zones) {
  json arr = json::array();
  for (const auto& z : zones) {
    json poly = json::array();
    for (const auto& p : z.polygon) poly.push_back(PairJson(p));
    arr.push_back({{"name", z.name}, {"polygon_xy", poly}});
  }
  return json{{"zones", arr}}.dump(2) + "\n";
}

std::map<int, attention::CaseAnnotation> ReadAnnotationsCsv(const fs::path& path,
                                                            std::vector<ParseIssue>* issues) {
  const auto lines = Lines(ReadFile(path));
  if (lines.empty()) Fatal(path, 1, "empty annotations file");
  const auto header = SplitCsv(lines[0]);
  if (header.size() != 3 || header[0] != "case_id" || header[1] != "driver_id" || header[2] != "lap") {
    Fatal(path, 1, "expected header 'case_id,driver_id,lap'");
  }
  std::map<int, attention::CaseAnnotation> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto f = SplitCsv(lines[i]);
    int id = 0, lap = 0;
    if (f.size() != 3 || !ParseInt(f[0], id) || !ParseInt(f[2], lap) || f[1].empty()) {
      Issue(issues, path, i + 1, "ParseError", "malformed annotation row");
      continue;
    }
    if (out.count(id)) {
      Issue(issues, path, i + 1, "InvalidInput", "duplicate case_id " + std::to_string(id));
      continue;
    }
    out[id] = {std::string(f[1]), lap};
  }
  return out;
}

std::string AnnotationsCsv(const std::map<int, attention::CaseAnnotation>& ann) {
  std::string out = "case_id,driver_id,lap\n";
  for (const auto& [id, a] : ann) {
    out += std::to_string(id) + "," + a.driver_id + "," + std::to_string(a.lap) + "\n";
  }
  return out;
}

std::string GroundTruthJson(const synth::Scenario& sc) {
  json j;
  j["seed"] = sc.spec.seed;
  j["yaw_sign"] = sc.spec.camera.mapping.sign;
  j["mount_offset_deg"] = sc.spec.camera.mapping.mount_offset_deg;
  json laps = json::array();
  for (const auto& l : sc.spec.laps) {
    const char* profile = l.gaze.profile == synth::GazeProfile::kAttentive     ? "attentive"
                          : l.gaze.profile == synth::GazeProfile::kInattentive ? "inattentive"
                                                                               : "scripted";
    laps.push_back({{"driver_id", l.driver_id}, {"lap", l.lap}, {"profile", profile}});
  }
  j["laps"] = laps;
  json objs = json::array();
  for (const auto& o : sc.objects) {
    objs.push_back({{"id", o.id},
                    {"class", std::string(tracker::ToString(o.cls))},
                    {"spawn_t", o.spawn_t},
                    {"despawn_t", o.despawn_t},
                    {"start", PairJson(o.start)},
                    {"velocity", PairJson(o.velocity)}});
  }
  j["objects"] = objs;
  json truth_ids = json::array();
  for (const auto& d : sc.detections) truth_ids.push_back(d.truth_id);
  j["detection_truth_ids"] = truth_ids;
  j["clutter_count"] = sc.clutter_count;
  json yaw = json::array();
  for (const auto& s : sc.true_yaw.samples) yaw.push_back(json::array({s.t, s.yaw.degrees()}));
  j["true_yaw_vehicle_deg"] = yaw;
  j["corrupted_frame_times"] = sc.corrupted_times;
  json observed = json::array();
  for (const auto& o : sc.object_truth) {
    observed.push_back({{"object_id", o.object_id},
                        {"lap_index", o.lap_index},
                        {"gated_s", o.gated_s},
                        {"fv_dwell_s", o.fv_dwell_s},
                        {"glance_s", o.glance_s},
                        {"observed", o.observed}});
  }
  j["object_truth"] = observed;
  return j.dump(1) + "\n";
}

}  // namespace drvattn::io
