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

#ifndef DRVATTN_IO_H_
#define DRVATTN_IO_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drvattn/attention.h"
#include "drvattn/geometry.h"
#include "drvattn/headpose.h"
#include "drvattn/synth.h"
#include "drvattn/tracker.h"

// Log formats. Readers throw IoError for unreadable files and ParseError
// for structural problems (bad header, malformed document); a malformed
// record inside a line-oriented log is skipped and reported as an issue.
namespace drvattn::io {

namespace fs = std::filesystem;

struct ParseIssue {
  std::string file;
  std::size_t line = 0;
  std::string code;
  std::string message;
};

// Shortest round-trip decimal form.
std::string FormatDouble(double v);

std::string ReadFile(const fs::path& path);
void WriteFile(const fs::path& path, const std::string& content);

// Trajectory CSV: header `t,x,y,heading_deg`.
geometry::EgoTrajectory ReadTrajectoryCsv(const fs::path& path, std::vector<ParseIssue>* issues,
                                          std::size_t* records_in = nullptr);
std::string TrajectoryCsv(const geometry::EgoTrajectory& traj);

// Landmark JSONL: {"t": s, "A": [u, v], "B": .., "C": .., "D": ..}.
std::vector<headpose::LandmarkFrame> ReadLandmarksJsonl(const fs::path& path,
                                                        std::vector<ParseIssue>* issues,
                                                        std::size_t* records_in = nullptr);
std::string LandmarksJsonl(const std::vector<headpose::LandmarkFrame>& frames);

headpose::CameraIntrinsics ReadIntrinsicsJson(const fs::path& path);
std::string IntrinsicsJson(const headpose::CameraIntrinsics& k);

// Template override: keys A-D as [x_mm, y_mm].
headpose::FaceTemplate ReadTemplateJson(const fs::path& path);
std::string TemplateJson(const headpose::FaceTemplate& face);

struct RawDetection {
  double t = 0.0;
  tracker::ObjectClass cls = tracker::ObjectClass::kVehicle;
  double x = 0.0;
  double y = 0.0;
  bool ego_frame = false;
  double confidence = 1.0;
  std::size_t line = 0;
};

// Detection JSONL: {"t", "class", "x", "y", "frame": "world"|"ego", "conf"}.
std::vector<RawDetection> ReadDetectionsJsonl(const fs::path& path,
                                              std::vector<ParseIssue>* issues,
                                              std::size_t* records_in = nullptr);
// Ego-frame records are mapped through the interpolated ego pose; records
// outside the trajectory's time span are skipped.
std::vector<tracker::Detection> ToWorld(const std::vector<RawDetection>& raw,
                                        const geometry::EgoTrajectory& traj,
                                        const std::string& file,
                                        std::vector<ParseIssue>* issues);
std::string DetectionsJsonl(const std::vector<synth::SynthDetection>& dets, bool ego_frame);

// Zones JSON: {"zones": [{"name": .., "polygon_xy": [[x, y], ...]}]}.
std::vector<attention::Zone> ReadZonesJson(const fs::path& path);
std::string ZonesJson(const std::vector<attention::Zone>& zones);

// Annotations CSV: header `case_id,driver_id,lap`.
std::map<int, attention::CaseAnnotation> ReadAnnotationsCsv(const fs::path& path,
                                                            std::vector<ParseIssue>* issues);
std::string AnnotationsCsv(const std::map<int, attention::CaseAnnotation>& ann);

std::string GroundTruthJson(const synth::Scenario& sc);

}  // namespace drvattn::io

#endif  // DRVATTN_IO_H_
