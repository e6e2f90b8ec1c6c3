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

#ifndef DRVATTN_CONFIG_H_
#define DRVATTN_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drvattn/attention.h"
#include "drvattn/classify.h"
#include "drvattn/headpose.h"
#include "drvattn/tracker.h"
#include "drvattn/yawfilter.h"

// Flat `key = value` configuration. Lines starting with '#' are comments.
// Relative paths resolve against the directory of the config file.
namespace drvattn::config {

namespace fs = std::filesystem;

struct Paths {
  std::string trajectory = "trajectory.csv";
  std::string landmarks = "landmarks.jsonl";
  std::string intrinsics = "intrinsics.json";
  std::string face_template;  // empty: built-in template
  std::string detections = "detections.jsonl";
  std::string zones = "zones.json";
  std::string annotations = "annotations.csv";
  std::string output = "out";
};

struct PipelineConfig {
  fs::path base_dir = ".";
  Paths paths;
  headpose::EstimateOptions headpose;
  unsigned threads = 0;
  int yaw_sign = 1;
  std::optional<double> mount_offset_deg;  // empty: calibrate
  double calib_max_rate_dps = 1.0;
  double calib_min_duration_s = 3.0;
  yawfilter::FilterConfig filter;
  tracker::GmphdParams vehicle = tracker::GmphdParams::Vehicle();
  tracker::GmphdParams pedestrian = tracker::GmphdParams::Pedestrian();
  attention::GatingConfig gating;
  attention::GazeRegions regions;
  double min_case_duration = 3.0;
  classify::ClassifyOptions classify;

  fs::path Resolve(const std::string& p) const;
  void Validate() const;
};

// Applies one `key=value` assignment. Throws ConfigError for unknown keys
// or malformed values.
void Set(PipelineConfig& cfg, const std::string& key, const std::string& value);
void ApplyOverride(PipelineConfig& cfg, const std::string& assignment);

PipelineConfig Parse(const std::string& text, const fs::path& base_dir,
                     const std::string& source = "<config>");
PipelineConfig Load(const fs::path& file, const std::vector<std::string>& overrides = {});

// Every key with its current value, in registry order.
std::string Dump(const PipelineConfig& cfg);
std::vector<std::string> Keys();

}  // namespace drvattn::config

#endif  // DRVATTN_CONFIG_H_
