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

#ifndef DRVATTN_PIPELINE_H_
#define DRVATTN_PIPELINE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drvattn/attention.h"
#include "drvattn/classify.h"
#include "drvattn/config.h"
#include "drvattn/geometry.h"
#include "drvattn/headpose.h"
#include "drvattn/synth.h"
#include "drvattn/tracker.h"
#include "drvattn/yawfilter.h"

// Batch orchestration: ingest -> headpose -> yawfilter -> track -> cases ->
// observe -> metrics -> classify -> report. Each stage persists its output
// in the output directory so stages can be re-run independently.
namespace drvattn::pipeline {

namespace fs = std::filesystem;

struct LedgerEntry {
  std::string stage;
  std::string code;
  std::string detail;
  std::optional<double> t;
};

// in = used + dropped for every stage; added counts synthesized records
// (interpolated yaw samples).
struct Accounting {
  std::string stage;
  std::size_t in = 0;
  std::size_t used = 0;
  std::size_t dropped = 0;
  std::size_t added = 0;
};

struct RunLog {
  std::vector<LedgerEntry> ledger;
  std::vector<Accounting> accounting;
  void Warn(std::string stage, std::string code, std::string detail,
            std::optional<double> t = std::nullopt);
};

struct Inputs {
  geometry::EgoTrajectory trajectory{{{0.0, {}}, {1.0, {}}}};
  std::vector<headpose::LandmarkFrame> landmarks;
  headpose::CameraIntrinsics intrinsics;
  headpose::FaceTemplate face;
  std::vector<tracker::Detection> detections;
  std::vector<attention::Zone> zones;
  std::map<int, attention::CaseAnnotation> annotations;
};

// Reads every input log. Unreadable or structurally invalid files throw;
// malformed records are skipped and, when log is given, recorded.
Inputs Ingest(const config::PipelineConfig& cfg, RunLog* log);

struct Calibration {
  headpose::YawMapping mapping;
  bool automatic = false;
  std::size_t samples_used = 0;
  bool fallback = false;
};

struct HeadposeOutput {
  std::vector<headpose::HeadPoseSample> samples;
  Calibration calibration;
  yawfilter::YawSeries vehicle_yaw;
};

HeadposeOutput RunHeadpose(const Inputs& in, const config::PipelineConfig& cfg, RunLog& log);
yawfilter::FilterResult RunYawFilter(const yawfilter::YawSeries& raw,
                                     const config::PipelineConfig& cfg, RunLog& log);
tracker::SceneResult RunTracking(const std::vector<tracker::Detection>& detections,
                                 const config::PipelineConfig& cfg, RunLog& log);

struct CaseRecord {
  attention::CaseWindow window;
  std::vector<attention::TrackObservation> observations;
  std::optional<attention::CaseMetrics> metrics;  // empty when excluded
  std::string excluded;                           // reason code
};

std::vector<CaseRecord> RunAnalyze(const Inputs& in, const yawfilter::YawSeries& yaw,
                                   const std::vector<tracker::Track>& tracks,
                                   const config::PipelineConfig& cfg, RunLog& log);

struct Labels {
  std::vector<int> case_ids;
  std::vector<classify::CaseLabel> labels;  // empty when classification failed
  std::optional<classify::CascadeResult> cascade;
  bool uniform_fallback = false;
};

Labels RunClassify(const std::vector<CaseRecord>& cases, const config::PipelineConfig& cfg,
                   RunLog& log);

// Report JSON (schema drvattn.report/1).
std::string ReportJson(const std::vector<CaseRecord>& cases, const Labels& labels,
                       const Calibration& calibration, const RunLog& log);

struct PlotData {
  std::string overlay;  // t,ego_x,ego_y,ego_heading,yaw_world,track_id,class,obj_x,obj_y
  std::string angles;   // t,yaw_ego,track_id,bearing,region
  std::string bars;     // per-case stacked bar columns
  std::string yaw;      // t,raw_yaw,filtered_yaw
};

PlotData BuildPlotData(const geometry::EgoTrajectory& traj, const yawfilter::YawSeries& raw,
                       const yawfilter::YawSeries& filtered,
                       const std::vector<tracker::Track>& tracks,
                       const std::vector<CaseRecord>& cases, const Labels& labels,
                       const config::PipelineConfig& cfg);

// Stage persistence.
std::string HeadposeJsonl(const HeadposeOutput& h);
HeadposeOutput ParseHeadposeJsonl(const std::string& text, const Calibration& calibration);
std::string YawJsonl(const yawfilter::YawSeries& y);
yawfilter::YawSeries ParseYawJsonl(const std::string& text);
std::string TracksJsonl(const std::vector<tracker::Track>& tracks);
std::vector<tracker::Track> ParseTracksJsonl(const std::string& text);
std::string CasesJsonl(const std::vector<CaseRecord>& cases);
std::vector<CaseRecord> ParseCasesJsonl(const std::string& text);
std::string LabelsJson(const std::vector<CaseRecord>& cases, const Labels& labels);
std::string StageJson(const std::string& stage, const RunLog& log,
                      const std::optional<Calibration>& calibration = std::nullopt);

// Subcommands. Each returns the process exit code: 0 success, 2 completed
// with ledger warnings. Fatal input problems throw drvattn::Error.
int CmdIngest(const config::PipelineConfig& cfg);
int CmdHeadpose(const config::PipelineConfig& cfg);
int CmdTrack(const config::PipelineConfig& cfg);
int CmdAnalyze(const config::PipelineConfig& cfg);
int CmdClassify(const config::PipelineConfig& cfg);
int CmdReport(const config::PipelineConfig& cfg);
int CmdRun(const config::PipelineConfig& cfg);

// In-memory end-to-end run; writes nothing.
struct RunResult {
  std::string report;
  PlotData plots;
  std::vector<CaseRecord> cases;
  Labels labels;
  RunLog log;
  HeadposeOutput headpose;
  yawfilter::FilterResult filtered;
  tracker::SceneResult scene;
};

RunResult RunPipeline(const config::PipelineConfig& cfg);

// Writes a complete scenario directory (logs, config.txt, ground_truth.json).
void WriteScenarioDir(const synth::Scenario& sc, const fs::path& dir);

}  // namespace drvattn::pipeline

#endif  // DRVATTN_PIPELINE_H_
