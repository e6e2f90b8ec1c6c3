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

#include "drvattn/pipeline.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "drvattn/error.h"
#include "drvattn/io.h"
#include "json.hpp"

namespace drvattn::pipeline {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kStages[] = {"ingest", "headpose", "yawfilter", "track", "analyze", "classify"};

bool InStage(const std::string& entry_stage, const std::string& stage) {
  return entry_stage == stage || entry_stage.rfind(stage + ".", 0) == 0;
}

std::string Fmt(double v) { return io::FormatDouble(v); }

void LogIssues(RunLog* log, const std::vector<io::ParseIssue>& issues) {
  if (!log) return;
  for (const auto& i : issues) {
    log->Warn("ingest", i.code, i.file + ":" + std::to_string(i.line) + ": " + i.message);
  }
}

std::string CodeOf(const std::string& message, const std::string& fallback) {
  const auto colon = message.find(':');
  if (colon == std::string::npos || colon == 0) return fallback;
  const std::string head = message.substr(0, colon);
  for (char c : head) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return fallback;
  }
  return head;
}

ordered_json MetricsJson(const attention::CaseMetrics& m) {
  ordered_json j;
  j["n_veh"] = m.n_veh;
  j["n_ped"] = m.n_ped;
  j["veh_fv"] = m.veh_fv;
  j["veh_pv"] = m.veh_pv;
  j["ped_fv"] = m.ped_fv;
  j["ped_pv"] = m.ped_pv;
  j["ped_share"] = m.ped_share;
  j["s_veh"] = m.s_veh;
  j["s_ped"] = m.s_ped;
  j["veh_absent"] = m.veh_absent;
  j["ped_absent"] = m.ped_absent;
  return j;
}

attention::CaseMetrics MetricsFrom(const json& j) {
  attention::CaseMetrics m;
  m.n_veh = j.at("n_veh").get<int>();
  m.n_ped = j.at("n_ped").get<int>();
  m.veh_fv = j.at("veh_fv").get<double>();
  m.veh_pv = j.at("veh_pv").get<double>();
  m.ped_fv = j.at("ped_fv").get<double>();
  m.ped_pv = j.at("ped_pv").get<double>();
  m.ped_share = j.at("ped_share").get<double>();
  m.s_veh = j.at("s_veh").get<double>();
  m.s_ped = j.at("s_ped").get<double>();
  m.veh_absent = j.at("veh_absent").get<bool>();
  m.ped_absent = j.at("ped_absent").get<bool>();
  return m;
}

ordered_json ModelJson(const classify::KMeansModel& m) {
  ordered_json j;
  j["centroids"] = m.centroids;
  j["assignment"] = m.assignment;
  j["sse"] = m.sse;
  j["iterations"] = m.iterations;
  return j;
}

ordered_json LabelJson(const classify::CaseLabel& l) {
  ordered_json j;
  j["scenario"] = std::string(classify::ToString(l.scenario));
  j["attention"] = std::string(classify::ToString(l.attention));
  j["z_veh"] = l.z_veh;
  j["z_ped"] = l.z_ped;
  j["veh_cluster"] = l.veh_cluster;
  j["ped_cluster"] = l.ped_cluster;
  j["final_cluster"] = l.final_cluster;
  return j;
}

ordered_json CalibrationJson(const Calibration& c) {
  ordered_json j;
  j["yaw_sign"] = c.mapping.sign;
  j["mount_offset_deg"] = c.mapping.mount_offset_deg;
  j["automatic"] = c.automatic;
  j["samples_used"] = c.samples_used;
  j["fallback"] = c.fallback;
  return j;
}

Calibration CalibrationFrom(const json& j) {
  Calibration c;
  c.mapping.sign = j.at("yaw_sign").get<int>();
  c.mapping.mount_offset_deg = j.at("mount_offset_deg").get<double>();
  c.automatic = j.at("automatic").get<bool>();
  c.samples_used = j.at("samples_used").get<std::size_t>();
  c.fallback = j.at("fallback").get<bool>();
  return c;
}

ordered_json LedgerJson(const RunLog& log, const std::string* stage) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : log.ledger) {
    if (stage && !InStage(e.stage, *stage)) continue;
    ordered_json j;
    j["stage"] = e.stage;
    j["code"] = e.code;
    if (e.t) j["t"] = *e.t;
    j["detail"] = e.detail;
    arr.push_back(j);
  }
  return arr;
}

ordered_json AccountingJson(const RunLog& log, const std::string* stage) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : log.accounting) {
    if (stage && !InStage(a.stage, *stage)) continue;
    arr.push_back({{"stage", a.stage}, {"in", a.in}, {"used", a.used}, {"dropped", a.dropped}, {"added", a.added}});
  }
  return arr;
}

void ReadStageInto(const fs::path& file, RunLog& log, std::optional<Calibration>* calibration) {
  if (!fs::exists(file)) return;
  json j;
  try {
    j = json::parse(io::ReadFile(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, file.string() + ": " + e.what());
  }
  for (const auto& e : j.at("warnings")) {
    LedgerEntry le{e.at("stage").get<std::string>(), e.at("code").get<std::string>(),
                   e.at("detail").get<std::string>(), std::nullopt};
    if (e.contains("t")) le.t = e.at("t").get<double>();
    log.ledger.push_back(le);
  }
  for (const auto& a : j.at("accounting")) {
    log.accounting.push_back({a.at("stage").get<std::string>(), a.at("in").get<std::size_t>(),
                              a.at("used").get<std::size_t>(), a.at("dropped").get<std::size_t>(),
                              a.at("added").get<std::size_t>()});
  }
  if (calibration && j.contains("calibration")) *calibration = CalibrationFrom(j.at("calibration"));
}

template <typename F>
auto ParseDoc(const fs::path& file, F&& f) {
  try {
    return f(io::ReadFile(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, file.string() + ": " + e.what());
  }
}

fs::path OutDir(const config::PipelineConfig& cfg) { return cfg.Resolve(cfg.paths.output); }

int ExitCode(const RunLog& log) { return log.ledger.empty() ? 0 : 2; }

std::vector<attention::CaseMetrics> AnalyzedMetrics(const std::vector<CaseRecord>& cases,
                                                    std::vector<int>* ids) {
  std::vector<attention::CaseMetrics> out;
  for (const auto& c : cases) {
    if (!c.metrics) continue;
    out.push_back(*c.metrics);
    if (ids) ids->push_back(c.window.case_id);
  }
  return out;
}

const classify::CaseLabel* FindLabel(const Labels& labels, int case_id) {
  for (const auto& l : labels.labels) {
    if (l.case_id == case_id) return &l;
  }
  return nullptr;
}

}  // namespace

void RunLog::Warn(std::string stage, std::string code, std::string detail, std::optional<double> t) {
  ledger.push_back({std::move(stage), std::move(code), std::move(detail), t});
}

Inputs Ingest(const config::PipelineConfig& cfg, RunLog* log) {
  Inputs in;
  std::vector<io::ParseIssue> issues;
  auto account = [&](const std::string& what, std::size_t n_in, std::size_t used) {
    if (log) log->accounting.push_back({"ingest." + what, n_in, used, n_in - used, 0});
  };

  std::size_t n = 0;
  const fs::path traj_path = cfg.Resolve(cfg.paths.trajectory);
  in.trajectory = io::ReadTrajectoryCsv(traj_path, &issues, &n);
  account("trajectory", n, in.trajectory.samples().size());

  const fs::path lm_path = cfg.Resolve(cfg.paths.landmarks);
  in.landmarks = io::ReadLandmarksJsonl(lm_path, &issues, &n);
  account("landmarks", n, in.landmarks.size());

  in.intrinsics = io::ReadIntrinsicsJson(cfg.Resolve(cfg.paths.intrinsics));
  if (!cfg.paths.face_template.empty()) {
    in.face = io::ReadTemplateJson(cfg.Resolve(cfg.paths.face_template));
  }

  const fs::path det_path = cfg.Resolve(cfg.paths.detections);
  const auto raw = io::ReadDetectionsJsonl(det_path, &issues, &n);
  in.detections = io::ToWorld(raw, in.trajectory, det_path.string(), &issues);
  account("detections", n, in.detections.size());

  in.zones = io::ReadZonesJson(cfg.Resolve(cfg.paths.zones));
  in.annotations = io::ReadAnnotationsCsv(cfg.Resolve(cfg.paths.annotations), &issues);
  LogIssues(log, issues);
  return in;
}

HeadposeOutput RunHeadpose(const Inputs& in, const config::PipelineConfig& cfg, RunLog& log) {
  HeadposeOutput out;
  headpose::BatchResult batch =
      headpose::EstimateHeadPoses(in.landmarks, in.face, in.intrinsics, cfg.headpose, cfg.threads);
  for (const auto& f : batch.failures) log.Warn("headpose", f.code, f.message, f.t);
  log.accounting.push_back({"headpose", in.landmarks.size(), batch.samples.size(), batch.failures.size(), 0});
  out.samples = std::move(batch.samples);

  Calibration& cal = out.calibration;
  cal.mapping.sign = cfg.yaw_sign;
  if (cfg.mount_offset_deg) {
    cal.mapping.mount_offset_deg = *cfg.mount_offset_deg;
  } else {
    const headpose::MountCalibration mc = headpose::CalibrateMountOffset(
        out.samples, in.trajectory, cfg.calib_max_rate_dps, cfg.calib_min_duration_s);
    cal.automatic = true;
    cal.mapping.mount_offset_deg = mc.offset_deg;
    cal.samples_used = mc.samples_used;
    cal.fallback = mc.fallback;
    if (mc.fallback) {
      log.Warn("headpose", "CalibrationFallback", "no straight-driving segment found; mount offset set to 0");
    }
  }
  for (const auto& s : out.samples) {
    out.vehicle_yaw.samples.push_back({s.t, cal.mapping.ToVehicle(s.yaw), {s.ambiguous, false}});
  }
  return out;
}

yawfilter::FilterResult RunYawFilter(const yawfilter::YawSeries& raw,
                                     const config::PipelineConfig& cfg, RunLog& log) {
  yawfilter::FilterResult r;
  if (raw.empty()) {
    log.Warn("yawfilter", "EmptyYaw", "no head pose samples to filter");
    log.accounting.push_back({"yawfilter", 0, 0, 0, 0});
    return r;
  }
  r = yawfilter::FilterPipeline(raw, cfg.filter);
  for (double t : r.removed_times) log.Warn("yawfilter", "Outlier", "sample removed by the outlier filter", t);
  for (const auto& w : r.warnings) log.Warn("yawfilter", CodeOf(w, "FilterWarning"), w);
  log.accounting.push_back(
      {"yawfilter", raw.size(), raw.size() - r.removed_times.size(), r.removed_times.size(), r.interpolated});
  return r;
}

tracker::SceneResult RunTracking(const std::vector<tracker::Detection>& detections,
                                 const config::PipelineConfig& cfg, RunLog& log) {
  tracker::SceneResult scene;
  if (detections.empty()) {
    log.Warn("track", "NoDetections", "detection log is empty");
  } else {
    scene = tracker::TrackScene(detections, cfg.vehicle, cfg.pedestrian);
  }
  if (scene.detections_low_confidence > 0) {
    log.Warn("track", "LowConfidence",
             std::to_string(scene.detections_low_confidence) + " detections below the confidence floor");
  }
  for (const auto& w : scene.warnings) log.Warn("track", CodeOf(w, "TrackerWarning"), w);
  log.accounting.push_back({"track", detections.size(), detections.size() - scene.detections_low_confidence,
                            scene.detections_low_confidence, scene.scans_inserted});
  return scene;
}

std::vector<CaseRecord> RunAnalyze(const Inputs& in, const yawfilter::YawSeries& yaw,
                                   const std::vector<tracker::Track>& tracks,
                                   const config::PipelineConfig& cfg, RunLog& log) {
  const attention::SplitResult split =
      attention::SplitCases(in.trajectory, in.zones, in.annotations, cfg.min_case_duration);
  for (const auto& w : split.warnings) log.Warn("analyze", "NoCases", w);
  if (split.discarded_short > 0) {
    log.Warn("analyze", "ShortTraversal",
             std::to_string(split.discarded_short) + " zone traversals shorter than the minimum case duration");
  }
  std::vector<CaseRecord> out;
  std::size_t excluded = 0;
  for (const auto& w : split.cases) {
    CaseRecord rec;
    rec.window = w;
    if (!in.annotations.count(w.case_id)) {
      log.Warn("analyze", "MissingAnnotation", "case " + std::to_string(w.case_id) + " has no driver/lap annotation");
    }
    rec.observations = attention::ObserveTracks(yaw, tracks, in.trajectory, w, cfg.gating, cfg.regions,
                                                cfg.filter.max_gap);
    try {
      rec.metrics = attention::ComputeCaseMetrics(rec.observations, cfg.regions);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCase) throw;
      rec.excluded = "EmptyCase";
      ++excluded;
      log.Warn("analyze", "EmptyCase", "case " + std::to_string(w.case_id) + ": no gated tracks", w.t0);
    }
    out.push_back(std::move(rec));
  }
  log.accounting.push_back({"analyze", split.cases.size() + split.discarded_short, split.cases.size() - excluded,
                            excluded + split.discarded_short, 0});
  return out;
}

Labels RunClassify(const std::vector<CaseRecord>& cases, const config::PipelineConfig& cfg, RunLog& log) {
  Labels labels;
  const auto metrics = AnalyzedMetrics(cases, &labels.case_ids);
  if (metrics.size() < 2) {
    log.Warn("classify", "InsufficientCases",
             std::to_string(metrics.size()) + " analyzed cases; at least 2 are needed to classify");
  } else {
    try {
      labels.cascade = classify::AttentionClassify(metrics, labels.case_ids, cfg.classify);
      labels.labels = labels.cascade->labels;
      for (const auto& w : labels.cascade->warnings) log.Warn("classify", "DegenerateClustering", w);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateClustering) throw;
      log.Warn("classify", "DegenerateClustering",
               std::string(e.what()) + "; cohort labeled uniformly");
      std::vector<std::string> warnings;
      labels.labels = classify::UniformCohortLabels(metrics, labels.case_ids, &warnings);
      labels.uniform_fallback = true;
      for (const auto& w : warnings) log.Warn("classify", "DegenerateClustering", w);
    }
  }
  const std::size_t used = labels.labels.size();
  log.accounting.push_back({"classify", metrics.size(), used, metrics.size() - used, 0});
  return labels;
}

std::string ReportJson(const std::vector<CaseRecord>& cases, const Labels& labels,
                       const Calibration& calibration, const RunLog& log) {
  ordered_json r;
  r["schema"] = "drvattn.report/1";
  ordered_json arr = ordered_json::array();
  ordered_json excluded = ordered_json::array();
  std::map<std::string, int> by_scenario{{"I", 0}, {"II", 0}};
  std::map<std::string, int> by_attention{{"Low", 0}, {"Regular", 0}};
  std::map<std::string, std::vector<std::tuple<int, int, std::string>>> drivers;
  for (const auto& c : cases) {
    if (!c.metrics) {
      excluded.push_back({{"case_id", c.window.case_id}, {"reason", c.excluded}});
      continue;
    }
    ordered_json j;
    j["case_id"] = c.window.case_id;
    j["driver_id"] = c.window.driver_id;
    j["lap"] = c.window.lap;
    j["zone"] = c.window.zone;
    j["t0"] = c.window.t0;
    j["t1"] = c.window.t1;
    j["metrics"] = MetricsJson(*c.metrics);
    if (const auto* l = FindLabel(labels, c.window.case_id)) {
      j["label"] = LabelJson(*l);
      ++by_scenario[std::string(classify::ToString(l->scenario))];
      ++by_attention[std::string(classify::ToString(l->attention))];
      drivers[c.window.driver_id].emplace_back(c.window.lap, c.window.case_id,
                                               std::string(classify::ToString(l->attention)));
    } else {
      j["label"] = nullptr;
    }
    arr.push_back(j);
  }
  r["cases"] = arr;
  r["excluded_cases"] = excluded;
  ordered_json summary;
  summary["cases"] = arr.size();
  summary["labeled"] = labels.labels.size();
  summary["uniform_fallback"] = labels.uniform_fallback;
  summary["scenario"] = by_scenario;
  summary["attention"] = by_attention;
  r["summary"] = summary;
  ordered_json drv = ordered_json::object();
  for (auto& [id, seq] : drivers) {
    std::sort(seq.begin(), seq.end());
    ordered_json laps = ordered_json::array();
    for (const auto& [lap, case_id, att] : seq) laps.push_back({{"lap", lap}, {"case_id", case_id}, {"attention", att}});
    drv[id] = laps;
  }
  r["drivers"] = drv;
  ordered_json models = nullptr;
  if (labels.cascade) {
    const auto& c = *labels.cascade;
    models = ordered_json::object();
    models["vehicle"] = c.veh_model ? ModelJson(*c.veh_model) : ordered_json(nullptr);
    models["pedestrian"] = c.ped_model ? ModelJson(*c.ped_model) : ordered_json(nullptr);
    models["final"] = ModelJson(c.final_model);
    models["low_cluster"] = c.low_cluster;
    models["scenario"] = c.scenario.model ? ModelJson(*c.scenario.model) : ordered_json(nullptr);
    models["case_ids"] = labels.case_ids;
  }
  r["models"] = models;
  r["calibration"] = CalibrationJson(calibration);
  r["accounting"] = AccountingJson(log, nullptr);
  r["warnings"] = LedgerJson(log, nullptr);
  return r.dump(2) + "\n";
}

PlotData BuildPlotData(const geometry::EgoTrajectory& traj, const yawfilter::YawSeries& raw,
                       const yawfilter::YawSeries& filtered, const std::vector<tracker::Track>& tracks,
                       const std::vector<CaseRecord>& cases, const Labels& labels,
                       const config::PipelineConfig& cfg) {
  PlotData p;
  p.overlay = "t,ego_x,ego_y,ego_heading,yaw_world,track_id,class,obj_x,obj_y\n";
  p.angles = "t,yaw_ego,track_id,bearing,region\n";
  p.bars = "case_id,driver_id,lap,scenario,attention,veh_share,ped_share,veh_fv,veh_pv,ped_fv,ped_pv\n";
  p.yaw = "t,raw_yaw,filtered_yaw\n";

  // Raw and filtered yaw merged on timestamp.
  {
    std::size_t i = 0, j = 0;
    const auto& a = raw.samples;
    const auto& b = filtered.samples;
    while (i < a.size() || j < b.size()) {
      if (j >= b.size() || (i < a.size() && a[i].t < b[j].t)) {
        p.yaw += Fmt(a[i].t) + "," + Fmt(a[i].yaw.degrees()) + ",\n";
        ++i;
      } else if (i >= a.size() || b[j].t < a[i].t) {
        p.yaw += Fmt(b[j].t) + ",," + Fmt(b[j].yaw.degrees()) + "\n";
        ++j;
      } else {
        p.yaw += Fmt(a[i].t) + "," + Fmt(a[i].yaw.degrees()) + "," + Fmt(b[j].yaw.degrees()) + "\n";
        ++i;
        ++j;
      }
    }
  }

  struct Row {
    double t;
    int track;
    std::string text;
  };
  std::vector<Row> overlay, angles;
  for (const auto& c : cases) {
    if (!c.metrics) continue;
    const auto& w = c.window;
    for (const auto& s : filtered.samples) {
      if (s.t < w.t0 || s.t > w.t1) continue;
      const geometry::Pose2D pose = geometry::InterpolatePose(traj, s.t);
      overlay.push_back({s.t, -1,
                         Fmt(s.t) + "," + Fmt(pose.x) + "," + Fmt(pose.y) + "," + Fmt(pose.heading.degrees()) +
                             "," + Fmt((pose.heading + s.yaw).degrees()) + ",,,,\n"});
    }
    for (const auto& tr : tracks) {
      for (const auto& st : tr.states) {
        if (st.t < w.t0 || st.t > w.t1 || !traj.Contains(st.t)) continue;
        const geometry::Pose2D pose = geometry::InterpolatePose(traj, st.t);
        const auto yaw = attention::YawAt(filtered, st.t, cfg.filter.max_gap);
        const std::string cls(tracker::ToString(tr.cls));
        overlay.push_back({st.t, tr.id,
                           Fmt(st.t) + "," + Fmt(pose.x) + "," + Fmt(pose.y) + "," + Fmt(pose.heading.degrees()) +
                               "," + (yaw ? Fmt((pose.heading + *yaw).degrees()) : std::string()) + "," +
                               std::to_string(tr.id) + "," + cls + "," + Fmt(st.x(0)) + "," + Fmt(st.x(1)) +
                               "\n"});
        const geometry::EgoPoint e = geometry::WorldToEgo(pose, {st.x(0), st.x(1)});
        if (!attention::Gate(e, cfg.gating)) continue;
        const geometry::Angle bearing = geometry::Bearing(e);
        std::string region;
        if (yaw) region = std::string(attention::ToString(attention::GazeHit(*yaw, bearing, cfg.regions)));
        angles.push_back({st.t, tr.id,
                          Fmt(st.t) + "," + (yaw ? Fmt(yaw->degrees()) : std::string()) + "," +
                              std::to_string(tr.id) + "," + Fmt(bearing.degrees()) + "," + region + "\n"});
      }
    }
    std::string scenario, att;
    if (const auto* l = FindLabel(labels, w.case_id)) {
      scenario = std::string(classify::ToString(l->scenario));
      att = std::string(classify::ToString(l->attention));
    }
    const auto& m = *c.metrics;
    p.bars += std::to_string(w.case_id) + "," + w.driver_id + "," + std::to_string(w.lap) + "," + scenario + "," +
              att + "," + Fmt(1.0 - m.ped_share) + "," + Fmt(m.ped_share) + "," + Fmt(m.veh_fv) + "," +
              Fmt(m.veh_pv) + "," + Fmt(m.ped_fv) + "," + Fmt(m.ped_pv) + "\n";
  }
  const auto by_time = [](const Row& a, const Row& b) { return std::tie(a.t, a.track) < std::tie(b.t, b.track); };
  std::stable_sort(overlay.begin(), overlay.end(), by_time);
  std::stable_sort(angles.begin(), angles.end(), by_time);
  for (const auto& r : overlay) p.overlay += r.text;
  for (const auto& r : angles) p.angles += r.text;
  return p;
}

std::string HeadposeJsonl(const HeadposeOutput& h) {
  std::string out;
  for (std::size_t i = 0; i < h.samples.size(); ++i) {
    const auto& s = h.samples[i];
    ordered_json j;
    j["t"] = s.t;
    j["yaw"] = s.yaw.degrees();
    j["pitch"] = s.pitch.degrees();
    j["roll"] = s.roll.degrees();
    j["reproj_err"] = s.reproj_err;
    j["ambiguity_ratio"] = s.ambiguity_ratio;
    j["ambiguous"] = s.ambiguous;
    j["gimbal"] = s.gimbal;
    j["yaw_vehicle"] = h.vehicle_yaw.samples[i].yaw.degrees();
    out += j.dump() + "\n";
  }
  return out;
}

HeadposeOutput ParseHeadposeJsonl(const std::string& text, const Calibration& calibration) {
  HeadposeOutput h;
  h.calibration = calibration;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    headpose::HeadPoseSample s;
    s.t = j.at("t").get<double>();
    s.yaw = geometry::Angle::Degrees(j.at("yaw").get<double>());
    s.pitch = geometry::Angle::Degrees(j.at("pitch").get<double>());
    s.roll = geometry::Angle::Degrees(j.at("roll").get<double>());
    s.reproj_err = j.at("reproj_err").get<double>();
    s.ambiguity_ratio = j.at("ambiguity_ratio").get<double>();
    s.ambiguous = j.at("ambiguous").get<bool>();
    s.gimbal = j.at("gimbal").get<bool>();
    h.samples.push_back(s);
    h.vehicle_yaw.samples.push_back(
        {s.t, geometry::Angle::Degrees(j.at("yaw_vehicle").get<double>()), {s.ambiguous, false}});
  }
  return h;
}

std::string YawJsonl(const yawfilter::YawSeries& y) {
  std::string out;
  for (const auto& s : y.samples) {
    ordered_json j;
    j["t"] = s.t;
    j["yaw"] = s.yaw.degrees();
    j["ambiguous"] = s.flags.ambiguous;
    j["interpolated"] = s.flags.interpolated;
    out += j.dump() + "\n";
  }
  return out;
}

yawfilter::YawSeries ParseYawJsonl(const std::string& text) {
  yawfilter::YawSeries y;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    y.samples.push_back({j.at("t").get<double>(), geometry::Angle::Degrees(j.at("yaw").get<double>()),
                         {j.at("ambiguous").get<bool>(), j.at("interpolated").get<bool>()}});
  }
  return y;
}

std::string TracksJsonl(const std::vector<tracker::Track>& tracks) {
  std::string out;
  for (const auto& t : tracks) {
    ordered_json j;
    j["id"] = t.id;
    j["class"] = std::string(tracker::ToString(t.cls));
    ordered_json states = ordered_json::array();
    for (const auto& s : t.states) {
      states.push_back({s.t, s.x(0), s.x(1), s.x(2), s.x(3),
                        s.provenance == tracker::Provenance::kExtracted ? "extracted" : "coasted"});
    }
    j["states"] = states;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<tracker::Track> ParseTracksJsonl(const std::string& text) {
  std::vector<tracker::Track> tracks;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    tracker::Track t;
    t.id = j.at("id").get<int>();
    t.cls = tracker::ParseObjectClass(j.at("class").get<std::string>());
    for (const auto& s : j.at("states")) {
      tracker::TrackState st;
      st.t = s.at(0).get<double>();
      st.x = Eigen::Vector4d(s.at(1).get<double>(), s.at(2).get<double>(), s.at(3).get<double>(),
                             s.at(4).get<double>());
      st.provenance = s.at(5).get<std::string>() == "coasted" ? tracker::Provenance::kCoasted
                                                               : tracker::Provenance::kExtracted;
      t.states.push_back(st);
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::string CasesJsonl(const std::vector<CaseRecord>& cases) {
  std::string out;
  for (const auto& c : cases) {
    ordered_json j;
    j["case_id"] = c.window.case_id;
    j["driver_id"] = c.window.driver_id;
    j["lap"] = c.window.lap;
    j["zone"] = c.window.zone;
    j["t0"] = c.window.t0;
    j["t1"] = c.window.t1;
    j["excluded"] = c.excluded.empty() ? ordered_json(nullptr) : ordered_json(c.excluded);
    j["metrics"] = c.metrics ? MetricsJson(*c.metrics) : ordered_json(nullptr);
    ordered_json obs = ordered_json::array();
    for (const auto& o : c.observations) {
      ordered_json oj;
      oj["track_id"] = o.track_id;
      oj["class"] = std::string(tracker::ToString(o.cls));
      oj["gated"] = o.gated;
      oj["fv_dwell"] = o.fv_dwell;
      oj["pv_dwell"] = o.pv_dwell;
      oj["region"] = std::string(attention::ToString(o.region));
      obs.push_back(oj);
    }
    j["observations"] = obs;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<CaseRecord> ParseCasesJsonl(const std::string& text) {
  std::vector<CaseRecord> cases;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    CaseRecord c;
    c.window.case_id = j.at("case_id").get<int>();
    c.window.driver_id = j.at("driver_id").get<std::string>();
    c.window.lap = j.at("lap").get<int>();
    c.window.zone = j.at("zone").get<std::string>();
    c.window.t0 = j.at("t0").get<double>();
    c.window.t1 = j.at("t1").get<double>();
    if (!j.at("excluded").is_null()) c.excluded = j.at("excluded").get<std::string>();
    if (!j.at("metrics").is_null()) c.metrics = MetricsFrom(j.at("metrics"));
    for (const auto& o : j.at("observations")) {
      attention::TrackObservation ob;
      ob.track_id = o.at("track_id").get<int>();
      ob.cls = tracker::ParseObjectClass(o.at("class").get<std::string>());
      ob.gated = o.at("gated").get<bool>();
      ob.fv_dwell = o.at("fv_dwell").get<double>();
      ob.pv_dwell = o.at("pv_dwell").get<double>();
      const std::string r = o.at("region").get<std::string>();
      ob.region = r == "FV" ? attention::Region::kFocus
                  : r == "PV" ? attention::Region::kPeripheral
                              : attention::Region::kNone;
      c.observations.push_back(ob);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string LabelsJson(const std::vector<CaseRecord>& cases, const Labels& labels) {
  ordered_json j;
  ordered_json arr = ordered_json::array();
  {
    for (const auto& l : labels.labels) {
      ordered_json lj = LabelJson(l);
      lj["case_id"] = l.case_id;
      arr.push_back(lj);
    }
  }
  j["labels"] = arr;
  j["analyzed_cases"] = AnalyzedMetrics(cases, nullptr).size();
  j["uniform_fallback"] = labels.uniform_fallback;
  return j.dump(2) + "\n";
}

std::string StageJson(const std::string& stage, const RunLog& log, const std::optional<Calibration>& calibration) {
  ordered_json j;
  j["stage"] = stage;
  j["accounting"] = AccountingJson(log, &stage);
  j["warnings"] = LedgerJson(log, &stage);
  if (calibration) j["calibration"] = CalibrationJson(*calibration);
  return j.dump(2) + "\n";
}

RunResult RunPipeline(const config::PipelineConfig& cfg) {
  cfg.Validate();
  RunResult r;
  const Inputs in = Ingest(cfg, &r.log);
  r.headpose = RunHeadpose(in, cfg, r.log);
  r.filtered = RunYawFilter(r.headpose.vehicle_yaw, cfg, r.log);
  r.scene = RunTracking(in.detections, cfg, r.log);
  r.cases = RunAnalyze(in, r.filtered.series, r.scene.tracks, cfg, r.log);
  r.labels = RunClassify(r.cases, cfg, r.log);
  r.report = ReportJson(r.cases, r.labels, r.headpose.calibration, r.log);
  r.plots = BuildPlotData(in.trajectory, r.headpose.vehicle_yaw, r.filtered.series, r.scene.tracks, r.cases,
                          r.labels, cfg);
  return r;
}

namespace {

void WritePlots(const fs::path& out, const PlotData& p) {
  io::WriteFile(out / "overlay.csv", p.overlay);
  io::WriteFile(out / "angles.csv", p.angles);
  io::WriteFile(out / "bars.csv", p.bars);
  io::WriteFile(out / "yaw_filtered.csv", p.yaw);
}

fs::path Need(const fs::path& file, const char* producer) {
  if (!fs::exists(file)) {
    throw Error(ErrorCode::kIoError, file.string() + ": missing; run the '" + producer + "' stage first");
  }
  return file;
}

Calibration LoadCalibration(const fs::path& out) {
  RunLog scratch;
  std::optional<Calibration> cal;
  ReadStageInto(Need(out / "stage_headpose.json", "headpose"), scratch, &cal);
  if (!cal) throw Error(ErrorCode::kParseError, (out / "stage_headpose.json").string() + ": no calibration");
  return *cal;
}

}  // namespace

int CmdIngest(const config::PipelineConfig& cfg) {
  RunLog log;
  Ingest(cfg, &log);
  io::WriteFile(OutDir(cfg) / "stage_ingest.json", StageJson("ingest", log));
  return ExitCode(log);
}

int CmdHeadpose(const config::PipelineConfig& cfg) {
  RunLog log;
  const Inputs in = Ingest(cfg, nullptr);
  const HeadposeOutput h = RunHeadpose(in, cfg, log);
  const fs::path out = OutDir(cfg);
  io::WriteFile(out / "headpose.jsonl", HeadposeJsonl(h));
  io::WriteFile(out / "stage_headpose.json", StageJson("headpose", log, h.calibration));
  return ExitCode(log);
}

int CmdTrack(const config::PipelineConfig& cfg) {
  RunLog log;
  const Inputs in = Ingest(cfg, nullptr);
  const tracker::SceneResult scene = RunTracking(in.detections, cfg, log);
  const fs::path out = OutDir(cfg);
  io::WriteFile(out / "tracks.jsonl", TracksJsonl(scene.tracks));
  io::WriteFile(out / "stage_track.json", StageJson("track", log));
  return ExitCode(log);
}

int CmdAnalyze(const config::PipelineConfig& cfg) {
  RunLog log;
  const fs::path out = OutDir(cfg);
  const Inputs in = Ingest(cfg, nullptr);
  const Calibration cal = LoadCalibration(out);
  const HeadposeOutput h = ParseDoc(Need(out / "headpose.jsonl", "headpose"),
                                    [&](const std::string& s) { return ParseHeadposeJsonl(s, cal); });
  const auto tracks = ParseDoc(Need(out / "tracks.jsonl", "track"), ParseTracksJsonl);
  const yawfilter::FilterResult f = RunYawFilter(h.vehicle_yaw, cfg, log);
  const auto cases = RunAnalyze(in, f.series, tracks, cfg, log);
  io::WriteFile(out / "yaw_filtered.jsonl", YawJsonl(f.series));
  io::WriteFile(out / "cases.jsonl", CasesJsonl(cases));
  io::WriteFile(out / "stage_yawfilter.json", StageJson("yawfilter", log));
  io::WriteFile(out / "stage_analyze.json", StageJson("analyze", log));
  return ExitCode(log);
}

int CmdClassify(const config::PipelineConfig& cfg) {
  RunLog log;
  const fs::path out = OutDir(cfg);
  const auto cases = ParseDoc(Need(out / "cases.jsonl", "analyze"), ParseCasesJsonl);
  const Labels labels = RunClassify(cases, cfg, log);
  io::WriteFile(out / "labels.json", LabelsJson(cases, labels));
  io::WriteFile(out / "stage_classify.json", StageJson("classify", log));
  return ExitCode(log);
}

int CmdReport(const config::PipelineConfig& cfg) {
  const fs::path out = OutDir(cfg);
  RunLog log;
  for (const char* stage : kStages) ReadStageInto(out / (std::string("stage_") + stage + ".json"), log, nullptr);
  const Calibration cal = LoadCalibration(out);
  const auto cases = ParseDoc(Need(out / "cases.jsonl", "analyze"), ParseCasesJsonl);
  // Clustering is deterministic, so labels are recomputed from the cases
  // rather than parsed back.
  RunLog scratch;
  const Labels labels = RunClassify(cases, cfg, scratch);
  const Inputs in = Ingest(cfg, nullptr);
  const HeadposeOutput h = ParseDoc(Need(out / "headpose.jsonl", "headpose"),
                                    [&](const std::string& s) { return ParseHeadposeJsonl(s, cal); });
  const auto yaw = ParseDoc(Need(out / "yaw_filtered.jsonl", "analyze"), ParseYawJsonl);
  const auto tracks = ParseDoc(Need(out / "tracks.jsonl", "track"), ParseTracksJsonl);
  io::WriteFile(out / "report.json", ReportJson(cases, labels, cal, log));
  WritePlots(out, BuildPlotData(in.trajectory, h.vehicle_yaw, yaw, tracks, cases, labels, cfg));
  return ExitCode(log);
}

int CmdRun(const config::PipelineConfig& cfg) {
  const RunResult r = RunPipeline(cfg);
  const fs::path out = OutDir(cfg);
  io::WriteFile(out / "headpose.jsonl", HeadposeJsonl(r.headpose));
  io::WriteFile(out / "yaw_filtered.jsonl", YawJsonl(r.filtered.series));
  io::WriteFile(out / "tracks.jsonl", TracksJsonl(r.scene.tracks));
  io::WriteFile(out / "cases.jsonl", CasesJsonl(r.cases));
  io::WriteFile(out / "labels.json", LabelsJson(r.cases, r.labels));
  for (const char* stage : kStages) {
    const std::string s(stage);
    io::WriteFile(out / ("stage_" + s + ".json"),
                  StageJson(s, r.log, s == "headpose" ? std::optional(r.headpose.calibration) : std::nullopt));
  }
  io::WriteFile(out / "report.json", r.report);
  WritePlots(out, r.plots);
  return ExitCode(r.log);
}

void WriteScenarioDir(const synth::Scenario& sc, const fs::path& dir) {
  fs::create_directories(dir);
  io::WriteFile(dir / "trajectory.csv", io::TrajectoryCsv(sc.trajectory));
  io::WriteFile(dir / "landmarks.jsonl", io::LandmarksJsonl(sc.landmarks));
  io::WriteFile(dir / "intrinsics.json", io::IntrinsicsJson(sc.spec.camera.intrinsics));
  io::WriteFile(dir / "template.json", io::TemplateJson(sc.spec.camera.face));
  io::WriteFile(dir / "detections.jsonl", io::DetectionsJsonl(sc.detections, true));
  io::WriteFile(dir / "zones.json", io::ZonesJson(sc.zones));
  io::WriteFile(dir / "annotations.csv", io::AnnotationsCsv(sc.annotations));
  io::WriteFile(dir / "ground_truth.json", io::GroundTruthJson(sc));
  config::PipelineConfig cfg;
  cfg.paths.face_template = "template.json";
  cfg.yaw_sign = sc.spec.camera.mapping.sign;
  io::WriteFile(dir / "config.txt", "# synthetic scenario, seed " + std::to_string(sc.spec.seed) + "\n" +
                                        config::Dump(cfg));
}

}  // namespace drvattn::pipeline
