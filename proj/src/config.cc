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

#include "drvattn/config.h"

#include <charconv>
#include <functional>
#include <sstream>

#include "drvattn/error.h"
#include "drvattn/io.h"

namespace drvattn::config {
namespace {

struct Entry {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::kConfigError, key + ": " + what + " (got '" + value + "')");
}

double ToDouble(const std::string& key, const std::string& v) {
  double out = 0.0;
  std::string_view s = v;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) Bad(key, v, "expected a number");
  return out;
}

long long ToInt(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) Bad(key, v, "expected an integer");
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Bad(key, v, "expected true or false");
}

std::string FromBool(bool b) { return b ? "true" : "false"; }

template <typename Member>
Entry Num(std::string key, Member member) {
  return {key,
          [member, key](PipelineConfig& c, const std::string& v) { std::invoke(member, c) = ToDouble(key, v); },
          [member](const PipelineConfig& c) { return io::FormatDouble(std::invoke(member, c)); }};
}

template <typename Member>
Entry Int(std::string key, Member member) {
  return {key,
          [member, key](PipelineConfig& c, const std::string& v) {
            std::invoke(member, c) = static_cast<std::remove_reference_t<decltype(std::invoke(member, c))>>(ToInt(key, v));
          },
          [member](const PipelineConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

template <typename Member>
Entry Str(std::string key, Member member) {
  return {key, [member](PipelineConfig& c, const std::string& v) { std::invoke(member, c) = v; },
          [member](const PipelineConfig& c) { return std::invoke(member, c); }};
}

void AddTracker(std::vector<Entry>& r, const std::string& prefix,
                tracker::GmphdParams& (*sel)(PipelineConfig&),
                const tracker::GmphdParams& (*csel)(const PipelineConfig&)) {
  auto num = [&](const char* name, double tracker::GmphdParams::*m) {
    const std::string key = prefix + name;
    r.push_back({key, [=](PipelineConfig& c, const std::string& v) { sel(c).*m = ToDouble(key, v); },
                 [=](const PipelineConfig& c) { return io::FormatDouble(csel(c).*m); }});
  };
  auto integer = [&](const char* name, int tracker::GmphdParams::*m) {
    const std::string key = prefix + name;
    r.push_back({key, [=](PipelineConfig& c, const std::string& v) { sel(c).*m = static_cast<int>(ToInt(key, v)); },
                 [=](const PipelineConfig& c) { return std::to_string(csel(c).*m); }});
  };
  num("p_survival", &tracker::GmphdParams::p_survival);
  num("p_detect", &tracker::GmphdParams::p_detect);
  num("clutter_density", &tracker::GmphdParams::clutter_density);
  num("process_noise_accel", &tracker::GmphdParams::process_noise_accel);
  num("meas_noise", &tracker::GmphdParams::meas_noise);
  num("prune_threshold", &tracker::GmphdParams::prune_threshold);
  num("merge_threshold", &tracker::GmphdParams::merge_threshold);
  integer("max_components", &tracker::GmphdParams::max_components);
  num("birth_weight", &tracker::GmphdParams::birth_weight);
  const std::string pos_key = prefix + "birth_var_pos";
  r.push_back({pos_key,
               [=](PipelineConfig& c, const std::string& v) {
                 const double x = ToDouble(pos_key, v);
                 sel(c).birth_cov(0, 0) = x;
                 sel(c).birth_cov(1, 1) = x;
               },
               [=](const PipelineConfig& c) { return io::FormatDouble(csel(c).birth_cov(0, 0)); }});
  const std::string vel_key = prefix + "birth_var_vel";
  r.push_back({vel_key,
               [=](PipelineConfig& c, const std::string& v) {
                 const double x = ToDouble(vel_key, v);
                 sel(c).birth_cov(2, 2) = x;
                 sel(c).birth_cov(3, 3) = x;
               },
               [=](const PipelineConfig& c) { return io::FormatDouble(csel(c).birth_cov(2, 2)); }});
  num("extract_threshold", &tracker::GmphdParams::extract_threshold);
  const std::string ab_key = prefix + "adaptive_birth";
  r.push_back({ab_key, [=](PipelineConfig& c, const std::string& v) { sel(c).adaptive_birth = ToBool(ab_key, v); },
               [=](const PipelineConfig& c) { return FromBool(csel(c).adaptive_birth); }});
  num("link_gate", &tracker::GmphdParams::link_gate);
  integer("max_missed_scans", &tracker::GmphdParams::max_missed_scans);
  integer("min_track_states", &tracker::GmphdParams::min_track_states);
  num("min_confidence", &tracker::GmphdParams::min_confidence);
}

const std::vector<Entry>& Registry() {
  static const std::vector<Entry> registry = [] {
    std::vector<Entry> r;
    r.push_back(Str("paths.trajectory", [](auto& c) -> auto& { return c.paths.trajectory; }));
    r.push_back(Str("paths.landmarks", [](auto& c) -> auto& { return c.paths.landmarks; }));
    r.push_back(Str("paths.intrinsics", [](auto& c) -> auto& { return c.paths.intrinsics; }));
    r.push_back(Str("paths.template", [](auto& c) -> auto& { return c.paths.face_template; }));
    r.push_back(Str("paths.detections", [](auto& c) -> auto& { return c.paths.detections; }));
    r.push_back(Str("paths.zones", [](auto& c) -> auto& { return c.paths.zones; }));
    r.push_back(Str("paths.annotations", [](auto& c) -> auto& { return c.paths.annotations; }));
    r.push_back(Str("paths.output", [](auto& c) -> auto& { return c.paths.output; }));

    r.push_back(Num("headpose.ambiguity_flag_ratio", [](auto& c) -> auto& { return c.headpose.ambiguity_flag_ratio; }));
    r.push_back(Num("headpose.max_reproj_err_px", [](auto& c) -> auto& { return c.headpose.max_reproj_err_px; }));
    r.push_back(Int("headpose.threads", [](auto& c) -> auto& { return c.threads; }));
    r.push_back(Int("headpose.yaw_sign", [](auto& c) -> auto& { return c.yaw_sign; }));
    r.push_back({"headpose.mount_offset_deg",
                 [](PipelineConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.mount_offset_deg.reset();
                   } else {
                     c.mount_offset_deg = ToDouble("headpose.mount_offset_deg", v);
                   }
                 },
                 [](const PipelineConfig& c) {
                   return c.mount_offset_deg ? io::FormatDouble(*c.mount_offset_deg) : std::string("auto");
                 }});
    r.push_back(Num("headpose.calib_max_rate_dps", [](auto& c) -> auto& { return c.calib_max_rate_dps; }));
    r.push_back(Num("headpose.calib_min_duration_s", [](auto& c) -> auto& { return c.calib_min_duration_s; }));

    r.push_back(Int("yawfilter.hampel_window", [](auto& c) -> auto& { return c.filter.hampel_window; }));
    r.push_back(Num("yawfilter.hampel_nsigma", [](auto& c) -> auto& { return c.filter.hampel_nsigma; }));
    r.push_back(Int("yawfilter.smooth_window", [](auto& c) -> auto& { return c.filter.smooth_window; }));
    r.push_back(Num("yawfilter.max_gap", [](auto& c) -> auto& { return c.filter.max_gap; }));
    r.push_back(Num("yawfilter.mad_floor_deg", [](auto& c) -> auto& { return c.filter.mad_floor_deg; }));
    r.push_back(Num("yawfilter.ambiguous_nsigma_scale", [](auto& c) -> auto& { return c.filter.ambiguous_nsigma_scale; }));

    AddTracker(r, "tracker.vehicle.", [](PipelineConfig& c) -> tracker::GmphdParams& { return c.vehicle; },
               [](const PipelineConfig& c) -> const tracker::GmphdParams& { return c.vehicle; });
    AddTracker(r, "tracker.pedestrian.", [](PipelineConfig& c) -> tracker::GmphdParams& { return c.pedestrian; },
               [](const PipelineConfig& c) -> const tracker::GmphdParams& { return c.pedestrian; });

    r.push_back(Num("gating.fov_half", [](auto& c) -> auto& { return c.gating.fov_half; }));
    r.push_back(Num("gating.range_fwd", [](auto& c) -> auto& { return c.gating.range_fwd; }));
    r.push_back(Num("gating.range_lat", [](auto& c) -> auto& { return c.gating.range_lat; }));
    r.push_back(Num("regions.fv_half", [](auto& c) -> auto& { return c.regions.fv_half; }));
    r.push_back(Num("regions.pv_band", [](auto& c) -> auto& { return c.regions.pv_band; }));
    r.push_back(Num("regions.pv_weight", [](auto& c) -> auto& { return c.regions.pv_weight; }));
    r.push_back(Num("regions.dwell_min", [](auto& c) -> auto& { return c.regions.dwell_min; }));
    r.push_back(Num("cases.min_duration", [](auto& c) -> auto& { return c.min_case_duration; }));

    r.push_back({"classify.stage2",
                 [](PipelineConfig& c, const std::string& v) {
                   if (v == "score") {
                     c.classify.stage2 = classify::Stage2Features::kScore;
                   } else if (v == "binary") {
                     c.classify.stage2 = classify::Stage2Features::kBinary;
                   } else {
                     Bad("classify.stage2", v, "expected score or binary");
                   }
                 },
                 [](const PipelineConfig& c) {
                   return std::string(c.classify.stage2 == classify::Stage2Features::kScore ? "score" : "binary");
                 }});
    r.push_back(Num("classify.z_min", [](auto& c) -> auto& { return c.classify.z_min; }));
    r.push_back(Num("classify.z_max", [](auto& c) -> auto& { return c.classify.z_max; }));
    return r;
  }();
  return registry;
}

std::string TrimCopy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

fs::path PipelineConfig::Resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

void PipelineConfig::Validate() const {
  try {
    filter.Validate();
    vehicle.Validate();
    pedestrian.Validate();
    gating.Validate();
    regions.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  if (yaw_sign != 1 && yaw_sign != -1) {
    throw Error(ErrorCode::kConfigError, "headpose.yaw_sign must be 1 or -1");
  }
  if (!(headpose.ambiguity_flag_ratio > 0.0 && headpose.ambiguity_flag_ratio <= 1.0) ||
      !(headpose.max_reproj_err_px > 0.0)) {
    throw Error(ErrorCode::kConfigError, "invalid head pose options");
  }
  if (!(calib_max_rate_dps > 0.0) || !(calib_min_duration_s > 0.0) || !(min_case_duration >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "calibration and case durations must be positive");
  }
  if (!(classify.z_min < classify.z_max)) {
    throw Error(ErrorCode::kConfigError, "classify.z_min must be below classify.z_max");
  }
}

void Set(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : Registry()) {
    if (e.key == key) {
      e.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown key '" + key + "'");
}

void ApplyOverride(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "override '" + assignment + "' is not key=value");
  }
  Set(cfg, TrimCopy(assignment.substr(0, eq)), TrimCopy(assignment.substr(eq + 1)));
}

PipelineConfig Parse(const std::string& text, const fs::path& base_dir, const std::string& source) {
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string s = TrimCopy(line);
    if (s.empty() || s.front() == '#') continue;
    try {
      ApplyOverride(cfg, s);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError, source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return cfg;
}

PipelineConfig Load(const fs::path& file, const std::vector<std::string>& overrides) {
  PipelineConfig cfg = Parse(io::ReadFile(file), file.parent_path().empty() ? fs::path(".") : file.parent_path(),
                             file.string());
  for (const auto& o : overrides) ApplyOverride(cfg, o);
  cfg.Validate();
  return cfg;
}

std::string Dump(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& e : Registry()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

std::vector<std::string> Keys() {
  std::vector<std::string> keys;
  for (const auto& e : Registry()) keys.push_back(e.key);
  return keys;
}

}  // namespace drvattn::config
