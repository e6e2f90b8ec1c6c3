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

#include "drvattn/yawfilter.h"

#include <algorithm>
#include <cmath>

#include "drvattn/error.h"

namespace drvattn::yawfilter {
namespace {

double Median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

void CheckWindow(int window, const char* name) {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidInput,
                std::string(name) + " must be odd and >= 3");
  }
}

}  // namespace

void YawSeries::Validate() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::kInvalidInput,
                  "yaw series timestamps not strictly increasing at index " +
                      std::to_string(i));
    }
  }
}

void FilterConfig::Validate() const {
  CheckWindow(hampel_window, "hampel_window");
  CheckWindow(smooth_window, "smooth_window");
  if (!(hampel_nsigma > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "hampel_nsigma must be positive");
  }
  if (!(max_gap > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "max_gap must be positive");
  }
  if (!(mad_floor_deg > 0.0) || !(ambiguous_nsigma_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "MAD floor and ambiguity scale must be positive");
  }
}

std::vector<double> Unwrap(const YawSeries& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i == 0) {
      out.push_back(series.samples[0].yaw.degrees());
    } else {
      out.push_back(out.back() +
                    (series.samples[i].yaw - series.samples[i - 1].yaw).degrees());
    }
  }
  return out;
}

double MedianPeriod(const YawSeries& series) {
  if (series.size() < 2) return 0.0;
  std::vector<double> dts;
  dts.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    dts.push_back(series.samples[i].t - series.samples[i - 1].t);
  }
  return Median(std::move(dts));
}

FilterResult Hampel(const YawSeries& series, int window, double nsigma,
                    double mad_floor_deg, double ambiguous_nsigma_scale) {
  CheckWindow(window, "hampel window");
  FilterResult result;
  const std::size_t n = series.size();
  const std::size_t w = static_cast<std::size_t>(window);
  if (n < w) {
    result.series = series;
    result.warnings.push_back("series of " + std::to_string(n) +
                              " samples shorter than Hampel window; unchanged");
    return result;
  }
  const std::vector<double> x = Unwrap(series);
  const std::size_t half = w / 2;
  std::vector<double> buf(w);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = std::min(i > half ? i - half : 0, n - w);
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), w, buf.begin());
    const double med = Median(buf);
    for (auto& v : buf) v = std::abs(v - med);
    const double mad = std::max(Median(buf), mad_floor_deg);
    const auto& s = series.samples[i];
    const double k = s.flags.ambiguous ? nsigma * ambiguous_nsigma_scale : nsigma;
    if (std::abs(x[i] - med) > k * 1.4826 * mad) {
      result.removed_times.push_back(s.t);
    } else {
      result.series.samples.push_back(s);
    }
  }
  return result;
}

FilterResult FillGaps(const YawSeries& series, double max_gap) {
  FilterResult result;
  const double period = MedianPeriod(series);
  if (period <= 0.0) {
    result.series = series;
    return result;
  }
  auto& out = result.series.samples;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& cur = series.samples[i];
    if (i > 0) {
      const auto& prev = series.samples[i - 1];
      const double gap = cur.t - prev.t;
      const long missing = std::lround(gap / period) - 1;
      if (missing >= 1 && gap <= max_gap + 1e-9) {
        for (long k = 1; k <= missing; ++k) {
          const double f = static_cast<double>(k) / static_cast<double>(missing + 1);
          YawSample s;
          s.t = prev.t + f * gap;
          s.yaw = geometry::LerpAngle(prev.yaw, cur.yaw, f);
          s.flags.interpolated = true;
          out.push_back(s);
          ++result.interpolated;
        }
      }
    }
    out.push_back(cur);
  }
  return result;
}

YawSeries Smooth(const YawSeries& series, int window, double segment_gap) {
  CheckWindow(window, "smooth window");
  YawSeries out = series;
  const std::size_t n = series.size();
  const std::size_t half = static_cast<std::size_t>(window) / 2;
  const std::vector<double> x = Unwrap(series);
  std::size_t seg_begin = 0;
  while (seg_begin < n) {
    std::size_t seg_end = seg_begin + 1;
    while (seg_end < n &&
           series.samples[seg_end].t - series.samples[seg_end - 1].t <= segment_gap) {
      ++seg_end;
    }
    for (std::size_t i = seg_begin; i < seg_end; ++i) {
      // Symmetric shrinking window keeps the median centered on i.
      const std::size_t reach = std::min({half, i - seg_begin, seg_end - 1 - i});
      std::vector<double> buf(x.begin() + static_cast<std::ptrdiff_t>(i - reach),
                              x.begin() + static_cast<std::ptrdiff_t>(i + reach + 1));
      out.samples[i].yaw = Angle::Degrees(Median(std::move(buf)));
    }
    seg_begin = seg_end;
  }
  return out;
}

FilterResult FilterPipeline(const YawSeries& series, const FilterConfig& config) {
  config.Validate();
  series.Validate();
  FilterResult hampel = Hampel(series, config.hampel_window, config.hampel_nsigma,
                               config.mad_floor_deg, config.ambiguous_nsigma_scale);
  FilterResult filled = FillGaps(hampel.series, config.max_gap);
  FilterResult result;
  result.series = Smooth(filled.series, config.smooth_window, config.max_gap);
  result.removed_times = std::move(hampel.removed_times);
  result.interpolated = filled.interpolated;
  result.warnings = std::move(hampel.warnings);
  result.warnings.insert(result.warnings.end(), filled.warnings.begin(),
                         filled.warnings.end());
  return result;
}

}  // namespace drvattn::yawfilter
