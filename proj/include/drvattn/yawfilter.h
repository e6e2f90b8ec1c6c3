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

#ifndef DRVATTN_YAWFILTER_H_
#define DRVATTN_YAWFILTER_H_

#include <limits>
#include <string>
#include <vector>

#include "drvattn/geometry.h"

namespace drvattn::yawfilter {

using geometry::Angle;

struct YawFlags {
  bool ambiguous = false;
  bool interpolated = false;
};

struct YawSample {
  double t = 0.0;
  Angle yaw;
  YawFlags flags;
};

// Time-ordered, strictly increasing timestamps.
struct YawSeries {
  std::vector<YawSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void Validate() const;
};

struct FilterConfig {
  int hampel_window = 11;
  double hampel_nsigma = 3.0;
  int smooth_window = 5;
  double max_gap = 0.5;  // seconds
  double mad_floor_deg = 0.5;
  double ambiguous_nsigma_scale = 0.75;

  void Validate() const;
};

struct FilterResult {
  YawSeries series;
  std::vector<double> removed_times;
  std::size_t interpolated = 0;
  std::vector<std::string> warnings;
};

// Consecutive samples unwrapped so that successive differences lie in
// (-180, 180].
std::vector<double> Unwrap(const YawSeries& series);

// Removes samples farther than nsigma * 1.4826 * MAD from the rolling
// median of a `window`-sample neighborhood (shifted inward at the ends).
// Ambiguous samples use the stricter nsigma * ambiguous_nsigma_scale.
FilterResult Hampel(const YawSeries& series, int window, double nsigma,
                    double mad_floor_deg = 0.5,
                    double ambiguous_nsigma_scale = 0.75);

// Fills gaps no longer than max_gap at the series' median sample period by
// shortest-arc interpolation; longer gaps stay open.
FilterResult FillGaps(const YawSeries& series, double max_gap);

// Centered rolling median (shrinking at the edges) on the unwrapped signal.
// Samples separated by more than segment_gap seconds are smoothed as
// independent segments.
YawSeries Smooth(const YawSeries& series, int window,
                 double segment_gap = std::numeric_limits<double>::infinity());

// Hampel, then gap filling, then smoothing per contiguous segment.
FilterResult FilterPipeline(const YawSeries& series, const FilterConfig& config);

// Median of the sample spacing; 0 for fewer than two samples.
double MedianPeriod(const YawSeries& series);

}  // namespace drvattn::yawfilter

#endif  // DRVATTN_YAWFILTER_H_
