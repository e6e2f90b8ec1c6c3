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
#include <random>
#include <vector>

#include "doctest.h"
#include "drvattn/error.h"
#include "drvattn/yawfilter.h"

namespace yf = drvattn::yawfilter;
using drvattn::geometry::Angle;

namespace {

yf::YawSeries Series(const std::vector<double>& yaw, double dt = 0.1, double t0 = 0.0) {
  yf::YawSeries s;
  for (std::size_t i = 0; i < yaw.size(); ++i) {
    s.samples.push_back({t0 + static_cast<double>(i) * dt, Angle::Degrees(yaw[i]), {}});
  }
  return s;
}

yf::YawSeries FromTimes(const std::vector<double>& t, const std::vector<double>& yaw) {
  yf::YawSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.samples.push_back({t[i], Angle::Degrees(yaw[i]), {}});
  return s;
}

}  // namespace

TEST_CASE("hampel removes a single spike") {
  std::vector<double> y(30, 10.0);
  y[15] = 80.0;
  const auto r = yf::Hampel(Series(y), 11, 3.0);
  REQUIRE(r.removed_times.size() == 1);
  CHECK(r.removed_times[0] == doctest::Approx(1.5));
  CHECK(r.series.size() == 29);
  for (const auto& s : r.series.samples) CHECK(s.yaw.degrees() == 10.0);
}

TEST_CASE("hampel keeps a constant series") {
  const auto r = yf::Hampel(Series(std::vector<double>(40, -3.0)), 11, 3.0);
  CHECK(r.removed_times.empty());
  CHECK(r.series.size() == 40);
}

TEST_CASE("hampel on a short series warns and passes through") {
  const auto r = yf::Hampel(Series({1.0, 2.0, 50.0}), 11, 3.0);
  CHECK(r.series.size() == 3);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("hampel is stricter for ambiguous samples") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> y;
  for (int i = 0; i < 41; ++i) y.push_back(n(rng));
  y[20] = 20.0;
  auto plain = Series(y);
  const auto keep = yf::Hampel(plain, 11, 3.0);
  auto flagged = plain;
  flagged.samples[20].flags.ambiguous = true;
  const auto loose = yf::Hampel(plain, 11, 1000.0);
  const auto strict = yf::Hampel(flagged, 11, 1000.0, 0.5, 1e-3);
  CHECK(std::count(keep.removed_times.begin(), keep.removed_times.end(), 2.0) == 1);
  CHECK(loose.removed_times.empty());
  CHECK(std::count(strict.removed_times.begin(), strict.removed_times.end(), 2.0) == 1);
}

TEST_CASE("hampel works across the wrap boundary") {
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(170.0 + i * 0.5);
  y[20] = 90.0;
  const auto r = yf::Hampel(Series(y), 11, 3.0);
  REQUIRE(r.removed_times.size() == 1);
  CHECK(r.removed_times[0] == doctest::Approx(2.0));
}

TEST_CASE("hampel spike injection on a sinusoid") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::uniform_real_distribution<double> mag(30.0, 90.0), u(0.0, 1.0);
  std::vector<double> y;
  std::vector<bool> spike;
  for (int i = 0; i < 600; ++i) {
    const double t = i * 0.1;
    double v = 30.0 * std::sin(2.0 * M_PI * 0.1 * t) + noise(rng);
    const bool s = u(rng) < 0.05;
    if (s) v += (u(rng) < 0.5 ? -1.0 : 1.0) * mag(rng);
    y.push_back(v);
    spike.push_back(s);
  }
  const auto r = yf::Hampel(Series(y), 11, 3.0);
  int spikes = 0, caught = 0, clean = 0, false_rej = 0;
  for (int i = 0; i < 600; ++i) {
    const bool removed = std::find_if(r.removed_times.begin(), r.removed_times.end(), [&](double t) {
                           return std::abs(t - i * 0.1) < 1e-9;
                         }) != r.removed_times.end();
    if (spike[i]) {
      ++spikes;
      caught += removed;
    } else {
      ++clean;
      false_rej += removed;
    }
  }
  CHECK(caught >= 0.95 * spikes);
  CHECK(false_rej <= 0.01 * clean);
}

TEST_CASE("fill gaps below and above the threshold") {
  const auto small = yf::FillGaps(FromTimes({0.0, 0.1, 0.3, 0.4}, {0.0, 0.0, 0.0, 0.0}), 0.5);
  CHECK(small.series.size() == 5);
  CHECK(small.interpolated == 1);
  CHECK(small.series.samples[2].flags.interpolated);
  CHECK(small.series.samples[2].t == doctest::Approx(0.2));

  const auto big = yf::FillGaps(FromTimes({0.0, 0.1, 1.1, 1.2}, {0.0, 0.0, 0.0, 0.0}), 0.5);
  CHECK(big.series.size() == 4);
  CHECK(big.interpolated == 0);
}

TEST_CASE("fill gaps interpolates linearly") {
  const auto r = yf::FillGaps(FromTimes({0.0, 0.1, 0.2, 0.5, 0.6}, {0.0, 5.0, 10.0, 20.0, 20.0}), 0.5);
  REQUIRE(r.series.size() == 7);
  CHECK(r.series.samples[3].yaw.degrees() == doctest::Approx(13.333333333));
  CHECK(r.series.samples[4].yaw.degrees() == doctest::Approx(16.666666667));
}

TEST_CASE("fill gaps takes the short arc") {
  const auto r = yf::FillGaps(FromTimes({0.0, 0.1, 0.3, 0.4}, {170.0, 176.0, -176.0, -170.0}), 0.5);
  REQUIRE(r.series.size() == 5);
  CHECK(std::abs(r.series.samples[2].yaw.degrees()) == doctest::Approx(180.0));
}

TEST_CASE("smooth examples") {
  const auto c = yf::Smooth(Series(std::vector<double>(20, 7.0)), 5);
  for (const auto& s : c.samples) CHECK(s.yaw.degrees() == 7.0);

  std::vector<double> ramp;
  std::vector<double> truth;
  for (int i = 0; i < 50; ++i) {
    truth.push_back(i * 0.5);
    ramp.push_back(truth.back() + (i % 7 == 3 ? 3.0 : 0.0));
  }
  const auto sm = yf::Smooth(Series(ramp), 5);
  for (int i = 0; i < 50; ++i) CHECK(std::abs(sm.samples[i].yaw.degrees() - truth[i]) < 1.0);

  std::vector<double> step(30, 0.0);
  for (int i = 15; i < 30; ++i) step[i] = 20.0;
  const auto st = yf::Smooth(Series(step), 5);
  for (int i = 1; i < 30; ++i) {
    CHECK(st.samples[i].yaw.degrees() >= st.samples[i - 1].yaw.degrees());
    CHECK(st.samples[i].yaw.degrees() <= 20.0);
    CHECK(st.samples[i].yaw.degrees() >= 0.0);
  }
}

TEST_CASE("pipeline is idempotent on filtered data") {
  std::vector<double> y;
  for (int i = 0; i < 300; ++i) y.push_back(25.0 * std::sin(2.0 * M_PI * 0.05 * i * 0.1));
  const yf::FilterConfig cfg;
  const auto once = yf::FilterPipeline(Series(y), cfg);
  const auto twice = yf::FilterPipeline(once.series, cfg);
  REQUIRE(once.series.size() == twice.series.size());
  for (std::size_t i = 0; i < once.series.size(); ++i) {
    CHECK(std::abs((once.series.samples[i].yaw - twice.series.samples[i].yaw).degrees()) <= 0.1);
  }
}

TEST_CASE("pipeline output stays inside the window hull") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 5.0);
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) y.push_back(n(rng));
  const auto r = yf::FilterPipeline(Series(y), {});
  const double lo = *std::min_element(y.begin(), y.end());
  const double hi = *std::max_element(y.begin(), y.end());
  for (const auto& s : r.series.samples) {
    CHECK(s.yaw.degrees() >= lo - 1e-9);
    CHECK(s.yaw.degrees() <= hi + 1e-9);
    const bool original = std::abs(std::round(s.t * 10.0) - s.t * 10.0) < 1e-6;
    CHECK(original);
  }
}

TEST_CASE("hampel matches overlapped batch stitching") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y;
  for (int i = 0; i < 400; ++i) y.push_back(10.0 * std::sin(i * 0.05) + n(rng) + (u(rng) < 0.05 ? 60.0 : 0.0));
  const auto whole = yf::Hampel(Series(y), 11, 3.0);
  const int overlap = 11;
  std::vector<double> stitched;
  for (int start : {0, 200}) {
    const int lo = std::max(0, start - overlap);
    const int hi = std::min(400, start + 200 + overlap);
    const std::vector<double> part(y.begin() + lo, y.begin() + hi);
    const auto r = yf::Hampel(Series(part, 0.1, lo * 0.1), 11, 3.0);
    for (double t : r.removed_times) {
      const int idx = static_cast<int>(std::lround(t * 10.0));
      if (idx >= start && idx < start + 200) stitched.push_back(t);
    }
  }
  REQUIRE(stitched.size() == whole.removed_times.size());
  for (std::size_t i = 0; i < stitched.size(); ++i) {
    CHECK(stitched[i] == doctest::Approx(whole.removed_times[i]));
  }
}

TEST_CASE("config validation") {
  yf::FilterConfig c;
  CHECK_NOTHROW(c.Validate());
  c.hampel_window = 4;
  CHECK_THROWS_AS(c.Validate(), drvattn::Error);
  c = {};
  c.max_gap = 0.0;
  CHECK_THROWS_AS(c.Validate(), drvattn::Error);
  yf::YawSeries bad = Series({1.0, 2.0});
  bad.samples[1].t = 0.0;
  CHECK_THROWS_AS(bad.Validate(), drvattn::Error);
}
