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
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "drvattn/classify.h"
#include "drvattn/error.h"
#include "oracles.h"

namespace cl = drvattn::classify;
namespace at = drvattn::attention;
using drvattn::ErrorCode;

namespace {

std::vector<cl::FeaturePoint> Points1d(const std::vector<double>& v) {
  std::vector<cl::FeaturePoint> out;
  for (double x : v) out.push_back({x});
  return out;
}

at::CaseMetrics Scores(double s_veh, double s_ped, double ped_share = 0.2) {
  at::CaseMetrics m;
  m.s_veh = s_veh;
  m.s_ped = s_ped;
  m.veh_fv = s_veh;
  m.ped_fv = s_ped;
  m.ped_share = ped_share;
  m.n_veh = 4;
  m.n_ped = 1;
  return m;
}

std::vector<int> Ids(std::size_t n) {
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i) + 1;
  return ids;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const drvattn::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidInput;
}

bool BitEqual(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("k-means examples") {
  const auto pts = Points1d({0.02, 0.03, 0.05, 0.45, 0.48, 0.50});
  const auto m = cl::KMeansFit(pts);
  REQUIRE(m.centroids.size() == 2);
  const double lo = std::min(m.centroids[0][0], m.centroids[1][0]);
  const double hi = std::max(m.centroids[0][0], m.centroids[1][0]);
  CHECK(lo == doctest::Approx(0.1 / 3.0));
  CHECK(hi == doctest::Approx(1.43 / 3.0));
  CHECK(std::count(m.assignment.begin(), m.assignment.end(), m.assignment[0]) == 3);
  CHECK(m.sse == doctest::Approx(oracle::ExhaustiveSplitSse({0.02, 0.03, 0.05, 0.45, 0.48, 0.50})));

  const auto two = cl::KMeansFit(Points1d({0.0, 1.0}));
  CHECK(std::min(two.centroids[0][0], two.centroids[1][0]) == 0.0);
  CHECK(std::max(two.centroids[0][0], two.centroids[1][0]) == 1.0);

  CHECK(CodeOf([] { cl::KMeansFit(Points1d({0.3, 0.3, 0.3})); }) ==
        ErrorCode::kDegenerateClustering);
  CHECK(CodeOf([] { cl::KMeansFit(Points1d({0.3})); }) == ErrorCode::kDegenerateClustering);
  CHECK(CodeOf([] { cl::KMeansFit(Points1d({0.1, 0.2, 0.3}), 3); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("one-dimensional fits equal the exhaustive split") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int count = size(rng);
    std::vector<double> v;
    const int shape = trial % 3;
    for (int i = 0; i < count; ++i) {
      if (shape == 0) v.push_back(u(rng));
      if (shape == 1) v.push_back(n(rng) + (i % 2 ? 3.0 : 0.0));
      if (shape == 2) v.push_back(std::exp(2.0 * n(rng)));
    }
    const auto m = cl::KMeansFit(Points1d(v));
    CHECK(m.sse == doctest::Approx(oracle::ExhaustiveSplitSse(v)).epsilon(1e-9));
  }
}

TEST_CASE("fit invariants") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cl::FeaturePoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng)});
    const auto m = cl::KMeansFit(pts);
    CHECK(m.centroids[0] != m.centroids[1]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(m.assignment[i] == cl::NearestCentroid(pts[i], m.centroids));
    }
    CHECK(std::abs(m.sse - cl::AssignmentSse(pts, m.centroids, m.assignment)) <= 1e-12);
    for (std::size_t i = 1; i < m.sse_history.size(); ++i) {
      CHECK(m.sse_history[i] <= m.sse_history[i - 1]);
    }
    CHECK(m.iterations <= 100);
  }
}

TEST_CASE("two-dimensional fits match the best partition on separated data") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 10; ++i) {
      const double c = i < 4 ? 0.0 : 1.0;
      pts.push_back({c + n(rng), c + n(rng)});
    }
    std::vector<cl::FeaturePoint> fp(pts.begin(), pts.end());
    const auto m = cl::KMeansFit(fp);
    CHECK(m.sse == doctest::Approx(oracle::BruteForcePartitionSse(pts)).epsilon(1e-9));
  }
}

TEST_CASE("nearest centroid ties go to the lower index") {
  CHECK(cl::NearestCentroid({0.5}, {{0.0}, {1.0}}) == 0);
  CHECK(cl::NearestCentroid({0.9}, {{0.0}, {1.0}}) == 1);
}

TEST_CASE("fits are bit-exact under permutation and rerun") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<cl::FeaturePoint> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({u(rng), u(rng)});
    const auto a = cl::KMeansFit(pts);
    const auto b = cl::KMeansFit(pts);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto c = cl::KMeansFit(shuffled);
    CHECK(BitEqual(a.sse, b.sse));
    CHECK(BitEqual(a.sse, c.sse));
    for (int k = 0; k < 2; ++k) {
      for (int d = 0; d < 2; ++d) {
        CHECK(BitEqual(a.centroids[k][d], b.centroids[k][d]));
        CHECK(BitEqual(a.centroids[k][d], c.centroids[k][d]));
      }
    }
  }
}

TEST_CASE("scenario classification") {
  std::vector<at::CaseMetrics> cases;
  for (double s : {0.00, 0.02, 0.04, 0.10, 0.30, 0.45}) cases.push_back(Scores(0.5, 0.5, s));
  const auto r = cl::ScenarioClassify(cases);
  for (int i = 0; i < 4; ++i) CHECK(r.scenarios[i] == cl::Scenario::kI);
  for (int i = 4; i < 6; ++i) CHECK(r.scenarios[i] == cl::Scenario::kII);

  std::vector<double> shares;
  for (double s : {0.00, 0.02, 0.04, 0.10, 0.30, 0.45}) shares.push_back(s);
  std::vector<int> mask;
  std::vector<std::vector<double>> pts;
  for (double s : shares) pts.push_back({s});
  oracle::BruteForcePartitionSse(pts, &mask);
  for (int i = 1; i < 4; ++i) CHECK(mask[i] == mask[0]);
  for (int i = 4; i < 6; ++i) CHECK(mask[i] != mask[0]);

  std::vector<at::CaseMetrics> zeros(4, Scores(0.5, 0.0, 0.0));
  const auto z = cl::ScenarioClassify(zeros);
  CHECK_FALSE(z.warnings.empty());
  for (auto s : z.scenarios) CHECK(s == cl::Scenario::kI);
}

TEST_CASE("scenario split on a cohort with fixed shares") {
  std::vector<at::CaseMetrics> cases;
  for (int i = 0; i < 15; ++i) cases.push_back(Scores(0.5, 0.5, 0.05 * i / 14.0));
  for (int i = 0; i < 10; ++i) cases.push_back(Scores(0.5, 0.5, 0.30 + 0.15 * i / 9.0));
  const auto r = cl::ScenarioClassify(cases);
  CHECK(std::count(r.scenarios.begin(), r.scenarios.end(), cl::Scenario::kI) == 15);
  for (int i = 0; i < 15; ++i) CHECK(r.scenarios[i] == cl::Scenario::kI);
}

TEST_CASE("cascade separates archetype replicas") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> j(-0.01, 0.01);
  std::vector<at::CaseMetrics> cases;
  for (int i = 0; i < 5; ++i) cases.push_back(Scores(0.03 + j(rng), 0.435 + j(rng)));
  for (int i = 0; i < 5; ++i) cases.push_back(Scores(0.225 + j(rng), 0.675 + j(rng)));
  const auto ids = Ids(cases.size());
  const auto r = cl::AttentionClassify(cases, ids);
  for (int i = 0; i < 5; ++i) CHECK(r.labels[i].attention == cl::Attention::kLow);
  for (int i = 5; i < 10; ++i) CHECK(r.labels[i].attention == cl::Attention::kRegular);
  CHECK(r.labels[3].case_id == 4);

  std::vector<std::vector<double>> z;
  for (const auto& l : r.labels) z.push_back({l.z_veh, l.z_ped});
  std::vector<int> mask;
  oracle::BruteForcePartitionSse(z, &mask);
  for (int i = 0; i < 10; ++i) CHECK((mask[i] == mask[0]) == (i < 5));
}

TEST_CASE("cascade extremes and errors") {
  const std::vector<at::CaseMetrics> two{Scores(0.0, 0.0), Scores(1.0, 1.0)};
  const auto ids = Ids(2);
  const auto r = cl::AttentionClassify(two, ids);
  CHECK(r.labels[0].attention == cl::Attention::kLow);
  CHECK(r.labels[1].attention == cl::Attention::kRegular);

  const std::vector<at::CaseMetrics> one{Scores(0.5, 0.5)};
  const auto id1 = Ids(1);
  CHECK(CodeOf([&] { cl::AttentionClassify(one, id1); }) == ErrorCode::kDegenerateClustering);

  const std::vector<at::CaseMetrics> flat(3, Scores(0.4, 0.4));
  const auto id3 = Ids(3);
  CHECK(CodeOf([&] { cl::AttentionClassify(flat, id3); }) == ErrorCode::kDegenerateClustering);
}

TEST_CASE("degenerate pedestrian feature falls back to vehicles") {
  std::vector<at::CaseMetrics> cases;
  for (double s : {0.05, 0.08, 0.1, 0.4, 0.5, 0.55}) cases.push_back(Scores(s, 0.0, 0.0));
  const auto ids = Ids(cases.size());
  const auto r = cl::AttentionClassify(cases, ids);
  CHECK_FALSE(r.warnings.empty());
  CHECK_FALSE(r.ped_model.has_value());
  for (int i = 0; i < 6; ++i) {
    CHECK(r.labels[i].z_ped == 0.0);
    CHECK((r.labels[i].attention == cl::Attention::kLow) == (i < 3));
  }
}

TEST_CASE("cascade label invariants") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<at::CaseMetrics> cases;
    for (int i = 0; i < 20; ++i) cases.push_back(Scores(u(rng), u(rng), u(rng) * 0.5));
    const auto ids = Ids(cases.size());
    const auto r = cl::AttentionClassify(cases, ids);

    const auto& low = r.final_model.centroids[r.low_cluster];
    const auto& reg = r.final_model.centroids[1 - r.low_cluster];
    CHECK(low[0] + low[1] <= reg[0] + reg[1]);

    std::vector<std::size_t> order(cases.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<at::CaseMetrics> shuffled;
    std::vector<int> shuffled_ids;
    for (auto i : order) {
      shuffled.push_back(cases[i]);
      shuffled_ids.push_back(ids[i]);
    }
    const auto s = cl::AttentionClassify(shuffled, shuffled_ids);
    for (std::size_t k = 0; k < order.size(); ++k) {
      CHECK(s.labels[k].attention == r.labels[order[k]].attention);
      CHECK(s.labels[k].case_id == r.labels[order[k]].case_id);
      CHECK(s.labels[k].scenario == r.labels[order[k]].scenario);
    }

    std::vector<at::CaseMetrics> scaled = cases;
    for (auto& m : scaled) {
      m.s_veh = 0.5 * m.s_veh + 0.1;
      m.s_ped = 0.5 * m.s_ped + 0.1;
    }
    const auto a = cl::AttentionClassify(scaled, ids);
    for (std::size_t k = 0; k < cases.size(); ++k) {
      CHECK(a.labels[k].attention == r.labels[k].attention);
    }
  }
}

TEST_CASE("binary stage two features") {
  std::vector<at::CaseMetrics> cases;
  for (int i = 0; i < 4; ++i) cases.push_back(Scores(0.05 + 0.01 * i, 0.05 + 0.01 * i));
  for (int i = 0; i < 4; ++i) cases.push_back(Scores(0.5 + 0.01 * i, 0.6 + 0.01 * i));
  cl::ClassifyOptions opts;
  opts.stage2 = cl::Stage2Features::kBinary;
  const auto ids = Ids(cases.size());
  const auto r = cl::AttentionClassify(cases, ids, opts);
  for (int i = 0; i < 8; ++i) {
    CHECK(r.labels[i].z_veh == (i < 4 ? 0.0 : 1.0));
    CHECK((r.labels[i].attention == cl::Attention::kLow) == (i < 4));
  }
}

TEST_CASE("scores are clipped") {
  std::vector<at::CaseMetrics> cases{Scores(0.0, 0.0), Scores(0.1, 0.1), Scores(0.2, 0.2),
                                     Scores(0.9, 0.9), Scores(1.0, 1.0)};
  const auto ids = Ids(cases.size());
  const auto r = cl::AttentionClassify(cases, ids);
  for (const auto& l : r.labels) {
    CHECK(l.z_veh >= -0.5);
    CHECK(l.z_veh <= 1.5);
  }
}

TEST_CASE("uniform cohort labels") {
  std::vector<at::CaseMetrics> cases{Scores(1.0, 0.0, 0.0), Scores(1.0, 0.0, 0.0),
                                     Scores(0.0, 0.0, 0.0)};
  const auto ids = Ids(3);
  std::vector<std::string> warnings;
  const auto labels = cl::UniformCohortLabels(cases, ids, &warnings);
  CHECK(labels[0].attention == cl::Attention::kRegular);
  CHECK(labels[2].attention == cl::Attention::kLow);
  CHECK(cl::ToString(cl::Attention::kLow) == "Low");
  CHECK(cl::ToString(cl::Scenario::kII) == "II");
}
