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

#include "drvattn/classify.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "drvattn/error.h"

namespace drvattn::classify {
namespace {

constexpr int kMaxIterations = 100;
constexpr double kMoveTolerance = 1e-9;

double SquaredDistance(const FeaturePoint& a, const FeaturePoint& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Order-independent sum: terms are sorted before accumulation.
double StableSum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

FeaturePoint Mean(std::vector<FeaturePoint> members) {
  std::sort(members.begin(), members.end());
  FeaturePoint m(members.front().size(), 0.0);
  for (const auto& p : members) {
    for (std::size_t d = 0; d < m.size(); ++d) m[d] += p[d];
  }
  for (auto& v : m) v /= static_cast<double>(members.size());
  return m;
}

std::vector<FeaturePoint> FarthestPair(std::span<const FeaturePoint> points) {
  std::vector<FeaturePoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double d = SquaredDistance(sorted[i], sorted[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  return {sorted[bi], sorted[bj]};
}

double Clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

struct Stage1 {
  std::optional<KMeansModel> model;
  std::vector<int> cluster;  // 0 = low
  std::vector<double> z;
};

Stage1 FitStage1(const std::vector<double>& scores, const ClassifyOptions& opt,
                 const char* name, std::vector<std::string>& warnings) {
  Stage1 s;
  s.cluster.assign(scores.size(), 0);
  s.z.assign(scores.size(), 0.0);
  std::vector<FeaturePoint> pts;
  for (double v : scores) pts.push_back({v});
  try {
    s.model = KMeansFit(pts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateClustering) throw;
    warnings.push_back(std::string(name) +
                       " stage-1 clustering degenerate; feature set to 0");
    return s;
  }
  const double c0 = s.model->centroids[0][0];
  const double c1 = s.model->centroids[1][0];
  const int low = c0 <= c1 ? 0 : 1;
  const double c_low = std::min(c0, c1);
  const double c_high = std::max(c0, c1);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    s.cluster[i] = s.model->assignment[i] == low ? 0 : 1;
    s.z[i] = opt.stage2 == Stage2Features::kBinary
                 ? static_cast<double>(s.cluster[i])
                 : Clip((scores[i] - c_low) / (c_high - c_low), opt.z_min, opt.z_max);
  }
  return s;
}

}  // namespace

int NearestCentroid(const FeaturePoint& p, const std::vector<FeaturePoint>& centroids) {
  int best = 0;
  double best_d = SquaredDistance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = SquaredDistance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double AssignmentSse(std::span<const FeaturePoint> points,
                     const std::vector<FeaturePoint>& centroids,
                     const std::vector<int>& assignment) {
  std::vector<double> terms;
  terms.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    terms.push_back(SquaredDistance(points[i], centroids[static_cast<std::size_t>(assignment[i])]));
  }
  return StableSum(std::move(terms));
}

namespace {
void RefineOneDimensional(std::span<const FeaturePoint> points, KMeansModel& m);
}  // namespace

KMeansModel KMeansFit(std::span<const FeaturePoint> points, int k) {
  if (k != 2) {
    throw Error(ErrorCode::kInvalidInput, "only k = 2 is supported");
  }
  if (points.empty()) {
    throw Error(ErrorCode::kDegenerateClustering, "no points");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim || dim == 0) {
      throw Error(ErrorCode::kInvalidInput, "inconsistent feature dimensions");
    }
    for (double v : p) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "non-finite feature");
    }
  }
  std::vector<FeaturePoint> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kDegenerateClustering,
                "fewer than " + std::to_string(k) + " distinct points");
  }

  KMeansModel m;
  m.k = k;
  m.centroids = FarthestPair(points);
  m.assignment.assign(points.size(), 0);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      m.assignment[i] = NearestCentroid(points[i], m.centroids);
    }
    const double sse = AssignmentSse(points, m.centroids, m.assignment);
    if (!m.sse_history.empty() &&
        sse > m.sse_history.back() + 1e-12 * (1.0 + m.sse_history.back())) {
      throw std::logic_error("k-means SSE increased between iterations");
    }
    m.sse_history.push_back(sse);
    m.iterations = iter + 1;
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      std::vector<FeaturePoint> members;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (m.assignment[i] == c) members.push_back(points[i]);
      }
      if (members.empty()) continue;
      FeaturePoint updated = Mean(std::move(members));
      moved = std::max(moved, std::sqrt(SquaredDistance(updated, m.centroids[c])));
      m.centroids[c] = std::move(updated);
    }
    if (moved < kMoveTolerance) break;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.assignment[i] = NearestCentroid(points[i], m.centroids);
  }
  m.sse = AssignmentSse(points, m.centroids, m.assignment);
  if (m.sse > m.sse_history.back() + 1e-12 * (1.0 + m.sse_history.back())) {
    throw std::logic_error("k-means SSE increased on final assignment");
  }
  m.sse_history.push_back(m.sse);
  if (dim == 1) RefineOneDimensional(points, m);
  return m;
}

namespace {

double SplitSse(const std::vector<double>& sorted, std::size_t cut, double* left_mean,
                double* right_mean) {
  auto side = [&](std::size_t b, std::size_t e, double* mean) {
    const double mu = StableSum(std::vector<double>(sorted.begin() + static_cast<std::ptrdiff_t>(b),
                                                    sorted.begin() + static_cast<std::ptrdiff_t>(e))) /
                      static_cast<double>(e - b);
    std::vector<double> sq;
    for (std::size_t i = b; i < e; ++i) sq.push_back((sorted[i] - mu) * (sorted[i] - mu));
    *mean = mu;
    return StableSum(std::move(sq));
  };
  return side(0, cut, left_mean) + side(cut, sorted.size(), right_mean);
}

// Lloyd iterations can settle on a non-optimal split in one dimension; the
// optimal two-cluster partition there is a contiguous cut of the sorted values.
void RefineOneDimensional(std::span<const FeaturePoint> points, KMeansModel& m) {
  std::vector<double> sorted;
  for (const auto& p : points) sorted.push_back(p[0]);
  std::sort(sorted.begin(), sorted.end());
  double best = m.sse;
  double best_l = 0.0, best_r = 0.0;
  bool found = false;
  for (std::size_t cut = 1; cut < sorted.size(); ++cut) {
    if (sorted[cut] == sorted[cut - 1]) continue;
    double l = 0.0, r = 0.0;
    const double sse = SplitSse(sorted, cut, &l, &r);
    if (sse < best - 1e-12 * (1.0 + best)) {
      best = sse;
      best_l = l;
      best_r = r;
      found = true;
    }
  }
  if (!found) return;
  const bool low_first = m.centroids[0][0] <= m.centroids[1][0];
  m.centroids[0] = {low_first ? best_l : best_r};
  m.centroids[1] = {low_first ? best_r : best_l};
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.assignment[i] = NearestCentroid(points[i], m.centroids);
  }
  m.sse = AssignmentSse(points, m.centroids, m.assignment);
  m.sse_history.push_back(m.sse);
  ++m.iterations;
}

}  // namespace

std::string_view ToString(Scenario s) { return s == Scenario::kI ? "I" : "II"; }

std::string_view ToString(Attention a) {
  return a == Attention::kRegular ? "Regular" : "Low";
}

ScenarioResult ScenarioClassify(std::span<const attention::CaseMetrics> cases) {
  ScenarioResult r;
  r.scenarios.assign(cases.size(), Scenario::kI);
  std::vector<FeaturePoint> pts;
  for (const auto& c : cases) pts.push_back({c.ped_share});
  try {
    r.model = KMeansFit(pts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateClustering) throw;
    r.warnings.push_back("pedestrian share clustering degenerate; all cases Scenario I");
    return r;
  }
  const int low = r.model->centroids[0][0] <= r.model->centroids[1][0] ? 0 : 1;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    r.scenarios[i] = r.model->assignment[i] == low ? Scenario::kI : Scenario::kII;
  }
  return r;
}

CascadeResult AttentionClassify(std::span<const attention::CaseMetrics> cases,
                                std::span<const int> case_ids,
                                const ClassifyOptions& options) {
  if (case_ids.size() != cases.size()) {
    throw Error(ErrorCode::kInvalidInput, "case id count mismatch");
  }
  if (cases.size() < 2) {
    throw Error(ErrorCode::kDegenerateClustering, "need at least 2 cases");
  }
  CascadeResult r;
  std::vector<double> s_veh, s_ped;
  for (const auto& c : cases) {
    s_veh.push_back(c.s_veh);
    s_ped.push_back(c.s_ped);
  }
  Stage1 veh = FitStage1(s_veh, options, "vehicle", r.warnings);
  Stage1 ped = FitStage1(s_ped, options, "pedestrian", r.warnings);
  if (!veh.model && !ped.model) {
    throw Error(ErrorCode::kDegenerateClustering,
                "both stage-1 features are degenerate");
  }
  r.veh_model = veh.model;
  r.ped_model = ped.model;

  std::vector<FeaturePoint> stage2;
  for (std::size_t i = 0; i < cases.size(); ++i) stage2.push_back({veh.z[i], ped.z[i]});
  r.final_model = KMeansFit(stage2);
  const auto sum = [](const FeaturePoint& p) { return p[0] + p[1]; };
  r.low_cluster = sum(r.final_model.centroids[0]) <= sum(r.final_model.centroids[1]) ? 0 : 1;

  r.scenario = ScenarioClassify(cases);
  r.warnings.insert(r.warnings.end(), r.scenario.warnings.begin(), r.scenario.warnings.end());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CaseLabel l;
    l.case_id = case_ids[i];
    l.scenario = r.scenario.scenarios[i];
    l.veh_cluster = veh.cluster[i];
    l.ped_cluster = ped.cluster[i];
    l.z_veh = veh.z[i];
    l.z_ped = ped.z[i];
    l.final_cluster = r.final_model.assignment[i];
    l.attention = l.final_cluster == r.low_cluster ? Attention::kLow : Attention::kRegular;
    r.labels.push_back(l);
  }
  return r;
}

std::vector<CaseLabel> UniformCohortLabels(std::span<const attention::CaseMetrics> cases,
                                           std::span<const int> case_ids,
                                           std::vector<std::string>* warnings) {
  if (case_ids.size() != cases.size()) {
    throw Error(ErrorCode::kInvalidInput, "case id count mismatch");
  }
  const ScenarioResult scen = ScenarioClassify(cases);
  if (warnings) warnings->insert(warnings->end(), scen.warnings.begin(), scen.warnings.end());
  std::vector<CaseLabel> out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CaseLabel l;
    l.case_id = case_ids[i];
    l.scenario = scen.scenarios[i];
    const bool nothing = cases[i].s_veh == 0.0 && cases[i].s_ped == 0.0;
    l.attention = nothing ? Attention::kLow : Attention::kRegular;
    out.push_back(l);
  }
  return out;
}

}  // namespace drvattn::classify
