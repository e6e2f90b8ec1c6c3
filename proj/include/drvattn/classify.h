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

#ifndef DRVATTN_CLASSIFY_H_
#define DRVATTN_CLASSIFY_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drvattn/attention.h"

// Cascaded two-cluster k-means: one model per attention score (vehicles,
// pedestrians), a combiner over their normalized outputs, and a scenario
// model over the pedestrian share.
namespace drvattn::classify {

using FeaturePoint = std::vector<double>;

struct KMeansModel {
  int k = 2;
  std::vector<FeaturePoint> centroids;
  std::vector<int> assignment;      // per input point
  double sse = 0.0;
  std::vector<double> sse_history;  // after each assignment step
  int iterations = 0;
};

// Lloyd's algorithm, k = 2, initialized at the farthest pair of points
// (lexicographically smaller point first; in one dimension, min and max).
// Stops when no centroid moves more than 1e-9 or after 100 iterations.
// Results are bit-identical under any permutation of the input. Throws
// DegenerateClustering with fewer than k distinct points.
KMeansModel KMeansFit(std::span<const FeaturePoint> points, int k = 2);

// Nearest centroid, ties to the lower index.
int NearestCentroid(const FeaturePoint& p, const std::vector<FeaturePoint>& centroids);

double AssignmentSse(std::span<const FeaturePoint> points,
                     const std::vector<FeaturePoint>& centroids,
                     const std::vector<int>& assignment);

enum class Scenario { kI, kII };
enum class Attention { kRegular, kLow };

std::string_view ToString(Scenario s);
std::string_view ToString(Attention a);

struct ScenarioResult {
  std::vector<Scenario> scenarios;
  std::optional<KMeansModel> model;
  std::vector<std::string> warnings;
};

// Lower pedestrian-share cluster is Scenario I. A degenerate cohort is
// reported as all Scenario I with a warning.
ScenarioResult ScenarioClassify(std::span<const attention::CaseMetrics> cases);

enum class Stage2Features { kScore, kBinary };

struct ClassifyOptions {
  Stage2Features stage2 = Stage2Features::kScore;
  double z_min = -0.5;
  double z_max = 1.5;
};

struct CaseLabel {
  int case_id = 0;
  Scenario scenario = Scenario::kI;
  Attention attention = Attention::kRegular;
  int veh_cluster = 0;  // 0 = lower-score cluster
  int ped_cluster = 0;
  double z_veh = 0.0;
  double z_ped = 0.0;
  int final_cluster = 0;
};

struct CascadeResult {
  std::vector<CaseLabel> labels;  // input order
  std::optional<KMeansModel> veh_model;
  std::optional<KMeansModel> ped_model;
  KMeansModel final_model;
  int low_cluster = 0;
  ScenarioResult scenario;
  std::vector<std::string> warnings;
};

// Stage-1 models turn each score into z = (s - c_low) / (c_high - c_low),
// clipped to [z_min, z_max] (or the 0/1 cluster index in binary mode); the
// stage-2 cluster with the lower centroid coordinate sum is Low. A
// degenerate stage-1 feature contributes z = 0 with a warning; if both are
// degenerate, throws DegenerateClustering.
CascadeResult AttentionClassify(std::span<const attention::CaseMetrics> cases,
                                std::span<const int> case_ids,
                                const ClassifyOptions& options = {});

// Fallback for a cohort whose stage-1 features are all identical, where
// clustering is undefined: every case receives the same label, Low only when
// nothing at all was observed (s_veh = s_ped = 0). Scenario labels come from
// ScenarioClassify as usual.
std::vector<CaseLabel> UniformCohortLabels(std::span<const attention::CaseMetrics> cases,
                                           std::span<const int> case_ids,
                                           std::vector<std::string>* warnings);

}  // namespace drvattn::classify

#endif  // DRVATTN_CLASSIFY_H_
