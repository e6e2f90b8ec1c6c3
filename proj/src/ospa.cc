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

#include "drvattn/ospa.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drvattn/error.h"

namespace drvattn::ospa {

// Hungarian algorithm with potentials, O(n^2 m).
std::vector<int> SolveAssignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  if (m < n) {
    throw Error(ErrorCode::kInvalidInput, "assignment needs rows <= columns");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

OspaResult Ospa(std::span<const geometry::Vec2> x, std::span<const geometry::Vec2> y,
                double cutoff, double order) {
  if (!(cutoff > 0.0) || !(order >= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "OSPA needs c > 0 and p >= 1");
  }
  OspaResult r;
  if (x.empty() && y.empty()) return r;
  const bool swap = x.size() > y.size();
  const auto small = swap ? y : x;
  const auto large = swap ? x : y;
  const double n = static_cast<double>(large.size());
  if (small.empty()) {
    r.distance = cutoff;
    r.cardinality = cutoff;
    return r;
  }
  std::vector<std::vector<double>> cost(small.size(), std::vector<double>(large.size()));
  for (std::size_t i = 0; i < small.size(); ++i) {
    for (std::size_t j = 0; j < large.size(); ++j) {
      const double d = std::hypot(small[i].x - large[j].x, small[i].y - large[j].y);
      cost[i][j] = std::pow(std::min(d, cutoff), order);
    }
  }
  const std::vector<int> a = SolveAssignment(cost);
  double loc = 0.0;
  for (std::size_t i = 0; i < small.size(); ++i) loc += cost[i][static_cast<std::size_t>(a[i])];
  const double card =
      std::pow(cutoff, order) * static_cast<double>(large.size() - small.size());
  r.distance = std::pow((loc + card) / n, 1.0 / order);
  r.localization = std::pow(loc / n, 1.0 / order);
  r.cardinality = std::pow(card / n, 1.0 / order);
  return r;
}

}  // namespace drvattn::ospa
