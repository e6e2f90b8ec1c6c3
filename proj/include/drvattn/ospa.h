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

#ifndef DRVATTN_OSPA_H_
#define DRVATTN_OSPA_H_

#include <span>
#include <vector>

#include "drvattn/geometry.h"

namespace drvattn::ospa {

struct OspaResult {
  double distance = 0.0;
  double localization = 0.0;
  double cardinality = 0.0;
};

// Optimal sub-pattern assignment distance between two finite point sets
// with cutoff c and order p. Zero for two empty sets.
OspaResult Ospa(std::span<const geometry::Vec2> x, std::span<const geometry::Vec2> y,
                double cutoff, double order);

// Minimum-cost assignment of every row to a distinct column (rows <= cols).
// Returns the column chosen for each row.
std::vector<int> SolveAssignment(const std::vector<std::vector<double>>& cost);

}  // namespace drvattn::ospa

#endif  // DRVATTN_OSPA_H_
