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


#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "drvattn/ospa.h"
#include "oracles.h"

using drvattn::geometry::Vec2;
namespace os = drvattn::ospa;

TEST_CASE("ospa simple sets") {
  const std::vector<Vec2> none;
  const std::vector<Vec2> a{{0, 0}, {10, 0}};
  const std::vector<Vec2> b{{1, 0}, {10, 1}};
  CHECK(os::Ospa(none, none, 5.0, 2.0).distance == 0.0);
  CHECK(os::Ospa(a, none, 5.0, 2.0).distance == doctest::Approx(5.0));
  CHECK(os::Ospa(a, a, 5.0, 2.0).distance == 0.0);
  CHECK(os::Ospa(a, b, 5.0, 2.0).distance == doctest::Approx(1.0));
  const std::vector<Vec2> c{{0, 0}};
  const auto r = os::Ospa(c, a, 5.0, 1.0);
  CHECK(r.distance == doctest::Approx(2.5));
  CHECK(r.localization == doctest::Approx(0.0));
  CHECK(r.cardinality == doctest::Approx(2.5));
}

TEST_CASE("ospa agrees with brute force enumeration") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Vec2> x(count(rng)), y(count(rng));
    std::vector<oracle::P2> ox, oy;
    for (auto& v : x) {
      v = {pos(rng), pos(rng)};
      ox.push_back({v.x, v.y});
    }
    for (auto& v : y) {
      v = {pos(rng), pos(rng)};
      oy.push_back({v.x, v.y});
    }
    for (double p : {1.0, 2.0}) {
      CHECK(os::Ospa(x, y, 5.0, p).distance ==
            doctest::Approx(oracle::BruteOspa(ox, oy, 5.0, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ospa is a symmetric bounded distance") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> x(4), y(3);
    for (auto& v : x) v = {pos(rng), pos(rng)};
    for (auto& v : y) v = {pos(rng), pos(rng)};
    const double d = os::Ospa(x, y, 5.0, 2.0).distance;
    CHECK(d == doctest::Approx(os::Ospa(y, x, 5.0, 2.0).distance));
    CHECK(d >= 0.0);
    CHECK(d <= 5.0);
  }
}

TEST_CASE("assignment is optimal on small square problems") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> c(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost) {
      for (auto& v : row) v = c(rng);
    }
    const auto a = os::SolveAssignment(cost);
    double got = 0.0;
    for (int i = 0; i < n; ++i) got += cost[i][a[i]];
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += cost[i][perm[i]];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}
