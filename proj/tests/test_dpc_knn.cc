// Copyright 2026 The cacovid Authors
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
#include <set>
#include <vector>

#include <doctest.h>

#include "cacovid/dpc_knn.h"
#include "cacovid/rng.h"
#include "oracles.h"

namespace cacovid::dpc {
namespace {

using diffcore::Tensor;

std::vector<std::vector<double>> Rows(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t c = 0; c < t.cols(); ++c) out[i][c] = t(i, c);
  }
  return out;
}

Tensor FromRows(const std::vector<std::vector<double>>& rows) {
  Tensor t({rows.size(), rows.front().size()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) t(i, c) = rows[i][c];
  }
  return t;
}

// Five jittered points around (0, 0) and five around (10, 10).
std::vector<std::vector<double>> TwoClusters() {
  RngStream rng(12);
  std::vector<std::vector<double>> pts;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 5; ++i) {
      pts.push_back({10.0 * c + 0.1 * rng.Gaussian(), 10.0 * c + 0.1 * rng.Gaussian()});
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("selecting every point returns all indices") {
  RngStream rng(3);
  Tensor pts({6, 3});
  for (double& x : pts.data()) x = rng.Gaussian();
  CHECK(DensityPeaks(pts, 2, 6).indices == IndexSet{0, 1, 2, 3, 4, 5});
}

TEST_CASE("two clusters give one peak each") {
  const auto pts = TwoClusters();
  const PeakSelection sel = DensityPeaks(FromRows(pts), 2, 2);
  REQUIRE(sel.indices.size() == 2);
  CHECK(sel.indices[0] < 5);
  CHECK(sel.indices[1] >= 5);
  const auto ref = oracle::BruteForceDensityPeaks(pts, 2, 2);
  CHECK(sel.indices == ref.indices);
}

TEST_CASE("identical points fall back to index order") {
  const Tensor pts({5, 2}, 1.5);
  const PeakSelection sel = DensityPeaks(pts, 2, 3);
  CHECK(sel.indices == IndexSet{0, 1, 2});
  for (double r : sel.rho) CHECK(r == 1.0);
}

TEST_CASE("density, distance and selection match brute force") {
  RngStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.Index(20);
    const std::size_t dim = 1 + rng.Index(5);
    Tensor pts({n, dim});
    for (double& x : pts.data()) x = rng.Gaussian();
    const std::size_t k_nn = 1 + rng.Index(n - 1);
    const std::size_t n_select = 1 + rng.Index(n);
    const PeakSelection sel = DensityPeaks(pts, k_nn, n_select);
    const auto ref = oracle::BruteForceDensityPeaks(Rows(pts), k_nn, n_select);
    CHECK(sel.indices == ref.indices);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(sel.rho[i] == doctest::Approx(ref.rho[i]).epsilon(1e-12));
      CHECK(sel.delta[i] == doctest::Approx(ref.delta[i]).epsilon(1e-12));
      CHECK(sel.score[i] == doctest::Approx(ref.rho[i] * ref.delta[i]).epsilon(1e-12));
    }
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (sel.rho[i] > sel.rho[top]) top = i;
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(sel.delta[top] >= sel.delta[i]);
  }
}

TEST_CASE("selection is invariant to rigid motions") {
  RngStream rng(8);
  const std::size_t n = 15;
  Tensor pts({n, 2});
  for (double& x : pts.data()) x = 2 * rng.Gaussian();
  const double a = 0.7;
  Tensor moved({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    moved(i, 0) = std::cos(a) * pts(i, 0) - std::sin(a) * pts(i, 1) + 3.0;
    moved(i, 1) = std::sin(a) * pts(i, 0) + std::cos(a) * pts(i, 1) - 1.0;
  }
  CHECK(DensityPeaks(pts, 3, 4).indices == DensityPeaks(moved, 3, 4).indices);
}

TEST_CASE("a duplicated point keeps both clusters represented") {
  for (std::size_t dup = 0; dup < 10; ++dup) {
    auto pts = TwoClusters();
    pts.push_back(pts[dup]);
    const PeakSelection sel = DensityPeaks(FromRows(pts), 2, 2);
    std::set<int> clusters;
    for (std::size_t i : sel.indices) {
      const std::size_t src = i == 10 ? dup : i;
      clusters.insert(src < 5 ? 0 : 1);
    }
    CHECK(clusters.size() == 2);
  }
}

TEST_CASE("invalid arguments are rejected") {
  const Tensor pts({4, 2}, 0.0);
  CHECK_THROWS(DensityPeaks(Tensor({0, 2}), 1, 1));
  CHECK_THROWS(DensityPeaks(pts, 2, 0));
  CHECK_THROWS(DensityPeaks(pts, 2, 5));
  CHECK_THROWS(DensityPeaks(pts, 4, 1));
  CHECK_THROWS(DensityPeaks(pts, 0, 1));
  CHECK(DensityPeaks(Tensor({1, 2}), 0, 1).indices == IndexSet{0});
}

TEST_CASE("default neighbor count") {
  CHECK(DefaultNeighbors(2) == 1);
  CHECK(DefaultNeighbors(3) == 2);
  CHECK(DefaultNeighbors(16) == 4);
  CHECK(DefaultNeighbors(50) == 7);
}

TEST_CASE("gather rows") {
  const Tensor t = Tensor::Matrix(3, 2, {1, 2, 3, 4, 5, 6});
  const std::vector<std::size_t> rows = {2, 0};
  CHECK(GatherRows(t, rows) == Tensor::Matrix(2, 2, {5, 6, 1, 2}));
  const std::vector<std::size_t> bad = {3};
  CHECK_THROWS(GatherRows(t, bad));
}

}  // namespace cacovid::dpc
