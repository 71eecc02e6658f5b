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

#include "cacovid/dpc_knn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cacovid/kernels.h"

namespace cacovid::dpc {

std::size_t DefaultNeighbors(std::size_t n) {
  if (n < 2) return 0;
  const auto root = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  return std::min(std::max<std::size_t>(2, root), n - 1);
}

PeakSelection DensityPeaks(const diffcore::Tensor& points, std::size_t k_nn,
                           std::size_t n_select) {
  if (points.rank() != 2 || points.rows() == 0) {
    throw std::invalid_argument("density peaks needs a non-empty point set");
  }
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (n_select < 1 || n_select > n) {
    throw std::invalid_argument("n_select must lie in [1, " +
                                std::to_string(n) + "]");
  }
  PeakSelection out;
  if (n == 1) {
    out.indices = {0};
    out.rho = {1.0};
    out.delta = {0.0};
    out.score = {0.0};
    return out;
  }
  if (k_nn < 1 || k_nn >= n) {
    throw std::invalid_argument("k_nn must lie in [1, " + std::to_string(n - 1) +
                                "]");
  }

  std::vector<double> dist(n * n);
  kernels::PairwiseSquaredDistances(points.data(), n, dim, dist);

  out.rho.resize(n);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row[w++] = dist[i * n + j];
    }
    std::nth_element(row.begin(), row.begin() + static_cast<long>(k_nn - 1),
                     row.end());
    std::sort(row.begin(), row.begin() + static_cast<long>(k_nn));
    double mean = 0.0;
    for (std::size_t q = 0; q < k_nn; ++q) mean += row[q];
    out.rho[i] = std::exp(-mean / static_cast<double>(k_nn));
  }

  std::vector<std::size_t> by_density(n);
  std::iota(by_density.begin(), by_density.end(), std::size_t{0});
  std::stable_sort(by_density.begin(), by_density.end(),
                   [&](std::size_t a, std::size_t b) {
                     return out.rho[a] > out.rho[b];
                   });

  out.delta.assign(n, 0.0);
  out.delta[by_density[0]] = *std::max_element(dist.begin(), dist.end());
  for (std::size_t rank = 1; rank < n; ++rank) {
    const std::size_t i = by_density[rank];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t up = 0; up < rank; ++up) {
      best = std::min(best, dist[i * n + by_density[up]]);
    }
    out.delta[i] = best;
  }

  out.score.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.score[i] = out.rho[i] * out.delta[i];

  std::vector<std::size_t> by_score(n);
  std::iota(by_score.begin(), by_score.end(), std::size_t{0});
  std::stable_sort(by_score.begin(), by_score.end(),
                   [&](std::size_t a, std::size_t b) {
                     return out.score[a] > out.score[b];
                   });
  out.indices.assign(by_score.begin(),
                     by_score.begin() + static_cast<long>(n_select));
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

diffcore::Tensor GatherRows(const diffcore::Tensor& tokens,
                            std::span<const std::size_t> rows) {
  const std::size_t dim = tokens.cols();
  diffcore::Tensor out({rows.size(), dim});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= tokens.rows()) throw std::out_of_range("row index");
    for (std::size_t c = 0; c < dim; ++c) out(r, c) = tokens(rows[r], c);
  }
  return out;
}

}  // namespace cacovid::dpc
