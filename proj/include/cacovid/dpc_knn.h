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

#ifndef CACOVID_DPC_KNN_H_
#define CACOVID_DPC_KNN_H_

#include <cstddef>
#include <span>
#include <vector>

#include "cacovid/policy_net.h"
#include "cacovid/tensor.h"

namespace cacovid::dpc {

using policy::IndexSet;

struct PeakSelection {
  IndexSet indices;            // ascending
  std::vector<double> rho;     // exp(-mean squared distance to k_nn nearest)
  std::vector<double> delta;   // squared distance to nearest denser point
  std::vector<double> score;   // rho * delta
};

// max(2, floor(sqrt(n))), capped at n - 1.
std::size_t DefaultNeighbors(std::size_t n);

// Density-peaks selection over the rows of `points` (n x dim).
//
// Density order is rho descending with the lower index first on ties. The
// densest point gets the largest pairwise squared distance of the whole set
// as its delta. The n_select highest rho * delta scores win, again with the
// lower index first on ties.
PeakSelection DensityPeaks(const diffcore::Tensor& points, std::size_t k_nn,
                           std::size_t n_select);

// Row subset of `tokens`, in the order given.
diffcore::Tensor GatherRows(const diffcore::Tensor& tokens,
                            std::span<const std::size_t> rows);

}  // namespace cacovid::dpc

#endif  // CACOVID_DPC_KNN_H_
