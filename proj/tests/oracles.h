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

// Reference computations for the tests. Nothing here calls into the library
// code it is used to check: every quantity is recomputed from its definition
// by enumeration or brute force.

#ifndef CACOVID_TESTS_ORACLES_H_
#define CACOVID_TESTS_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cacovid::oracle {

// round(x) with halves away from zero, as an index count.
std::size_t RoundCount(double x);

// Exact per-token selection probability of the two-stage sampler: sort by
// score (descending, ties by index), cut into blocks of m (last takes the
// rest), pick a block holding >= k tokens with probability proportional to
// its exp-score mass, then draw k without replacement with renormalized
// exp-score weights. Enumerates every ordered draw sequence.
std::vector<double> TwoStageMarginals(const std::vector<double>& scores,
                                      std::size_t k, std::size_t m);

// Same, with k and m derived from (ratio, lambda) the documented way.
std::vector<double> TwoStageMarginals(const std::vector<double>& scores,
                                      double ratio, double lambda);

// Per-token marginal of k sequential exp-weighted draws without replacement
// over the whole vector (no partition).
std::vector<double> SequentialMarginals(const std::vector<double>& scores,
                                        std::size_t k);

// log2(l * C(m, k)) for the partition of n tokens, by exact integer counting.
double Log2CombinationCount(std::size_t n, std::size_t k, double lambda);

// P(X >= need) for X ~ Hypergeometric(n, planted, k), from exact integer
// binomials.
double HypergeometricTail(std::size_t n, std::size_t planted, std::size_t k,
                          std::size_t need);

// Density peaks by direct double loops and full sorts.
struct DpcResult {
  std::vector<std::size_t> indices;
  std::vector<double> rho;
  std::vector<double> delta;
};
DpcResult BruteForceDensityPeaks(const std::vector<std::vector<double>>& points,
                                 std::size_t k_nn, std::size_t n_select);

// softmax(scores) * total rounded by largest remainder, ties to lower index.
// No capacity limits.
std::vector<std::size_t> SoftmaxLargestRemainder(const std::vector<double>& scores,
                                                 std::size_t total);

// T * (4 n d^2 + 2 n^2 d + 2 n d m) in long double.
long double FlopsDirect(long double layers, long double n, long double d,
                        long double m);

// Population-std standardization.
std::vector<double> Standardize(const std::vector<double>& r);

}  // namespace cacovid::oracle

#endif  // CACOVID_TESTS_ORACLES_H_
