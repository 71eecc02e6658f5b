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

// Online combinatorial space sampling.
//
// Tokens are sorted by contribution score (descending, ties by index) and cut
// into contiguous subspaces of m = round(lambda * r * n) tokens; the last one
// takes the remainder. A subspace is drawn with probability equal to its share
// of softmax(scores) over all n tokens, then k = round(r * n) tokens are drawn
// inside it without replacement, each draw proportional to exp(score) over
// what is left. Subspaces smaller than k are never drawn.

#ifndef CACOVID_OCSS_H_
#define CACOVID_OCSS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cacovid/policy_net.h"
#include "cacovid/rng.h"

namespace cacovid::ocss {

using policy::GridLayout;
using policy::IndexSet;

// round(ratio * n), half away from zero.
std::size_t Budget(std::size_t n, double ratio);

struct SubspacePartition {
  std::vector<std::size_t> order;    // token indices, best score first
  std::vector<IndexSet> subspaces;   // consecutive blocks of `order`
  std::size_t subspace_size = 0;     // m
  std::size_t budget = 0;            // k

  std::size_t num_subspaces() const { return subspaces.size(); }
};

SubspacePartition Partition(std::span<const double> scores, double ratio,
                            double lambda);

// Probability mass of each subspace under softmax(scores).
std::vector<double> SubspaceMass(std::span<const double> scores,
                                 const SubspacePartition& partition);

struct SampledCombination {
  IndexSet indices;                   // ascending
  std::vector<std::size_t> subspace;  // drawn subspace, one per scope
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

enum class SamplerKind {
  kOcss,         // two-stage draw described above
  kMultinomial,  // weighted draw without replacement over the whole scope
  kUniform,      // uniformly random subset, ignores scores
};

std::string_view SamplerName(SamplerKind kind);
SamplerKind ParseSampler(std::string_view name);

// k indices from `pool` without replacement, each draw weighted by
// exp(scores[idx]) over the remaining pool. Implemented with Gumbel top-k,
// which has the same law as sequential renormalized draws.
IndexSet WeightedWithoutReplacement(std::span<const std::size_t> pool,
                                    std::span<const double> scores,
                                    std::size_t k, RngStream& rng);

SampledCombination SampleCombination(std::span<const double> scores,
                                     double ratio, double lambda,
                                     RngStream rng,
                                     SamplerKind kind = SamplerKind::kOcss);

// Exact inclusion probability of every token under the two-stage draw, by
// dynamic programming over the subsets of each subspace. Subspaces are limited
// to kMaxExactSubspace tokens.
inline constexpr std::size_t kMaxExactSubspace = 20;
std::vector<double> ExactMarginals(std::span<const double> scores, double ratio,
                                   double lambda);

// g draws; member i uses base.Split(i).
std::vector<SampledCombination> SampleGroup(
    std::span<const double> scores, double ratio, double lambda, std::size_t g,
    const RngStream& base, SamplerKind kind = SamplerKind::kOcss);

// Samples each frame's h*w scores independently with frame_streams[f] and
// concatenates the selections as global token indices.
SampledCombination SamplePerFrame(const GridLayout& layout,
                                  std::span<const double> scores, double ratio,
                                  double lambda,
                                  std::span<const RngStream> frame_streams,
                                  SamplerKind kind = SamplerKind::kOcss);
// Frame f uses rng.Split(f).
SampledCombination SamplePerFrame(const GridLayout& layout,
                                  std::span<const double> scores, double ratio,
                                  double lambda, const RngStream& rng,
                                  SamplerKind kind = SamplerKind::kOcss);

struct ExplorationSpace {
  double log2_arbitrary = 0.0;
  double log2_ocss = 0.0;
  // log2_arbitrary / log2_ocss; +infinity when log2_ocss is 0.
  double reduction_ratio = 0.0;
  std::size_t subspace_size = 0;
  std::size_t num_subspaces = 0;
};

// Compares the 2^n subsets of n tokens with the l * C(m, k) combinations the
// partition leaves reachable.
ExplorationSpace ExplorationLogSpace(std::size_t n, std::size_t k,
                                     double lambda);

}  // namespace cacovid::ocss

#endif  // CACOVID_OCSS_H_
