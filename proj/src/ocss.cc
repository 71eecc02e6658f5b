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

#include "cacovid/ocss.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cacovid::ocss {
namespace {

void CheckRatio(double ratio, double lambda) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("sample ratio must lie in (0, 1), got " +
                                std::to_string(ratio));
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

std::size_t SubspaceSize(std::size_t n, std::size_t k, double raw) {
  std::size_t m = static_cast<std::size_t>(std::llround(raw));
  m = std::max({m, k, std::size_t{1}});
  return std::min(m, n);
}

}  // namespace

std::size_t Budget(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

std::string_view SamplerName(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kOcss: return "ocss";
    case SamplerKind::kMultinomial: return "multinomial";
    case SamplerKind::kUniform: return "uniform";
  }
  return "unknown";
}

SamplerKind ParseSampler(std::string_view name) {
  if (name == "ocss") return SamplerKind::kOcss;
  if (name == "multinomial") return SamplerKind::kMultinomial;
  if (name == "uniform" || name == "random") return SamplerKind::kUniform;
  throw std::invalid_argument("unknown sampler '" + std::string(name) + "'");
}

SubspacePartition Partition(std::span<const double> scores, double ratio,
                            double lambda) {
  CheckRatio(ratio, lambda);
  const std::size_t n = scores.size();
  const std::size_t k = Budget(n, ratio);
  if (k == 0) {
    throw std::invalid_argument("budget round(r*n) is zero for n=" +
                                std::to_string(n) +
                                ", r=" + std::to_string(ratio));
  }
  SubspacePartition p;
  p.budget = k;
  p.subspace_size = SubspaceSize(n, k, lambda * ratio * static_cast<double>(n));
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  std::stable_sort(p.order.begin(), p.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  for (std::size_t start = 0; start < n; start += p.subspace_size) {
    const std::size_t end = std::min(n, start + p.subspace_size);
    p.subspaces.emplace_back(p.order.begin() + start, p.order.begin() + end);
  }
  return p;
}

std::vector<double> SubspaceMass(std::span<const double> scores,
                                 const SubspacePartition& partition) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  std::vector<double> mass;
  mass.reserve(partition.num_subspaces());
  for (const IndexSet& c : partition.subspaces) {
    double m = 0.0;
    for (std::size_t j : c) m += std::exp(scores[j] - mx);
    mass.push_back(m / z);
  }
  return mass;
}

IndexSet WeightedWithoutReplacement(std::span<const std::size_t> pool,
                                    std::span<const double> scores,
                                    std::size_t k, RngStream& rng) {
  if (k > pool.size()) {
    throw std::invalid_argument("cannot draw " + std::to_string(k) +
                                " from a pool of " +
                                std::to_string(pool.size()));
  }
  if (k == pool.size()) {
    IndexSet all(pool.begin(), pool.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(pool.size());
  for (std::size_t j : pool) keys.emplace_back(scores[j] + rng.Gumbel(), j);
  std::partial_sort(keys.begin(), keys.begin() + static_cast<long>(k),
                    keys.end(), [](const auto& a, const auto& b) {
                      return a.first > b.first ||
                             (a.first == b.first && a.second < b.second);
                    });
  IndexSet out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(keys[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> ExactMarginals(std::span<const double> scores, double ratio,
                                   double lambda) {
  const SubspacePartition part = Partition(scores, ratio, lambda);
  const std::vector<double> mass = SubspaceMass(scores, part);
  const std::size_t k = part.budget;
  double eligible = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (part.subspaces[i].size() >= k) eligible += mass[i];
  }
  if (!(eligible > 0.0)) throw std::invalid_argument("no subspace can hold the budget");
  const double mx = *std::max_element(scores.begin(), scores.end());

  std::vector<double> out(scores.size(), 0.0);
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const IndexSet& c = part.subspaces[i];
    const std::size_t m = c.size();
    if (m < k) continue;
    if (m > kMaxExactSubspace) {
      throw std::invalid_argument("subspace of " + std::to_string(m) +
                                  " tokens is too large to enumerate");
    }
    std::vector<double> w(m);
    for (std::size_t a = 0; a < m; ++a) w[a] = std::exp(scores[c[a]] - mx);
    // reach[mask]: probability that the first |mask| draws are exactly mask.
    const std::size_t full = std::size_t{1} << m;
    std::vector<double> reach(full, 0.0);
    reach[0] = 1.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (reach[mask] == 0.0) continue;
      const auto drawn = static_cast<std::size_t>(std::popcount(mask));
      if (drawn == k) {
        for (std::size_t a = 0; a < m; ++a) {
          if (mask >> a & 1) out[c[a]] += mass[i] / eligible * reach[mask];
        }
        continue;
      }
      double left = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        if (!(mask >> a & 1)) left += w[a];
      }
      for (std::size_t a = 0; a < m; ++a) {
        if (!(mask >> a & 1)) reach[mask | std::size_t{1} << a] += reach[mask] * w[a] / left;
      }
    }
  }
  return out;
}

SampledCombination SampleCombination(std::span<const double> scores,
                                     double ratio, double lambda,
                                     RngStream rng, SamplerKind kind) {
  SampledCombination out;
  out.seed = rng.base_seed();
  out.stream = rng.stream_id();
  if (kind != SamplerKind::kOcss) {
    CheckRatio(ratio, lambda);
    const std::size_t n = scores.size();
    const std::size_t k = Budget(n, ratio);
    if (k == 0) throw std::invalid_argument("budget round(r*n) is zero");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    if (kind == SamplerKind::kMultinomial) {
      out.indices = WeightedWithoutReplacement(pool, scores, k, rng);
    } else {
      const std::vector<double> flat(n, 0.0);
      out.indices = WeightedWithoutReplacement(pool, flat, k, rng);
    }
    out.subspace.push_back(0);
    return out;
  }

  const SubspacePartition part = Partition(scores, ratio, lambda);
  const std::vector<double> mass = SubspaceMass(scores, part);
  double eligible_mass = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (part.subspaces[i].size() >= part.budget) eligible_mass += mass[i];
  }
  if (!(eligible_mass > 0.0)) {
    throw std::invalid_argument("no subspace can hold the budget");
  }
  // Categorical over the subspaces that can hold k tokens.
  const double u = rng.Uniform() * eligible_mass;
  std::size_t chosen = mass.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (part.subspaces[i].size() < part.budget) continue;
    chosen = i;
    acc += mass[i];
    if (u < acc) break;
  }
  out.subspace.push_back(chosen);
  out.indices = WeightedWithoutReplacement(part.subspaces[chosen], scores,
                                           part.budget, rng);
  return out;
}

std::vector<SampledCombination> SampleGroup(std::span<const double> scores,
                                            double ratio, double lambda,
                                            std::size_t g,
                                            const RngStream& base,
                                            SamplerKind kind) {
  if (g < 2) {
    throw std::invalid_argument("group size must be at least 2, got " +
                                std::to_string(g));
  }
  std::vector<SampledCombination> group;
  group.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    group.push_back(SampleCombination(scores, ratio, lambda, base.Split(i), kind));
  }
  return group;
}

SampledCombination SamplePerFrame(const GridLayout& layout,
                                  std::span<const double> scores, double ratio,
                                  double lambda,
                                  std::span<const RngStream> frame_streams,
                                  SamplerKind kind) {
  const std::size_t per_frame = layout.tokens_per_frame();
  if (scores.size() != layout.num_tokens()) {
    throw std::invalid_argument("score vector does not match grid");
  }
  if (frame_streams.size() != layout.frames) {
    throw std::invalid_argument("need one rng stream per frame");
  }
  if (Budget(per_frame, ratio) == 0) {
    throw std::invalid_argument("per-frame budget round(r*h*w) is zero for r=" +
                                std::to_string(ratio));
  }
  SampledCombination out;
  out.seed = frame_streams.empty() ? 0 : frame_streams[0].base_seed();
  out.stream = frame_streams.empty() ? 0 : frame_streams[0].stream_id();
  for (std::size_t f = 0; f < layout.frames; ++f) {
    const auto frame_scores = scores.subspan(f * per_frame, per_frame);
    SampledCombination local =
        SampleCombination(frame_scores, ratio, lambda, frame_streams[f], kind);
    for (std::size_t j : local.indices) out.indices.push_back(f * per_frame + j);
    out.subspace.push_back(local.subspace.front());
  }
  return out;
}

SampledCombination SamplePerFrame(const GridLayout& layout,
                                  std::span<const double> scores, double ratio,
                                  double lambda, const RngStream& rng,
                                  SamplerKind kind) {
  std::vector<RngStream> streams;
  streams.reserve(layout.frames);
  for (std::size_t f = 0; f < layout.frames; ++f) streams.push_back(rng.Split(f));
  SampledCombination out =
      SamplePerFrame(layout, scores, ratio, lambda, streams, kind);
  out.seed = rng.base_seed();
  out.stream = rng.stream_id();
  return out;
}

ExplorationSpace ExplorationLogSpace(std::size_t n, std::size_t k,
                                     double lambda) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("exploration space needs 1 <= k <= n");
  }
  ExplorationSpace e;
  e.log2_arbitrary = static_cast<double>(n);
  e.subspace_size = SubspaceSize(n, k, lambda * static_cast<double>(k));
  e.num_subspaces = (n + e.subspace_size - 1) / e.subspace_size;
  const double m = static_cast<double>(e.subspace_size);
  const double kk = static_cast<double>(k);
  const double log_binom =
      std::lgamma(m + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(m - kk + 1.0);
  e.log2_ocss = std::log2(static_cast<double>(e.num_subspaces)) +
                log_binom / std::log(2.0);
  if (e.log2_ocss < 1e-12) {
    e.log2_ocss = 0.0;
    e.reduction_ratio = std::numeric_limits<double>::infinity();
  } else {
    e.reduction_ratio = e.log2_arbitrary / e.log2_ocss;
  }
  return e;
}

}  // namespace cacovid::ocss
