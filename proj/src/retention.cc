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

#include "cacovid/retention.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cacovid/dpc_knn.h"
#include "cacovid/ocss.h"

namespace cacovid::retention {
namespace {

// Indices sorted by key descending, lower index first on ties.
std::vector<std::size_t> RankDescending(std::span<const double> key) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return idx;
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kFrameAvg: return "frame-avg";
    case Strategy::kFrameAda: return "frame-ada";
    case Strategy::kFrameAdaSt: return "frame-ada-st";
  }
  return "unknown";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "frame-avg") return Strategy::kFrameAvg;
  if (name == "frame-ada") return Strategy::kFrameAda;
  if (name == "frame-ada-st") return Strategy::kFrameAdaSt;
  throw std::invalid_argument("unknown retention strategy '" +
                              std::string(name) + "'");
}

std::vector<std::size_t> LargestRemainder(std::span<const double> weights,
                                          std::size_t total,
                                          std::size_t capacity) {
  const std::size_t t = weights.size();
  if (t == 0) throw std::invalid_argument("no frames to allocate over");
  if (total > capacity * t) {
    throw std::invalid_argument("budget " + std::to_string(total) +
                                " exceeds total capacity " +
                                std::to_string(capacity * t));
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw std::invalid_argument("allocation weights must be positive");
  }
  std::vector<double> ideal(t);
  std::vector<double> frac(t);
  std::vector<std::size_t> parts(t);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < t; ++i) {
    ideal[i] = weights[i] / sum * static_cast<double>(total);
    const double fl = std::floor(ideal[i]);
    parts[i] = static_cast<std::size_t>(fl);
    frac[i] = ideal[i] - fl;
    assigned += parts[i];
  }
  // Rounding can leave Σ floor a hair off; trim from the smallest shares.
  while (assigned > total) {
    const auto order = RankDescending(ideal);
    for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
      if (parts[*it] > 0) {
        --parts[*it];
        --assigned;
      }
    }
  }
  const auto by_frac = RankDescending(frac);
  for (std::size_t q = 0; assigned < total; q = (q + 1) % t) {
    ++parts[by_frac[q]];
    ++assigned;
  }

  std::size_t overflow = 0;
  for (std::size_t& p : parts) {
    if (p > capacity) {
      overflow += p - capacity;
      p = capacity;
    }
  }
  while (overflow > 0) {
    std::vector<double> deficit(t);
    for (std::size_t i = 0; i < t; ++i) {
      deficit[i] = ideal[i] - static_cast<double>(parts[i]);
    }
    for (std::size_t i : RankDescending(deficit)) {
      if (parts[i] < capacity) {
        ++parts[i];
        --overflow;
        break;
      }
    }
  }
  return parts;
}

RetentionPlan AllocateBudget(std::span<const double> frame_scores, double ratio,
                             std::size_t num_tokens, Strategy strategy,
                             double st_fraction) {
  const std::size_t t = frame_scores.size();
  if (t == 0 || num_tokens % t != 0) {
    throw std::invalid_argument("token count must split evenly over frames");
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("retention ratio must lie in (0, 1]");
  }
  if (!(st_fraction >= 0.0 && st_fraction <= 1.0)) {
    throw std::invalid_argument("st_fraction must lie in [0, 1]");
  }
  RetentionPlan plan;
  plan.strategy = strategy;
  plan.st_fraction = strategy == Strategy::kFrameAdaSt ? st_fraction : 0.0;
  plan.total_budget = ocss::Budget(num_tokens, ratio);
  if (plan.total_budget == 0) {
    throw std::invalid_argument("retention budget round(r*n) is zero");
  }
  std::vector<double> weights(t, 1.0);
  if (strategy != Strategy::kFrameAvg) {
    const double mx = *std::max_element(frame_scores.begin(), frame_scores.end());
    for (std::size_t i = 0; i < t; ++i) {
      weights[i] = std::exp(frame_scores[i] - mx);
    }
  }
  plan.per_frame_budget =
      LargestRemainder(weights, plan.total_budget, num_tokens / t);
  return plan;
}

IndexSet SelectTokens(std::span<const double> token_scores,
                      const GridLayout& layout, const RetentionPlan& plan) {
  const std::size_t per_frame = layout.tokens_per_frame();
  if (token_scores.size() != layout.num_tokens()) {
    throw std::invalid_argument("token scores do not match grid");
  }
  if (plan.per_frame_budget.size() != layout.frames) {
    throw std::invalid_argument("plan does not match frame count");
  }
  std::vector<std::size_t> budget = plan.per_frame_budget;
  if (std::any_of(budget.begin(), budget.end(),
                  [&](std::size_t b) { return b > per_frame; })) {
    std::vector<double> w(budget.begin(), budget.end());
    const std::size_t total = std::accumulate(budget.begin(), budget.end(),
                                              std::size_t{0});
    budget = LargestRemainder(w, total, per_frame);
  }

  IndexSet out;
  std::vector<bool> taken(per_frame);
  for (std::size_t f = 0; f < layout.frames; ++f) {
    const std::size_t n_f = budget[f];
    if (n_f == 0) continue;
    const auto scores = token_scores.subspan(f * per_frame, per_frame);
    const auto top_count = std::min(
        n_f, static_cast<std::size_t>(std::ceil(
                 (1.0 - plan.st_fraction) * static_cast<double>(n_f) - 1e-9)));
    std::fill(taken.begin(), taken.end(), false);
    const auto ranked = RankDescending(scores);
    for (std::size_t q = 0; q < top_count; ++q) taken[ranked[q]] = true;

    const std::size_t strided = n_f - top_count;
    if (strided > 0) {
      const std::size_t stride = std::max<std::size_t>(1, per_frame / strided);
      for (std::size_t s = 0; s < strided; ++s) {
        std::size_t pos = (s * stride) % per_frame;
        while (taken[pos]) pos = (pos + 1) % per_frame;
        taken[pos] = true;
      }
    }
    for (std::size_t j = 0; j < per_frame; ++j) {
      if (taken[j]) out.push_back(f * per_frame + j);
    }
  }
  return out;
}

Compression Compress(const policy::TokenGrid& grid,
                     const policy::PolicyParams& params, double ratio,
                     Strategy strategy, double st_fraction) {
  Compression c;
  c.scores = policy::Forward(grid, params);
  c.plan = AllocateBudget(c.scores.frame_scores, ratio,
                          grid.layout.num_tokens(), strategy, st_fraction);
  c.selected = SelectTokens(c.scores.token_scores, grid.layout, c.plan);
  c.tokens = dpc::GatherRows(grid.video, c.selected);
  return c;
}

}  // namespace cacovid::retention
