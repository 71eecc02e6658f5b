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

// Inference-time token retention.
//
// A budget of round(r * n_vid) tokens is split over frames, either evenly
// (FrameAvg) or in proportion to softmax(frame contribution) (FrameAda, and
// FrameAda+ST). Inside a frame the highest-contribution tokens are kept;
// FrameAda+ST gives a fraction of each frame's budget to evenly strided grid
// positions instead.

#ifndef CACOVID_RETENTION_H_
#define CACOVID_RETENTION_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cacovid/policy_net.h"

namespace cacovid::retention {

using policy::GridLayout;
using policy::IndexSet;

enum class Strategy { kFrameAvg, kFrameAda, kFrameAdaSt };

std::string_view StrategyName(Strategy s);  // "frame-avg", ...
Strategy ParseStrategy(std::string_view name);

inline constexpr double kDefaultStFraction = 0.5;

struct RetentionPlan {
  std::vector<std::size_t> per_frame_budget;
  Strategy strategy = Strategy::kFrameAdaSt;
  // Share of each frame budget given to strided positions; 0 unless
  // strategy is kFrameAdaSt.
  double st_fraction = 0.0;
  std::size_t total_budget = 0;
};

// Splits `total` into integer parts proportional to `weights` (which need not
// be normalized) by largest remainder; ties go to the lower index. Parts are
// capped at `capacity` with the overflow handed to the frames with the
// largest remaining fractional share.
std::vector<std::size_t> LargestRemainder(std::span<const double> weights,
                                          std::size_t total,
                                          std::size_t capacity);

RetentionPlan AllocateBudget(std::span<const double> frame_scores, double ratio,
                             std::size_t num_tokens, Strategy strategy,
                             double st_fraction = kDefaultStFraction);

// Global indices kept by `plan`, ascending.
IndexSet SelectTokens(std::span<const double> token_scores,
                      const GridLayout& layout, const RetentionPlan& plan);

struct Compression {
  IndexSet selected;
  diffcore::Tensor tokens;  // selected video rows, in index order
  RetentionPlan plan;
  policy::ContributionScores scores;
};

Compression Compress(const policy::TokenGrid& grid,
                     const policy::PolicyParams& params, double ratio,
                     Strategy strategy,
                     double st_fraction = kDefaultStFraction);

}  // namespace cacovid::retention

#endif  // CACOVID_RETENTION_H_
