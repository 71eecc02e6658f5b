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

// Combinatorial policy optimization: binary rewards, group-normalized
// advantages and the clipped importance-ratio objective over keep/drop
// decisions of every token (or frame) in the universe.

#ifndef CACOVID_CPO_H_
#define CACOVID_CPO_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cacovid/graph.h"
#include "cacovid/policy_net.h"

namespace cacovid::cpo {

using diffcore::Tensor;
using policy::IndexSet;

inline constexpr std::string_view kDefaultAlphabet = "ABCD";

struct RewardStats {
  std::size_t unknown_symbols = 0;
};

// 1 on an exact match, 0 otherwise. A prediction outside `alphabet` scores 0
// and bumps stats->unknown_symbols.
double Reward(std::string_view prediction, std::string_view answer,
              RewardStats* stats = nullptr,
              std::string_view alphabet = kDefaultAlphabet);

struct Advantages {
  std::vector<double> values;
  // Zero reward variance: every advantage is 0 and the group carries no
  // gradient.
  bool degenerate = false;
};

// (R - mean) / std with the population standard deviation.
Advantages GroupAdvantage(std::span<const double> rewards);

enum class Level { kToken, kFrame };

struct RolloutGroup {
  Level level = Level::kToken;
  std::vector<IndexSet> selections;
  std::vector<double> rewards;
  std::vector<double> advantages;
  bool degenerate = false;

  std::size_t size() const { return selections.size(); }
  // Fills advantages/degenerate from rewards.
  void Normalize();
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;
  void Validate() const;
};

// min(ratio * A, clip(ratio, 1 - eps_low, 1 + eps_high) * A)
double ClippedTerm(double ratio, double advantage, const ClipConfig& clip);

// Mean over rollouts i and universe indices j of the clipped term, with
// ratio_ij = pi_new(j | S_i) / pi_old(j | S_i). `logits` is the n x 2 output
// of the current policy inside `graph`; `old_logits` is the frozen snapshot's.
// Returns the scalar objective node (to be maximized).
diffcore::Var CpoObjective(diffcore::Graph& graph, diffcore::Var logits,
                           const Tensor& old_logits, const RolloutGroup& group,
                           const ClipConfig& clip);

// Plain evaluation of the same objective on logit tensors; no graph.
double CpoObjectiveValue(const Tensor& logits, const Tensor& old_logits,
                         const RolloutGroup& group, const ClipConfig& clip);

struct ObjectiveResult {
  double objective = 0.0;  // token + frame
  double token_objective = 0.0;
  double frame_objective = 0.0;
  diffcore::Gradients gradients;
};

// Token and frame objectives through one policy forward pass, summed with
// equal weight. Either group may be null or empty, in which case its term is
// 0. Gradients are taken with respect to `current`.
ObjectiveResult JointObjective(const policy::TokenGrid& grid,
                               const policy::PolicyParams& current,
                               const policy::ContributionScores& old_scores,
                               const RolloutGroup* token_group,
                               const RolloutGroup* frame_group,
                               const ClipConfig& clip);

// Value only (for finite differences); never touches backward.
double JointObjectiveValue(const policy::TokenGrid& grid,
                           const policy::PolicyParams& current,
                           const policy::ContributionScores& old_scores,
                           const RolloutGroup* token_group,
                           const RolloutGroup* frame_group,
                           const ClipConfig& clip);

}  // namespace cacovid::cpo

#endif  // CACOVID_CPO_H_
