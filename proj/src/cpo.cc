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

#include "cacovid/cpo.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cacovid::cpo {
namespace {

using diffcore::Graph;
using diffcore::Var;

void CheckGroup(const RolloutGroup& group) {
  if (group.advantages.size() != group.selections.size()) {
    throw std::invalid_argument("rollout group has " +
                                std::to_string(group.selections.size()) +
                                " selections but " +
                                std::to_string(group.advantages.size()) +
                                " advantages");
  }
}

// g x n log-probabilities of the recorded decisions under `logits`.
Tensor OldLogProbs(const Tensor& old_logits, const RolloutGroup& group) {
  const std::size_t n = old_logits.rows();
  Tensor out({group.size(), n});
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto lp = policy::SelectionLogProb(old_logits, group.selections[i], n);
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(lp[j])) {
        throw std::domain_error("old policy assigns zero probability to a "
                                "recorded decision");
      }
      out(i, j) = lp[j];
    }
  }
  return out;
}

Tensor RowBroadcast(std::span<const double> per_row, std::size_t cols) {
  Tensor out({per_row.size(), cols});
  for (std::size_t i = 0; i < per_row.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = per_row[i];
  }
  return out;
}

bool Active(const RolloutGroup* g) { return g != nullptr && g->size() > 0; }

}  // namespace

double Reward(std::string_view prediction, std::string_view answer,
              RewardStats* stats, std::string_view alphabet) {
  const bool known = prediction.size() == 1 &&
                     alphabet.find(prediction[0]) != std::string_view::npos;
  if (!known) {
    if (stats != nullptr) ++stats->unknown_symbols;
    return 0.0;
  }
  return prediction == answer ? 1.0 : 0.0;
}

Advantages GroupAdvantage(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("advantage normalization needs at least 2 "
                                "rewards");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double sd = std::sqrt(var);

  Advantages a;
  a.values.assign(rewards.size(), 0.0);
  // Tiny spreads are rounding noise around a constant group.
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    a.degenerate = true;
    return a;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    a.values[i] = (rewards[i] - mean) / sd;
  }
  return a;
}

void RolloutGroup::Normalize() {
  Advantages a = GroupAdvantage(rewards);
  advantages = std::move(a.values);
  degenerate = a.degenerate;
}

void ClipConfig::Validate() const {
  if (!(eps_low > 0.0 && eps_low <= eps_high && eps_high < 1.0)) {
    throw std::invalid_argument("clip range needs 0 < eps_low <= eps_high < 1");
  }
}

double ClippedTerm(double ratio, double advantage, const ClipConfig& clip) {
  const double clipped =
      std::clamp(ratio, 1.0 - clip.eps_low, 1.0 + clip.eps_high);
  return std::min(ratio * advantage, clipped * advantage);
}

Var CpoObjective(Graph& graph, Var logits, const Tensor& old_logits,
                 const RolloutGroup& group, const ClipConfig& clip) {
  clip.Validate();
  CheckGroup(group);
  const std::size_t n = graph.shape(logits).at(0);
  if (old_logits.rank() != 2 || old_logits.rows() != n ||
      old_logits.cols() != 2) {
    throw std::invalid_argument("old logits do not match current logits");
  }
  if (group.size() == 0) throw std::invalid_argument("empty rollout group");
  Var log_new = policy::SelectionLogProb(graph, logits, group.selections);
  Var log_old = graph.Constant(OldLogProbs(old_logits, group), "log_pi_old");
  Var ratio = graph.Exp(graph.Sub(log_new, log_old));
  Var adv = graph.Constant(RowBroadcast(group.advantages, n), "advantage");
  Var unclipped = graph.Mul(ratio, adv);
  Var clipped =
      graph.Mul(graph.Clamp(ratio, 1.0 - clip.eps_low, 1.0 + clip.eps_high), adv);
  return graph.Mean(graph.Minimum(unclipped, clipped));
}

double CpoObjectiveValue(const Tensor& logits, const Tensor& old_logits,
                         const RolloutGroup& group, const ClipConfig& clip) {
  clip.Validate();
  CheckGroup(group);
  const std::size_t n = logits.rows();
  if (group.size() == 0) throw std::invalid_argument("empty rollout group");
  double total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto lp_new = policy::SelectionLogProb(logits, group.selections[i], n);
    const auto lp_old =
        policy::SelectionLogProb(old_logits, group.selections[i], n);
    for (std::size_t j = 0; j < n; ++j) {
      total += ClippedTerm(std::exp(lp_new[j] - lp_old[j]),
                           group.advantages[i], clip);
    }
  }
  return total / static_cast<double>(group.size() * n);
}

ObjectiveResult JointObjective(const policy::TokenGrid& grid,
                               const policy::PolicyParams& current,
                               const policy::ContributionScores& old_scores,
                               const RolloutGroup* token_group,
                               const RolloutGroup* frame_group,
                               const ClipConfig& clip) {
  Graph g;
  policy::PolicyNodes nodes =
      policy::BuildPolicyGraph(g, grid.layout, grid.question.rows(),
                               current.dim, current.hidden);
  Var zero = g.Constant(Tensor::Scalar(0.0), "zero");
  Var token_term = zero;
  Var frame_term = zero;
  if (Active(token_group)) {
    token_term = CpoObjective(g, nodes.token_logits, old_scores.token_logits,
                              *token_group, clip);
  }
  if (Active(frame_group)) {
    frame_term = CpoObjective(g, nodes.frame_logits, old_scores.frame_logits,
                              *frame_group, clip);
  }
  g.SetOutput(g.Add(token_term, frame_term));
  ObjectiveResult r;
  r.objective = g.Forward(policy::MakeFeed(grid, current)).item();
  r.token_objective = g.value(token_term).item();
  r.frame_objective = g.value(frame_term).item();
  r.gradients = g.Backward();
  return r;
}

double JointObjectiveValue(const policy::TokenGrid& grid,
                           const policy::PolicyParams& current,
                           const policy::ContributionScores& old_scores,
                           const RolloutGroup* token_group,
                           const RolloutGroup* frame_group,
                           const ClipConfig& clip) {
  const policy::ContributionScores now = policy::Forward(grid, current);
  double j = 0.0;
  if (Active(token_group)) {
    j += CpoObjectiveValue(now.token_logits, old_scores.token_logits,
                           *token_group, clip);
  }
  if (Active(frame_group)) {
    j += CpoObjectiveValue(now.frame_logits, old_scores.frame_logits,
                           *frame_group, clip);
  }
  return j;
}

}  // namespace cacovid::cpo
