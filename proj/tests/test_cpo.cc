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
#include <vector>

#include <doctest.h>

#include "cacovid/cpo.h"
#include "cacovid/gradcheck.h"
#include "cacovid/rng.h"
#include "oracles.h"

namespace cacovid::cpo {
namespace {

policy::TokenGrid RandomGrid(policy::GridLayout layout, std::size_t n_q,
                             std::size_t dim, RngStream rng) {
  policy::TokenGrid g;
  g.layout = layout;
  g.video = Tensor({layout.num_tokens(), dim});
  g.question = Tensor({n_q, dim});
  for (double& x : g.video.data()) x = rng.Gaussian();
  for (double& x : g.question.data()) x = rng.Gaussian();
  return g;
}

RolloutGroup RandomGroup(Level level, std::size_t universe, std::size_t g,
                         RngStream& rng) {
  RolloutGroup group;
  group.level = level;
  for (std::size_t i = 0; i < g; ++i) {
    IndexSet s;
    for (std::size_t j = 0; j < universe; ++j) {
      if (rng.Uniform() < 0.4) s.push_back(j);
    }
    group.selections.push_back(s);
    group.rewards.push_back(i % 2 == 0 ? 1.0 : static_cast<double>(rng.Index(2)));
  }
  group.Normalize();
  return group;
}

policy::PolicyParams Perturbed(const policy::PolicyParams& p, double scale,
                               RngStream rng) {
  policy::PolicyParams q = p;
  for (auto& [name, t] : q.tensors) {
    for (double& x : t.data()) x += scale * rng.Gaussian();
  }
  return q;
}

}  // namespace

TEST_CASE("reward is exact-match accuracy") {
  RewardStats stats;
  CHECK(Reward("B", "B", &stats) == 1.0);
  CHECK(Reward("A", "B", &stats) == 0.0);
  CHECK(stats.unknown_symbols == 0);
  CHECK(Reward("??", "B", &stats) == 0.0);
  CHECK(Reward("Z", "B", &stats) == 0.0);
  CHECK(stats.unknown_symbols == 2);
}

TEST_CASE("group advantage examples") {
  CHECK(GroupAdvantage(std::vector<double>{1, 0}).values == std::vector<double>{1, -1});
  CHECK(GroupAdvantage(std::vector<double>{1, 1, 0, 0}).values ==
        std::vector<double>{1, 1, -1, -1});
  const Advantages flat = GroupAdvantage(std::vector<double>{1, 1, 1});
  CHECK(flat.degenerate);
  CHECK(flat.values == std::vector<double>{0, 0, 0});
  CHECK_THROWS(GroupAdvantage(std::vector<double>{1}));
}

TEST_CASE("advantages are shift and scale invariant") {
  RngStream rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t g = 2 + rng.Index(30);
    std::vector<double> r(g);
    for (double& x : r) x = rng.Gaussian();
    const double shift = 10 * rng.Gaussian();
    const double scale = 0.01 + 5 * rng.Uniform();
    std::vector<double> moved(g);
    for (std::size_t i = 0; i < g; ++i) moved[i] = scale * r[i] + shift;
    const auto a = GroupAdvantage(r).values;
    const auto b = GroupAdvantage(moved).values;
    const auto ref = oracle::Standardize(r);
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-9);
      CHECK(std::abs(a[i] - ref[i]) <= 1e-12);
      mean += a[i];
      sq += a[i] * a[i];
    }
    CHECK(std::abs(mean / static_cast<double>(g)) <= 1e-9);
    CHECK(std::abs(sq / static_cast<double>(g) - 1.0) <= 1e-9);
  }
}

TEST_CASE("clipped term arithmetic") {
  const ClipConfig clip;
  CHECK(ClippedTerm(1.5, 1.0, clip) == doctest::Approx(1.28).epsilon(1e-15));
  CHECK(ClippedTerm(0.5, -1.0, clip) == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(ClippedTerm(1.1, 1.0, clip) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(ClippedTerm(0.5, 1.0, clip) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ClippedTerm(1.5, -1.0, clip) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK_THROWS((ClipConfig{0.3, 0.2}).Validate());
  CHECK_THROWS((ClipConfig{0.0, 0.2}).Validate());
  CHECK_THROWS((ClipConfig{0.2, 1.0}).Validate());
}

TEST_CASE("objective at the snapshot is the mean advantage") {
  RngStream rng(2);
  Tensor logits({7, 2});
  for (double& x : logits.data()) x = rng.Gaussian();
  RolloutGroup group = RandomGroup(Level::kToken, 7, 4, rng);
  CHECK(std::abs(CpoObjectiveValue(logits, logits, group, ClipConfig{})) <= 1e-12);

  // Frame branch: two frames, symmetric logits, one frame selected.
  const Tensor sym = Tensor::Matrix(2, 2, {0, 0, 0, 0});
  RolloutGroup frames;
  frames.level = Level::kFrame;
  frames.selections = {{0}, {1}};
  frames.rewards = {1, 0};
  frames.Normalize();
  CHECK(CpoObjectiveValue(sym, sym, frames, ClipConfig{}) == 0.0);
}

TEST_CASE("objective value against a direct evaluation") {
  RngStream rng(13);
  Tensor now({5, 2}), old({5, 2});
  for (double& x : now.data()) x = rng.Gaussian();
  for (double& x : old.data()) x = rng.Gaussian();
  RolloutGroup group = RandomGroup(Level::kToken, 5, 3, rng);
  const ClipConfig clip;
  double expect = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto lp_new = policy::SelectionLogProb(now, group.selections[i], 5);
    const auto lp_old = policy::SelectionLogProb(old, group.selections[i], 5);
    for (std::size_t j = 0; j < 5; ++j) {
      const double ratio = std::exp(lp_new[j] - lp_old[j]);
      const double clipped = std::min(std::max(ratio, 0.8), 1.28);
      expect += std::min(ratio * group.advantages[i], clipped * group.advantages[i]);
    }
  }
  expect /= 15.0;
  CHECK(CpoObjectiveValue(now, old, group, clip) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("joint objective gradients match finite differences") {
  RngStream rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    RngStream r = rng.Split(static_cast<std::uint64_t>(trial));
    const policy::TokenGrid grid = RandomGrid({3, 2, 2}, 3, 4, r.Split(0));
    const policy::PolicyParams old = policy::InitParams(4, 5, 100 + trial);
    const policy::PolicyParams now = Perturbed(old, 0.05, r.Split(1));
    const auto old_scores = policy::Forward(grid, old);
    RngStream gr = r.Split(2);
    const RolloutGroup tokens = RandomGroup(Level::kToken, 12, 4, gr);
    const RolloutGroup frames = RandomGroup(Level::kFrame, 3, 4, gr);
    const ClipConfig clip;
    const ObjectiveResult res = JointObjective(grid, now, old_scores, &tokens, &frames, clip);
    CHECK(res.objective == doctest::Approx(res.token_objective + res.frame_objective));
    CHECK(res.objective ==
          doctest::Approx(JointObjectiveValue(grid, now, old_scores, &tokens, &frames, clip)));
    const diffcore::ScalarFn fn = [&](const diffcore::ParamMap& p) {
      policy::PolicyParams q = now;
      q.tensors = p;
      return JointObjectiveValue(grid, q, old_scores, &tokens, &frames, clip);
    };
    const auto check = diffcore::CompareGradients(
        res.gradients, diffcore::CentralDifference(fn, now.tensors));
    CHECK(check.relative_error <= 1e-3);
  }
}

TEST_CASE("gradient at the snapshot equals the unclipped surrogate gradient") {
  RngStream rng(4);
  const policy::TokenGrid grid = RandomGrid({2, 2, 2}, 2, 4, rng.Split(0));
  const policy::PolicyParams params = policy::InitParams(4, 4, 5);
  const auto old_scores = policy::Forward(grid, params);
  RngStream gr = rng.Split(1);
  const RolloutGroup tokens = RandomGroup(Level::kToken, 8, 4, gr);
  const ObjectiveResult res =
      JointObjective(grid, params, old_scores, &tokens, nullptr, ClipConfig{});
  const diffcore::ScalarFn surrogate = [&](const diffcore::ParamMap& p) {
    policy::PolicyParams q = params;
    q.tensors = p;
    const auto now = policy::Forward(grid, q);
    double total = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto a = policy::SelectionLogProb(now.token_logits, tokens.selections[i], 8);
      const auto b = policy::SelectionLogProb(old_scores.token_logits, tokens.selections[i], 8);
      for (std::size_t j = 0; j < 8; ++j) total += std::exp(a[j] - b[j]) * tokens.advantages[i];
    }
    return total / (8.0 * static_cast<double>(tokens.size()));
  };
  const auto check = diffcore::CompareGradients(
      res.gradients, diffcore::CentralDifference(surrogate, params.tensors));
  CHECK(check.relative_error <= 1e-6);
}

TEST_CASE("an ascent step raises the selection probability of a rewarded token") {
  RngStream rng(8);
  const policy::TokenGrid grid = RandomGrid({1, 2, 3}, 2, 4, rng);
  policy::PolicyParams params = policy::InitParams(4, 4, 1);
  const auto old_scores = policy::Forward(grid, params);
  RolloutGroup g;
  g.selections = {{2, 4}, {0, 1}};
  g.rewards = {1, 0};
  g.Normalize();
  const ObjectiveResult res = JointObjective(grid, params, old_scores, &g, nullptr, ClipConfig{});
  for (auto& [name, t] : params.tensors) {
    const Tensor& d = res.gradients.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += 1e-3 * d[i];
  }
  const auto after = policy::Forward(grid, params);
  auto keep = [](const Tensor& l, std::size_t j) {
    return 1.0 / (1.0 + std::exp(l(j, 0) - l(j, 1)));
  };
  CHECK(keep(after.token_logits, 2) > keep(old_scores.token_logits, 2));
}

TEST_CASE("empty or mismatched groups are rejected") {
  const Tensor logits({3, 2});
  RolloutGroup empty;
  CHECK_THROWS(CpoObjectiveValue(logits, logits, empty, ClipConfig{}));
  RolloutGroup g;
  g.selections = {{0}, {1}};
  g.rewards = {1, 0};
  g.Normalize();
  CHECK_THROWS(CpoObjectiveValue(logits, Tensor({4, 2}), g, ClipConfig{}));
  g.selections = {{0}, {5}};
  CHECK_THROWS(CpoObjectiveValue(logits, logits, g, ClipConfig{}));
}

}  // namespace cacovid::cpo
