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

#include "cacovid/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cacovid/dpc_knn.h"
#include "cacovid/rng.h"

namespace cacovid::train {
namespace {

using diffcore::Tensor;

constexpr std::uint64_t kTrainStream = 0x747261696E6572ULL;

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double GlobalNorm(const diffcore::Gradients& grads) {
  double s = 0.0;
  for (const auto& [name, g] : grads) {
    for (double x : g.data()) s += x * x;
  }
  return std::sqrt(s);
}

cpo::RolloutGroup ToGroup(const std::vector<ReplayEntry>& entries,
                          cpo::Level level, AdvantageScope scope) {
  cpo::RolloutGroup g;
  g.level = level;
  for (const ReplayEntry& e : entries) {
    g.selections.push_back(e.selection);
    g.rewards.push_back(e.reward);
  }
  if (scope == AdvantageScope::kReplay) {
    if (g.size() >= 2) {
      g.Normalize();
    } else {
      g.advantages.assign(g.size(), 0.0);
      g.degenerate = true;
    }
    return g;
  }
  g.advantages.assign(g.size(), 0.0);
  g.degenerate = true;
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].iteration == entries[lo].iteration) {
      ++hi;
    }
    if (hi - lo >= 2) {
      const cpo::Advantages a = cpo::GroupAdvantage(
          std::span<const double>(g.rewards).subspan(lo, hi - lo));
      std::copy(a.values.begin(), a.values.end(), g.advantages.begin() + lo);
      g.degenerate = g.degenerate && a.degenerate;
    }
    lo = hi;
  }
  return g;
}

double AdvantageNorm(const cpo::RolloutGroup& g) {
  double s = 0.0;
  for (double a : g.advantages) s += a * a;
  return std::sqrt(s);
}

// Representative tokens of the sampled frames, as global indices.
IndexSet FrameRepresentatives(const env::Episode& ep, const IndexSet& frames,
                              std::size_t budget, std::size_t k_nn) {
  const policy::GridLayout& layout = ep.grid.layout;
  const std::size_t per_frame = layout.tokens_per_frame();
  IndexSet pool;
  for (std::size_t f : frames) {
    for (std::size_t j = 0; j < per_frame; ++j) pool.push_back(f * per_frame + j);
  }
  const std::size_t n_select = std::clamp<std::size_t>(budget, 1, pool.size());
  const Tensor points = dpc::GatherRows(ep.grid.video, pool);
  std::size_t k = k_nn == 0 ? dpc::DefaultNeighbors(pool.size()) : k_nn;
  if (pool.size() > 1) k = std::min(k, pool.size() - 1);
  const dpc::PeakSelection peaks = dpc::DensityPeaks(points, k, n_select);
  IndexSet out;
  out.reserve(peaks.indices.size());
  for (std::size_t i : peaks.indices) out.push_back(pool[i]);
  return out;
}

struct OptimizerState {
  diffcore::ParamMap first;
  diffcore::ParamMap second;
  std::size_t steps = 0;
};

// Ascent step: the objective is maximized.
void Step(policy::PolicyParams& params, const diffcore::Gradients& grads,
          const TrainConfig& cfg, OptimizerState& state) {
  ++state.steps;
  const double norm = GlobalNorm(grads);
  const double scale = cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm
                           ? cfg.max_grad_norm / norm
                           : 1.0;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (auto& [name, value] : params.tensors) {
    const double lr =
        policy::ParamGroup(name) == policy::kAttnGroup ? cfg.lr_attn : cfg.lr_mlp;
    std::span<double> w = value.data();
    std::vector<double> g(grads.at(name).data().begin(),
                          grads.at(name).data().end());
    for (double& x : g) x *= scale;
    if (cfg.optimizer == Optimizer::kAdam) {
      std::span<double> m =
          state.first.try_emplace(name, Tensor(value.shape())).first->second.data();
      std::span<double> v =
          state.second.try_emplace(name, Tensor(value.shape())).first->second.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        w[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_eps);
      }
    } else if (cfg.momentum > 0.0) {
      std::span<double> v =
          state.first.try_emplace(name, Tensor(value.shape())).first->second.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = cfg.momentum * v[i] + g[i];
        w[i] += lr * v[i];
      }
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += lr * g[i];
    }
  }
}

}  // namespace

DynamicRatioState UpdateSampleRatio(double mean_reward, DynamicRatioState state) {
  if (mean_reward > state.alpha_high) {
    state.r_current /= 2.0;
  } else if (mean_reward < state.alpha_low) {
    state.r_current *= 2.0;
  }
  state.r_current = std::clamp(state.r_current, state.floor, state.cap);
  return state;
}

std::string_view OptimizerName(Optimizer o) {
  return o == Optimizer::kSgd ? "sgd" : "adam";
}

Optimizer ParseOptimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "adam") return Optimizer::kAdam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string_view AdvantageScopeName(AdvantageScope scope) {
  return scope == AdvantageScope::kReplay ? "replay" : "iteration";
}

AdvantageScope ParseAdvantageScope(std::string_view name) {
  if (name == "replay") return AdvantageScope::kReplay;
  if (name == "iteration") return AdvantageScope::kIteration;
  throw std::invalid_argument("unknown advantage scope '" + std::string(name) +
                              "'");
}

std::string_view ScopeName(SampleScope scope) {
  return scope == SampleScope::kFrame ? "frame" : "video";
}

SampleScope ParseScope(std::string_view name) {
  if (name == "frame") return SampleScope::kFrame;
  if (name == "video") return SampleScope::kVideo;
  throw std::invalid_argument("unknown sample scope '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  env.Validate();
  clip.Validate();
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("train config: " + msg);
  };
  if (!(r > 0.0 && r < 1.0)) fail("r must lie in (0, 1)");
  if (!(r_f > 0.0 && r_f < 1.0)) fail("r_f must lie in (0, 1)");
  if (g_t < 2 || g_f < 2) fail("group sizes must be at least 2");
  if (n_iter == 0) fail("n_iter must be positive");
  if (!(alpha_low >= 0.0 && alpha_low < alpha_high && alpha_high <= 1.0)) {
    fail("need 0 <= alpha_low < alpha_high <= 1");
  }
  if (!(lambda > 0.0)) fail("lambda must be positive");
  if (!(lr_attn >= 0.0) || !(lr_mlp >= 0.0)) fail("learning rates must be >= 0");
  if (!(r_cap > 0.0 && r_cap < 1.0)) fail("r_cap must lie in (0, 1)");
  if (!(r_floor >= 0.0 && r_floor <= r_cap)) fail("r_floor must lie in [0, r_cap]");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
    fail("adam needs beta1, beta2 in [0, 1) and eps > 0");
  }
  if (!(max_grad_norm >= 0.0)) fail("max_grad_norm must be >= 0");
  if (ocss::Budget(env.frames, r_f) == 0) fail("r_f selects no frame");
}

double TrainConfig::EffectiveFloor() const {
  if (r_floor > 0.0) return r_floor;
  const std::size_t unit = scope == SampleScope::kFrame
                               ? env.height * env.width
                               : env.num_tokens();
  return std::min(r, 1.0 / static_cast<double>(unit));
}

void ReplayMemory::Clear() {
  token.clear();
  frame.clear();
}

cpo::RolloutGroup ReplayMemory::TokenGroup(AdvantageScope scope) const {
  return ToGroup(token, cpo::Level::kToken, scope);
}

cpo::RolloutGroup ReplayMemory::FrameGroup(AdvantageScope scope) const {
  return ToGroup(frame, cpo::Level::kFrame, scope);
}

std::vector<env::Episode> FilterDataset(std::span<const env::Episode> episodes) {
  std::vector<env::Episode> kept;
  for (const env::Episode& ep : episodes) {
    if (env::BlindReward(ep) == 0.0) kept.push_back(ep);
  }
  if (kept.empty()) {
    throw std::invalid_argument("blind filtering removed all " +
                                std::to_string(episodes.size()) + " episodes");
  }
  return kept;
}

std::vector<double> RolloutRewardsSerial(const env::Episode& ep,
                                         std::span<const IndexSet> selections,
                                         cpo::RewardStats* stats) {
  const std::string alphabet = env::Alphabet(ep.alphabet);
  const std::string answer(1, ep.answer);
  std::vector<double> out(selections.size());
  for (std::size_t i = 0; i < selections.size(); ++i) {
    out[i] = cpo::Reward(env::OracleAnswer(selections[i], ep), answer, stats,
                         alphabet);
  }
  return out;
}

std::vector<double> RolloutRewardsParallel(const env::Episode& ep,
                                           std::span<const IndexSet> selections,
                                           cpo::RewardStats* stats) {
  const std::string alphabet = env::Alphabet(ep.alphabet);
  const std::string answer(1, ep.answer);
  const auto n = static_cast<long>(selections.size());
  std::vector<double> out(selections.size());
  std::size_t unknown = 0;
#pragma omp parallel for schedule(static) reduction(+ : unknown)
  for (long i = 0; i < n; ++i) {
    cpo::RewardStats local;
    out[i] = cpo::Reward(env::OracleAnswer(selections[i], ep), answer, &local,
                         alphabet);
    unknown += local.unknown_symbols;
  }
  if (stats != nullptr) stats->unknown_symbols += unknown;
  return out;
}

void WriteMetricsLine(std::ostream& out, const IterationMetrics& m) {
  nlohmann::json j = {
      {"sample", m.sample},
      {"iteration", m.iteration},
      {"mean_reward", m.mean_reward},
      {"frame_mean_reward", m.frame_mean_reward},
      {"r_current", m.r_current},
      {"r_next", m.r_next},
      {"objective", m.objective},
      {"token_objective", m.token_objective},
      {"frame_objective", m.frame_objective},
      {"grad_norm", m.grad_norm},
      {"advantage_norm", m.advantage_norm},
      {"token_rollouts", m.token_rollouts},
      {"frame_rollouts", m.frame_rollouts},
  };
  out << j.dump() << '\n';
}

TrainResult Train(std::span<const env::Episode> dataset, const TrainConfig& cfg,
                  std::ostream* metrics_out) {
  return Train(dataset, cfg,
               policy::InitParams(cfg.env.dim, cfg.hidden, cfg.seed),
               metrics_out);
}

TrainResult Train(std::span<const env::Episode> dataset, const TrainConfig& cfg,
                  const policy::PolicyParams& init, std::ostream* metrics_out) {
  cfg.Validate();
  const std::vector<env::Episode> episodes = FilterDataset(dataset);

  TrainResult result;
  result.params = init;
  policy::PolicyParams& params = result.params;
  OptimizerState opt_state;
  const RngStream root(cfg.seed, kTrainStream);
  ReplayMemory memory;

  for (std::size_t s = 0; s < episodes.size(); ++s) {
    const env::Episode& ep = episodes[s];
    const policy::GridLayout& layout = ep.grid.layout;
    const std::size_t n_vid = layout.num_tokens();

    const policy::PolicyParams snapshot = params;
    const policy::ContributionScores old_scores = policy::Forward(ep.grid, snapshot);
    memory.Clear();
    DynamicRatioState ratio{cfg.r, cfg.alpha_low, cfg.alpha_high,
                            cfg.EffectiveFloor(), cfg.r_cap};
    const RngStream sample_rng = root.Split(s);

    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
      const RngStream iter_rng = sample_rng.Split(it);
      const RngStream token_rng = iter_rng.Split(0);
      const RngStream frame_rng = iter_rng.Split(1);
      const double r_now = ratio.r_current;

      std::vector<ocss::SampledCombination> token_draws(cfg.g_t);
      for (std::size_t i = 0; i < cfg.g_t; ++i) {
        token_draws[i] =
            cfg.scope == SampleScope::kFrame
                ? ocss::SamplePerFrame(layout, old_scores.token_scores, r_now,
                                       cfg.lambda, token_rng.Split(i),
                                       cfg.sampler)
                : ocss::SampleCombination(old_scores.token_scores, r_now,
                                          cfg.lambda, token_rng.Split(i),
                                          cfg.sampler);
      }
      std::vector<IndexSet> token_sel(cfg.g_t);
      for (std::size_t i = 0; i < cfg.g_t; ++i) token_sel[i] = token_draws[i].indices;

      const std::vector<ocss::SampledCombination> frame_draws =
          ocss::SampleGroup(old_scores.frame_scores, cfg.r_f, cfg.lambda,
                            cfg.g_f, frame_rng, cfg.sampler);
      const std::size_t aligned = ocss::Budget(n_vid, r_now);
      std::vector<IndexSet> frame_tokens(cfg.g_f);
      for (std::size_t i = 0; i < cfg.g_f; ++i) {
        frame_tokens[i] =
            FrameRepresentatives(ep, frame_draws[i].indices, aligned, cfg.k_nn);
      }

      const auto rewards = cfg.parallel_rollouts
                               ? RolloutRewardsParallel
                               : RolloutRewardsSerial;
      const std::vector<double> token_rewards =
          rewards(ep, token_sel, &result.reward_stats);
      const std::vector<double> frame_rewards =
          rewards(ep, frame_tokens, &result.reward_stats);

      for (std::size_t i = 0; i < cfg.g_t; ++i) {
        memory.token.push_back(
            {token_draws[i], token_sel[i], token_rewards[i], it});
      }
      for (std::size_t i = 0; i < cfg.g_f; ++i) {
        memory.frame.push_back(
            {frame_draws[i], frame_draws[i].indices, frame_rewards[i], it});
      }
      const cpo::RolloutGroup token_group = memory.TokenGroup(cfg.advantage_scope);
      const cpo::RolloutGroup frame_group = memory.FrameGroup(cfg.advantage_scope);

      IterationMetrics m;
      m.sample = s;
      m.iteration = it;
      m.mean_reward = Mean(token_rewards);
      m.frame_mean_reward = Mean(frame_rewards);
      m.r_current = r_now;
      m.token_rollouts = cfg.g_t;
      m.frame_rollouts = cfg.g_f;
      m.advantage_norm = std::sqrt(AdvantageNorm(token_group) *
                                       AdvantageNorm(token_group) +
                                   AdvantageNorm(frame_group) *
                                       AdvantageNorm(frame_group));

      if (!token_group.degenerate || !frame_group.degenerate) {
        const cpo::ObjectiveResult obj = cpo::JointObjective(
            ep.grid, params, old_scores,
            token_group.degenerate ? nullptr : &token_group,
            frame_group.degenerate ? nullptr : &frame_group, cfg.clip);
        m.objective = obj.objective;
        m.token_objective = obj.token_objective;
        m.frame_objective = obj.frame_objective;
        m.grad_norm = GlobalNorm(obj.gradients);
        if (!std::isfinite(m.objective) || !std::isfinite(m.grad_norm)) {
          std::ostringstream msg;
          msg << "non-finite objective at sample " << s << " iteration " << it
              << ": objective=" << m.objective << " grad_norm=" << m.grad_norm
              << " r=" << r_now << " params_finite=" << params.AllFinite()
              << " token_rewards_mean=" << m.mean_reward;
          throw TrainingError(msg.str());
        }
        Step(params, obj.gradients, cfg, opt_state);
      }

      ratio = UpdateSampleRatio(m.mean_reward, ratio);
      m.r_next = ratio.r_current;
      result.token_rollouts += cfg.g_t;
      result.frame_rollouts += cfg.g_f;
      if (metrics_out != nullptr) WriteMetricsLine(*metrics_out, m);
      result.metrics.push_back(m);
    }
  }
  result.samples = episodes.size();
  return result;
}

}  // namespace cacovid::train
