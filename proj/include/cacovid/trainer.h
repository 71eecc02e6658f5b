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

// Training loop for the compression policy.
//
// Per training sample: freeze a snapshot of the policy, score the video once
// with it, then run n_iter rounds of
//   sample token and frame rollout groups -> query the environment ->
//   normalize advantages over the replay memory (or per iteration) ->
//   one gradient ascent step on J_token + J_frame -> adapt the token ratio.

#ifndef CACOVID_TRAINER_H_
#define CACOVID_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cacovid/cpo.h"
#include "cacovid/env.h"
#include "cacovid/ocss.h"
#include "cacovid/policy_net.h"

namespace cacovid::train {

using policy::IndexSet;

struct DynamicRatioState {
  double r_current = 0.02;
  double alpha_low = 0.125;
  double alpha_high = 0.875;
  double floor = 0.0;
  double cap = 1.0;
};

// Halves r above alpha_high, doubles it below alpha_low, then clamps to
// [floor, cap].
DynamicRatioState UpdateSampleRatio(double mean_reward, DynamicRatioState state);

// Token rollouts are drawn frame by frame or over the whole video at once.
enum class SampleScope { kFrame, kVideo };
std::string_view ScopeName(SampleScope scope);
SampleScope ParseScope(std::string_view name);

// Advantages are standardized over the sample's whole replay memory, or over
// each iteration's rollouts separately (the objective still runs over the
// whole memory).
enum class AdvantageScope { kReplay, kIteration };
std::string_view AdvantageScopeName(AdvantageScope scope);
AdvantageScope ParseAdvantageScope(std::string_view name);

enum class Optimizer { kSgd, kAdam };
std::string_view OptimizerName(Optimizer o);
Optimizer ParseOptimizer(std::string_view name);

struct TrainConfig {
  double r = 0.02;
  double r_f = 0.125;
  std::size_t g_t = 24;
  std::size_t g_f = 8;
  std::size_t n_iter = 5;
  double alpha_low = 0.125;
  double alpha_high = 0.875;
  cpo::ClipConfig clip;
  double lambda = 2.0;
  double lr_attn = 1e-7;
  double lr_mlp = 1e-6;
  std::uint64_t seed = 42;
  env::EnvConfig env;
  // 0 selects min(r, one token per scope unit).
  double r_floor = 0.0;
  double r_cap = 0.5;
  SampleScope scope = SampleScope::kFrame;
  ocss::SamplerKind sampler = ocss::SamplerKind::kOcss;
  AdvantageScope advantage_scope = AdvantageScope::kReplay;
  Optimizer optimizer = Optimizer::kSgd;
  double momentum = 0.0;  // sgd only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables global-norm clipping
  std::size_t hidden = 0;  // 0 -> 2 * dim
  std::size_t k_nn = 0;    // 0 -> DefaultNeighbors
  bool parallel_rollouts = true;

  void Validate() const;
  // Floor actually applied to the dynamic ratio.
  double EffectiveFloor() const;
};

struct ReplayEntry {
  ocss::SampledCombination combination;
  IndexSet selection;  // what the objective sees: tokens, or frames
  double reward = 0.0;
  std::size_t iteration = 0;
};

struct ReplayMemory {
  std::vector<ReplayEntry> token;
  std::vector<ReplayEntry> frame;

  void Clear();
  cpo::RolloutGroup TokenGroup(
      AdvantageScope scope = AdvantageScope::kReplay) const;
  cpo::RolloutGroup FrameGroup(
      AdvantageScope scope = AdvantageScope::kReplay) const;
};

// Keeps episodes the model cannot answer blind, in order. Throws when none
// are left.
std::vector<env::Episode> FilterDataset(std::span<const env::Episode> episodes);

// Rewards of `selections` on `ep`; the serial and parallel forms agree exactly.
std::vector<double> RolloutRewardsSerial(const env::Episode& ep,
                                         std::span<const IndexSet> selections,
                                         cpo::RewardStats* stats = nullptr);
std::vector<double> RolloutRewardsParallel(const env::Episode& ep,
                                           std::span<const IndexSet> selections,
                                           cpo::RewardStats* stats = nullptr);

struct IterationMetrics {
  std::size_t sample = 0;
  std::size_t iteration = 0;
  double mean_reward = 0.0;        // this iteration's token rollouts
  double frame_mean_reward = 0.0;  // this iteration's frame rollouts
  double r_current = 0.0;          // ratio used by this iteration
  double r_next = 0.0;
  double objective = 0.0;
  double token_objective = 0.0;
  double frame_objective = 0.0;
  double grad_norm = 0.0;
  double advantage_norm = 0.0;
  std::size_t token_rollouts = 0;  // new this iteration
  std::size_t frame_rollouts = 0;
};

void WriteMetricsLine(std::ostream& out, const IterationMetrics& m);

struct TrainResult {
  policy::PolicyParams params;
  std::vector<IterationMetrics> metrics;
  std::size_t token_rollouts = 0;
  std::size_t frame_rollouts = 0;
  std::size_t samples = 0;
  cpo::RewardStats reward_stats;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trains `init` on the filtered dataset; each metrics record is also written
// to `metrics_out` when given.
TrainResult Train(std::span<const env::Episode> dataset, const TrainConfig& cfg,
                  const policy::PolicyParams& init,
                  std::ostream* metrics_out = nullptr);

// Same, starting from InitParams(env.dim, hidden, seed).
TrainResult Train(std::span<const env::Episode> dataset, const TrainConfig& cfg,
                  std::ostream* metrics_out = nullptr);

}  // namespace cacovid::train

#endif  // CACOVID_TRAINER_H_
