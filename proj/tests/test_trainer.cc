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
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cacovid/env.h"
#include "cacovid/rng.h"
#include "cacovid/trainer.h"

namespace cacovid::train {
namespace {

env::EnvConfig TinyEnv() {
  env::EnvConfig e;
  e.frames = 4;
  e.height = 3;
  e.width = 3;
  e.dim = 6;
  e.question_tokens = 3;
  e.planted = 4;
  return e;
}

TrainConfig TinyConfig() {
  TrainConfig cfg;
  cfg.env = TinyEnv();
  cfg.r = 0.25;
  cfg.r_f = 0.25;
  cfg.lr_attn = 1e-3;
  cfg.lr_mlp = 1e-3;
  cfg.optimizer = Optimizer::kAdam;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("dynamic ratio updates") {
  DynamicRatioState s{0.02, 0.125, 0.875, 0.0, 1.0};
  std::vector<double> seen;
  for (double reward : {0.9, 0.9, 0.5, 0.1}) {
    s = UpdateSampleRatio(reward, s);
    seen.push_back(s.r_current);
  }
  CHECK(seen == std::vector<double>{0.01, 0.005, 0.005, 0.01});
  CHECK(UpdateSampleRatio(0.875, {0.1, 0.125, 0.875, 0.0, 1.0}).r_current == 0.1);
  CHECK(UpdateSampleRatio(0.125, {0.1, 0.125, 0.875, 0.0, 1.0}).r_current == 0.1);
  CHECK(UpdateSampleRatio(1.0, {0.1, 0.125, 0.875, 0.08, 1.0}).r_current == 0.08);
  CHECK(UpdateSampleRatio(0.0, {0.4, 0.125, 0.875, 0.0, 0.5}).r_current == 0.5);
}

TEST_CASE("config names round trip") {
  CHECK(ParseScope(ScopeName(SampleScope::kVideo)) == SampleScope::kVideo);
  CHECK(ParseScope(ScopeName(SampleScope::kFrame)) == SampleScope::kFrame);
  CHECK(ParseAdvantageScope("iteration") == AdvantageScope::kIteration);
  CHECK(ParseAdvantageScope(AdvantageScopeName(AdvantageScope::kReplay)) ==
        AdvantageScope::kReplay);
  CHECK(ParseOptimizer(OptimizerName(Optimizer::kAdam)) == Optimizer::kAdam);
  CHECK_THROWS(ParseScope("clip"));
  CHECK_THROWS(ParseOptimizer("lbfgs"));
}

TEST_CASE("config validation and effective floor") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  CHECK(cfg.EffectiveFloor() == 0.02);
  cfg.r = 0.1;
  CHECK(cfg.EffectiveFloor() == doctest::Approx(1.0 / 36.0));
  cfg.scope = SampleScope::kVideo;
  cfg.r = 0.02;
  CHECK(cfg.EffectiveFloor() == doctest::Approx(1.0 / 144.0));
  cfg.r_floor = 0.1;
  CHECK(cfg.EffectiveFloor() == 0.1);
  TrainConfig bad;
  bad.g_t = 1;
  CHECK_THROWS(bad.Validate());
  bad = TrainConfig{};
  bad.clip.eps_low = 0.5;
  bad.clip.eps_high = 0.1;
  CHECK_THROWS(bad.Validate());
  bad = TrainConfig{};
  bad.max_grad_norm = -1.0;
  CHECK_THROWS(bad.Validate());
}

TEST_CASE("blind episodes are filtered in order") {
  env::EnvConfig e = TinyEnv();
  e.p_blind = 0.3;
  const auto data = env::GenerateDataset(e, 200);
  std::size_t blind = 0;
  for (const auto& ep : data) blind += ep.blind_answerable ? 1 : 0;
  const auto kept = FilterDataset(data);
  CHECK(kept.size() == data.size() - blind);
  std::size_t q = 0;
  for (const auto& ep : data) {
    if (ep.blind_answerable) continue;
    CHECK(kept[q].stream == ep.stream);
    ++q;
  }
  e.p_blind = 0.0;
  CHECK(FilterDataset(env::GenerateDataset(e, 20)).size() == 20);
  e.p_blind = 1.0;
  CHECK_THROWS(FilterDataset(env::GenerateDataset(e, 20)));
}

TEST_CASE("replay memory groups") {
  ReplayMemory mem;
  for (std::size_t it = 0; it < 2; ++it) {
    for (double r : {1.0, 0.0, 1.0}) {
      mem.token.push_back({{}, {0}, r, it});
    }
  }
  const cpo::RolloutGroup all = mem.TokenGroup();
  CHECK(all.size() == 6);
  CHECK_FALSE(all.degenerate);
  const double a = std::sqrt(0.5);
  CHECK(all.advantages[0] == doctest::Approx(a));
  CHECK(all.advantages[1] == doctest::Approx(-2 * a));

  mem.token[3].reward = mem.token[4].reward = mem.token[5].reward = 1.0;
  const cpo::RolloutGroup per = mem.TokenGroup(AdvantageScope::kIteration);
  CHECK(per.size() == 6);
  CHECK_FALSE(per.degenerate);
  CHECK(per.advantages[1] == doctest::Approx(-2 * a));
  for (std::size_t i = 3; i < 6; ++i) CHECK(per.advantages[i] == 0.0);
  mem.Clear();
  CHECK(mem.token.empty());
  CHECK(mem.frame.empty());
}

TEST_CASE("serial and parallel rollout rewards agree") {
  const auto data = env::GenerateDataset(TinyEnv(), 3);
  RngStream rng(1);
  for (const auto& ep : data) {
    std::vector<IndexSet> sels(50);
    for (auto& s : sels) {
      for (std::size_t j = 0; j < 36; ++j) {
        if (rng.Uniform() < 0.4) s.push_back(j);
      }
    }
    CHECK(RolloutRewardsSerial(ep, sels) == RolloutRewardsParallel(ep, sels));
  }
}

TEST_CASE("zero learning rates leave the policy unchanged") {
  TrainConfig cfg = TinyConfig();
  cfg.optimizer = Optimizer::kSgd;
  cfg.lr_attn = 0.0;
  cfg.lr_mlp = 0.0;
  const auto data = env::GenerateDataset(cfg.env, 3);
  const policy::PolicyParams init = policy::InitParams(6, 0, 3);
  const TrainResult res = Train(data, cfg, init);
  CHECK(res.params.tensors == init.tensors);
}

TEST_CASE("one sample runs g_t times n_iter token rollouts") {
  TrainConfig cfg = TinyConfig();
  cfg.r = 0.02;
  cfg.lr_attn = 1e-7;
  cfg.lr_mlp = 1e-6;
  cfg.optimizer = Optimizer::kSgd;
  cfg.scope = SampleScope::kVideo;
  const auto data = env::GenerateDataset(cfg.env, 1);
  const TrainResult res = Train(data, cfg);
  CHECK(res.token_rollouts == 120);
  CHECK(res.frame_rollouts == 40);
  CHECK(res.metrics.size() == 5);
  for (std::size_t it = 0; it < 5; ++it) CHECK(res.metrics[it].iteration == it);
}

TEST_CASE("training is reproducible and logs one record per iteration") {
  TrainConfig cfg = TinyConfig();
  cfg.n_iter = 3;
  const auto data = env::GenerateDataset(cfg.env, 4);
  std::stringstream log;
  const TrainResult a = Train(data, cfg, &log);
  const TrainResult b = Train(data, cfg);
  CHECK(a.params.tensors == b.params.tensors);
  CHECK(a.metrics.size() == 12);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("sample").get<std::size_t>() == lines / 3);
    CHECK(j.contains("mean_reward"));
    ++lines;
  }
  CHECK(lines == 12);

  TrainConfig serial = cfg;
  serial.parallel_rollouts = false;
  CHECK(Train(data, serial).params.tensors == a.params.tensors);
  TrainConfig per = cfg;
  per.advantage_scope = AdvantageScope::kIteration;
  CHECK(Train(data, per).params.tensors != a.params.tensors);
}

TEST_CASE("ratio trajectory follows the rewards") {
  TrainConfig cfg = TinyConfig();
  const auto data = env::GenerateDataset(cfg.env, 2);
  const TrainResult res = Train(data, cfg);
  for (std::size_t q = 0; q < res.metrics.size(); ++q) {
    const auto& m = res.metrics[q];
    const DynamicRatioState s{m.r_current, cfg.alpha_low, cfg.alpha_high,
                              cfg.EffectiveFloor(), cfg.r_cap};
    CHECK(UpdateSampleRatio(m.mean_reward, s).r_current == m.r_next);
    if (m.iteration > 0) CHECK(m.r_current == res.metrics[q - 1].r_next);
    if (m.iteration == 0) CHECK(m.r_current == cfg.r);
  }
}

TEST_CASE("diverging updates raise a training error") {
  TrainConfig cfg = TinyConfig();
  cfg.optimizer = Optimizer::kSgd;
  cfg.lr_attn = 1e300;
  cfg.lr_mlp = 1e300;
  const auto data = env::GenerateDataset(cfg.env, 5);
  CHECK_THROWS_AS(Train(data, cfg), TrainingError);
}

}  // namespace cacovid::train
