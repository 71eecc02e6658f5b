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


// Serial reference vs OpenMP kernels. Run with --benchmark_counters_tabular.

#include <vector>

#include <benchmark/benchmark.h>

#include "cacovid/bench.h"
#include "cacovid/env.h"
#include "cacovid/kernels.h"
#include "cacovid/policy_net.h"
#include "cacovid/rng.h"
#include "cacovid/trainer.h"

namespace cacovid {
namespace {

std::vector<double> Random(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.Gaussian();
  return v;
}

template <auto Kernel>
void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = Random(n * n, 1);
  const auto b = Random(n * n, 2);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    Kernel(a, b, out, {n, n, n, false, false});
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_MatMul<kernels::MatMulSerial>)->Name("MatMul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_MatMul<kernels::MatMulParallel>)->Name("MatMul/parallel")->Arg(64)->Arg(256);

template <auto Kernel>
void BM_Pairwise(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 16;
  const auto pts = Random(rows * dim, 3);
  std::vector<double> out(rows * rows);
  for (auto _ : state) {
    Kernel(pts, rows, dim, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Pairwise<kernels::PairwiseSquaredDistancesSerial>)
    ->Name("PairwiseDistances/serial")->Arg(144)->Arg(1024);
BENCHMARK(BM_Pairwise<kernels::PairwiseSquaredDistancesParallel>)
    ->Name("PairwiseDistances/parallel")->Arg(144)->Arg(1024);

template <bool kParallel>
void BM_Rollouts(benchmark::State& state) {
  const env::Episode ep = env::GenerateEpisode(env::EnvConfig{}, RngStream(4));
  RngStream rng(5);
  std::vector<policy::IndexSet> sels(static_cast<std::size_t>(state.range(0)));
  for (auto& s : sels) {
    for (std::size_t j = 0; j < 144; ++j) {
      if (rng.Uniform() < 0.3) s.push_back(j);
    }
  }
  for (auto _ : state) {
    auto r = kParallel ? train::RolloutRewardsParallel(ep, sels)
                       : train::RolloutRewardsSerial(ep, sels);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_Rollouts<false>)->Name("RolloutRewards/serial")->Arg(24)->Arg(1024);
BENCHMARK(BM_Rollouts<true>)->Name("RolloutRewards/parallel")->Arg(24)->Arg(1024);

template <bool kParallel>
void BM_Evaluate(benchmark::State& state) {
  const env::EnvConfig cfg;
  const auto eps = env::GenerateDataset(cfg, static_cast<std::size_t>(state.range(0)));
  const auto params = policy::InitParams(cfg.dim, 0, 6);
  for (auto _ : state) {
    auto s = kParallel
                 ? bench::EvaluateParallel(eps, params, 0.25,
                                           retention::Strategy::kFrameAdaSt, 0.5)
                 : bench::EvaluateSerial(eps, params, 0.25,
                                         retention::Strategy::kFrameAdaSt, 0.5);
    benchmark::DoNotOptimize(s.recall);
  }
}
BENCHMARK(BM_Evaluate<false>)->Name("Evaluate/serial")->Arg(50);
BENCHMARK(BM_Evaluate<true>)->Name("Evaluate/parallel")->Arg(50);

}  // namespace
}  // namespace cacovid

BENCHMARK_MAIN();
