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

// Experiment harness: prefill FLOPs, policy evaluation on held-out episodes,
// INI experiment configs and JSON reports.

#ifndef CACOVID_BENCH_H_
#define CACOVID_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacovid/env.h"
#include "cacovid/policy_net.h"
#include "cacovid/retention.h"
#include "cacovid/trainer.h"

namespace cacovid::bench {

// T * (4 n d^2 + 2 n^2 d + 2 n d m) for a T-layer decoder over n tokens.
struct Flops {
  double value = 0.0;
  bool exact = true;   // false when the integer result overflowed 128 bits
  std::string digits;  // exact decimal value, empty when !exact
};

Flops FlopsEstimate(std::uint64_t layers, std::uint64_t n, std::uint64_t d,
                    std::uint64_t m);

// FLOPs(round(r * n_vid) + n_qst) / FLOPs(n_vid + n_qst).
double CompressionFlopsRatio(std::uint64_t layers, std::uint64_t n_vid,
                             std::uint64_t n_qst, double ratio, std::uint64_t d,
                             std::uint64_t m);

// Fraction of K among the |K| highest-scored tokens (ties by index).
double TopKRecall(std::span<const double> token_scores,
                  std::span<const std::size_t> planted);

struct EpisodeEval {
  double recall = 0.0;
  double precision = 0.0;  // |selected ∩ K| / |selected|
  double coverage = 0.0;   // |selected ∩ K| / |K|
  bool success = false;
};

EpisodeEval EvaluateEpisode(const env::Episode& ep,
                            const policy::PolicyParams& params, double ratio,
                            retention::Strategy strategy, double st_fraction);

struct EvalSummary {
  double recall = 0.0;
  double precision = 0.0;
  double coverage = 0.0;
  double success_rate = 0.0;
  std::size_t episodes = 0;
  std::vector<double> recalls;  // per episode
};

EvalSummary EvaluateSerial(std::span<const env::Episode> episodes,
                           const policy::PolicyParams& params, double ratio,
                           retention::Strategy strategy, double st_fraction);
EvalSummary EvaluateParallel(std::span<const env::Episode> episodes,
                             const policy::PolicyParams& params, double ratio,
                             retention::Strategy strategy, double st_fraction);

struct GradCheckSummary {
  std::size_t instances = 0;      // compared instances
  std::size_t flat_instances = 0; // skipped: every ratio clipped
  double max_relative_error = 0.0;
};

// Analytic vs central-difference gradients of the joint token + frame
// objective on random grids (n_vid <= 32, d <= 8, groups of 2 to 4 OCSS
// draws) with the current policy jittered away from the snapshot.
GradCheckSummary CpoGradCheck(std::size_t instances, std::uint64_t seed);

struct SamplerStats {
  std::vector<double> empirical;  // per-token inclusion frequency
  std::vector<double> exact;
  double total_variation = 0.0;   // between the two, each divided by k
  std::size_t budget = 0;
};

// `draws` OCSS draws over Gaussian scores (seeded), compared with the exact
// two-stage inclusion probabilities.
SamplerStats SamplerVsExact(std::size_t n, std::size_t k, double lambda,
                            std::size_t draws, std::uint64_t seed);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thresholds checked after a run; a negative value disables a check.
struct Assertions {
  double min_recall = -1.0;
  double min_success = -1.0;
};

struct ExperimentConfig {
  std::string name = "default";
  std::vector<std::uint64_t> seeds = {42};
  std::size_t train_samples = 500;
  std::size_t eval_episodes = 50;
  std::uint64_t eval_stream = 1;  // held-out episodes come from this stream
  double retention_ratio = 0.25;
  retention::Strategy strategy = retention::Strategy::kFrameAdaSt;
  double st_fraction = retention::kDefaultStFraction;
  std::size_t flops_layers = 28;
  std::size_t flops_hidden = 3584;
  std::size_t flops_ffn = 18944;
  train::TrainConfig train;
  Assertions assertions;
};

// INI text with [experiment], [env], [train] and [assert] sections. Keys not
// listed are rejected by name.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig LoadConfig(const std::string& path);
nlohmann::json ConfigToJson(const ExperimentConfig& cfg);

struct SeedResult {
  std::uint64_t seed = 0;
  EvalSummary baseline;  // untrained policy
  EvalSummary trained;
  double train_seconds = 0.0;
  std::size_t train_samples = 0;
  std::size_t token_rollouts = 0;
  policy::PolicyParams params;
};

// Trains on cfg.train_samples episodes of seed `seed` and evaluates on
// held-out episodes. The train config's seed and env seed are set to `seed`.
SeedResult RunSeed(const ExperimentConfig& cfg, std::uint64_t seed,
                   std::ostream* metrics_out = nullptr);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
};
Aggregate Summarize(std::span<const double> values);

// Report with the resolved config, per-seed metrics, aggregates and FLOPs.
// `include_timing` = false leaves wall times out so the report is
// bit-identical across reruns.
nlohmann::json MakeReport(const ExperimentConfig& cfg,
                          std::span<const SeedResult> results,
                          bool include_timing = true);

// Names of the assertions that failed, empty on success.
std::vector<std::string> CheckAssertions(const ExperimentConfig& cfg,
                                         std::span<const SeedResult> results);

}  // namespace cacovid::bench

#endif  // CACOVID_BENCH_H_
