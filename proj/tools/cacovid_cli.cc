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


// cacovid command-line harness.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or config error,
// 3 an assertion (config [assert] section, gradcheck or sampler tolerance)
// failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cacovid/bench.h"
#include "cacovid/checkpoint.h"
#include "cacovid/env.h"
#include "cacovid/ocss.h"
#include "cacovid/retention.h"
#include "cacovid/trainer.h"

namespace cacovid {
namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::string> strategy;
  std::optional<double> retention_ratio;
  std::optional<std::string> sample_scope;
};

void AddCommon(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "experiment INI file");
  if (needs_config) opt->required();
  cmd->add_option("--seed", c.seed, "run this seed instead of the config's seed list");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--strategy", c.strategy, "frame-avg, frame-ada or frame-ada-st");
  cmd->add_option("--retention-ratio", c.retention_ratio, "inference retention ratio");
  cmd->add_option("--sample-scope", c.sample_scope, "frame or video");
}

bench::ExperimentConfig Resolve(const Common& c) {
  bench::ExperimentConfig cfg =
      c.config.empty() ? bench::ExperimentConfig{} : bench::LoadConfig(c.config);
  try {
    if (c.seed) cfg.seeds = {*c.seed};
    if (c.strategy) cfg.strategy = retention::ParseStrategy(*c.strategy);
    if (c.retention_ratio) {
      if (!(*c.retention_ratio > 0.0 && *c.retention_ratio <= 1.0)) {
        throw std::invalid_argument("--retention-ratio must lie in (0, 1]");
      }
      cfg.retention_ratio = *c.retention_ratio;
    }
    if (c.sample_scope) {
      cfg.train.scope = train::ParseScope(*c.sample_scope);
    }
    cfg.train.Validate();
  } catch (const std::invalid_argument& e) {
    throw bench::ConfigError(e.what());
  }
  return cfg;
}

std::filesystem::path OutDir(const Common& c) {
  std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  return dir;
}

void WriteJson(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void PrintSeed(const bench::SeedResult& r) {
  std::printf("seed %llu: recall %.3f (baseline %.3f), success %.3f, precision %.3f, %.1f s\n",
              static_cast<unsigned long long>(r.seed), r.trained.recall, r.baseline.recall,
              r.trained.success_rate, r.trained.precision, r.train_seconds);
}

int Train(const Common& c, bool all_seeds) {
  const bench::ExperimentConfig cfg = Resolve(c);
  const auto dir = OutDir(c);
  std::vector<bench::SeedResult> results;
  const std::vector<std::uint64_t> seeds =
      all_seeds ? cfg.seeds : std::vector<std::uint64_t>{cfg.seeds.front()};
  for (std::uint64_t seed : seeds) {
    const std::string tag = "seed" + std::to_string(seed);
    std::ofstream metrics(dir / ("metrics_" + tag + ".jsonl"));
    results.push_back(bench::RunSeed(cfg, seed, &metrics));
    diffcore::SaveCheckpoint(dir / ("policy_" + tag + ".ckpt"), results.back().params.tensors);
    PrintSeed(results.back());
  }
  WriteJson(dir / "report.json", bench::MakeReport(cfg, results));
  const auto failed = bench::CheckAssertions(cfg, results);
  for (const auto& name : failed) std::printf("assertion failed: %s\n", name.c_str());
  return failed.empty() ? 0 : kExitAssertion;
}

int Eval(const Common& c, const std::string& checkpoint, std::size_t show) {
  const bench::ExperimentConfig cfg = Resolve(c);
  env::EnvConfig e = cfg.train.env;
  e.seed = cfg.seeds.front();
  const policy::PolicyParams params =
      checkpoint.empty() ? policy::InitParams(e.dim, cfg.train.hidden, e.seed)
                         : policy::FromTensors(diffcore::LoadCheckpoint(checkpoint));
  if (params.dim != e.dim) {
    throw bench::ConfigError("checkpoint dim " + std::to_string(params.dim) +
                             " does not match env dim " + std::to_string(e.dim));
  }
  const auto episodes = env::GenerateDataset(e, cfg.eval_episodes, cfg.eval_stream);
  const bench::EvalSummary s = bench::EvaluateParallel(
      episodes, params, cfg.retention_ratio, cfg.strategy, cfg.st_fraction);

  nlohmann::json videos = nlohmann::json::array();
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const retention::Compression comp = retention::Compress(
        episodes[i].grid, params, cfg.retention_ratio, cfg.strategy, cfg.st_fraction);
    videos.push_back({{"episode", i},
                      {"retention_ratio", cfg.retention_ratio},
                      {"per_frame_budget", comp.plan.per_frame_budget},
                      {"selected", comp.selected},
                      {"planted", episodes[i].planted_tokens}});
  }
  nlohmann::json report = {
      {"config", bench::ConfigToJson(cfg)},
      {"checkpoint", checkpoint},
      {"strategy", retention::StrategyName(cfg.strategy)},
      {"recall", s.recall},
      {"precision", s.precision},
      {"coverage", s.coverage},
      {"success_rate", s.success_rate},
      {"episodes", s.episodes},
      {"videos", videos}};
  WriteJson(OutDir(c) / "eval_report.json", report);
  std::printf("%zu episodes, strategy %s, r=%.3f: success %.3f, recall %.3f, coverage %.3f\n",
              s.episodes, std::string(retention::StrategyName(cfg.strategy)).c_str(),
              cfg.retention_ratio, s.success_rate, s.recall, s.coverage);
  for (std::size_t i = 0; i < std::min(show, videos.size()); ++i) {
    std::printf("episode %zu budgets %s selected %s\n", i,
                videos[i]["per_frame_budget"].dump().c_str(),
                videos[i]["selected"].dump().c_str());
  }
  return 0;
}

int SampleDemo(const Common& c, std::size_t draws) {
  const bench::ExperimentConfig cfg = Resolve(c);
  env::EnvConfig e = cfg.train.env;
  e.seed = cfg.seeds.front();
  const env::Episode ep = env::GenerateEpisode(e, RngStream(e.seed).Split(0));
  const policy::PolicyParams params = policy::InitParams(e.dim, cfg.train.hidden, e.seed);
  const auto scores = policy::Forward(ep.grid, params);
  const ocss::SubspacePartition part =
      ocss::Partition(scores.token_scores, cfg.train.r, cfg.train.lambda);
  const auto mass = ocss::SubspaceMass(scores.token_scores, part);
  std::printf("n=%zu r=%g lambda=%g: k=%zu m=%zu, %zu subspaces\n",
              ep.grid.layout.num_tokens(), cfg.train.r, cfg.train.lambda, part.budget,
              part.subspace_size, part.num_subspaces());
  for (std::size_t i = 0; i < part.num_subspaces(); ++i) {
    std::printf("  subspace %zu: %zu tokens, mass %.4f\n", i, part.subspaces[i].size(), mass[i]);
  }
  const auto group = ocss::SampleGroup(scores.token_scores, cfg.train.r, cfg.train.lambda,
                                       draws, RngStream(e.seed, 7), cfg.train.sampler);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double cov = env::Coverage(group[i].indices, ep);
    std::printf("draw %zu: subspace %zu, coverage %.3f, answer %s (truth %c)\n", i,
                group[i].subspace.front(), cov,
                env::OracleAnswer(group[i].indices, ep).c_str(), ep.answer);
    out.push_back({{"subspace", group[i].subspace}, {"indices", group[i].indices},
                   {"coverage", cov}});
  }
  WriteJson(OutDir(c) / "sample_demo.json", {{"config", bench::ConfigToJson(cfg)},
                                             {"budget", part.budget},
                                             {"subspace_size", part.subspace_size},
                                             {"subspace_mass", mass},
                                             {"draws", out}});
  return 0;
}

int Complexity(std::size_t n, std::size_t k, double lambda, const bench::ExperimentConfig& cfg) {
  const ocss::ExplorationSpace e = ocss::ExplorationLogSpace(n, k, lambda);
  std::printf("n=%zu k=%zu lambda=%g: m=%zu l=%zu\n", n, k, lambda, e.subspace_size,
              e.num_subspaces);
  std::printf("log2 arbitrary %.4f, log2 ocss %.4f, reduction ratio %.4f\n",
              e.log2_arbitrary, e.log2_ocss, e.reduction_ratio);
  const std::uint64_t n_vid = 6272, n_qst = 64;
  const bench::Flops full =
      bench::FlopsEstimate(cfg.flops_layers, n_vid + n_qst, cfg.flops_hidden, cfg.flops_ffn);
  const double ratio = bench::CompressionFlopsRatio(cfg.flops_layers, n_vid, n_qst,
                                                    cfg.retention_ratio, cfg.flops_hidden,
                                                    cfg.flops_ffn);
  std::printf("prefill flops T=%zu n=%llu: %s%s; at r=%g: ratio %.4f\n", cfg.flops_layers,
              static_cast<unsigned long long>(n_vid + n_qst),
              full.exact ? full.digits.c_str() : std::to_string(full.value).c_str(),
              full.exact ? "" : " (approximate)", cfg.retention_ratio, ratio);
  return 0;
}

int GradCheck(std::size_t instances, std::uint64_t seed, double tol) {
  const bench::GradCheckSummary g = bench::CpoGradCheck(instances, seed);
  std::printf("%zu instances (%zu flat skipped): max relative error %.3e, tol %.1e\n",
              g.instances, g.flat_instances, g.max_relative_error, tol);
  return g.max_relative_error <= tol ? 0 : kExitAssertion;
}

int SamplerStatsCmd(std::size_t n, std::size_t k, double lambda, std::size_t draws,
                    std::uint64_t seed, double tol) {
  const bench::SamplerStats st = bench::SamplerVsExact(n, k, lambda, draws, seed);
  std::printf("n=%zu k=%zu lambda=%g draws=%zu\n", n, k, lambda, draws);
  for (std::size_t j = 0; j < n; ++j) {
    std::printf("  token %zu: empirical %.5f exact %.5f\n", j, st.empirical[j], st.exact[j]);
  }
  std::printf("total variation %.5f (tol %.3f)\n", st.total_variation, tol);
  return st.total_variation <= tol ? 0 : kExitAssertion;
}

}  // namespace
}  // namespace cacovid

int main(int argc, char** argv) {
  using namespace cacovid;
  CLI::App app{"cacovid: contribution-aware video token compression"};
  app.require_subcommand(1);

  Common train_opts, run_opts, eval_opts, demo_opts, cx_opts;
  auto* train_cmd = app.add_subcommand("train", "train on one seed, write checkpoint, metrics, report");
  AddCommon(train_cmd, train_opts, true);
  auto* run_cmd = app.add_subcommand("run", "train and evaluate every seed in the config");
  AddCommon(run_cmd, run_opts, true);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on held-out episodes");
  AddCommon(eval_cmd, eval_opts, true);
  std::string checkpoint;
  std::size_t show = 0;
  eval_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint (default: untrained)");
  eval_cmd->add_option("--show", show, "print this many compression records");

  auto* demo_cmd = app.add_subcommand("sample-demo", "draw OCSS rollouts on one episode");
  AddCommon(demo_cmd, demo_opts, false);
  std::size_t demo_draws = 8;
  demo_cmd->add_option("--draws", demo_draws, "number of draws");

  auto* cx_cmd = app.add_subcommand("complexity", "exploration space and prefill FLOPs");
  AddCommon(cx_cmd, cx_opts, false);
  std::size_t cx_n = 196, cx_k = 4;
  double cx_lambda = 2.0;
  cx_cmd->add_option("--n", cx_n, "tokens");
  cx_cmd->add_option("--k", cx_k, "tokens kept");
  cx_cmd->add_option("--lambda", cx_lambda, "subspace scale");

  auto* gc_cmd = app.add_subcommand("gradcheck", "objective gradients vs finite differences");
  std::size_t gc_instances = 20;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-3;
  gc_cmd->add_option("--instances", gc_instances, "random instances");
  gc_cmd->add_option("--seed", gc_seed, "seed");
  gc_cmd->add_option("--tol", gc_tol, "relative error tolerance");

  auto* ss_cmd = app.add_subcommand("sampler-stats", "OCSS marginals vs exact enumeration");
  std::size_t ss_n = 8, ss_k = 2, ss_draws = 200000;
  double ss_lambda = 2.0, ss_tol = 0.01;
  std::uint64_t ss_seed = 1;
  ss_cmd->add_option("--n", ss_n, "tokens");
  ss_cmd->add_option("--k", ss_k, "tokens kept");
  ss_cmd->add_option("--draws", ss_draws, "draws");
  ss_cmd->add_option("--lambda", ss_lambda, "subspace scale");
  ss_cmd->add_option("--seed", ss_seed, "seed");
  ss_cmd->add_option("--tol", ss_tol, "total variation tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train_cmd) return Train(train_opts, false);
    if (*run_cmd) return Train(run_opts, true);
    if (*eval_cmd) return Eval(eval_opts, checkpoint, show);
    if (*demo_cmd) return SampleDemo(demo_opts, demo_draws);
    if (*cx_cmd) return Complexity(cx_n, cx_k, cx_lambda, Resolve(cx_opts));
    if (*gc_cmd) return GradCheck(gc_instances, gc_seed, gc_tol);
    if (*ss_cmd) return SamplerStatsCmd(ss_n, ss_k, ss_lambda, ss_draws, ss_seed, ss_tol);
  } catch (const bench::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
