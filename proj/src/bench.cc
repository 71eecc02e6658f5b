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

#include "cacovid/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cacovid/cpo.h"
#include "cacovid/gradcheck.h"
#include "cacovid/ocss.h"
#include "cacovid/rng.h"

namespace cacovid::bench {
namespace {

using u128 = unsigned __int128;

std::string ToDecimal(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

bool MulOk(u128 a, u128 b, u128& out) { return !__builtin_mul_overflow(a, b, &out); }
bool AddOk(u128 a, u128 b, u128& out) { return !__builtin_add_overflow(a, b, &out); }

EvalSummary Reduce(std::vector<EpisodeEval> per) {
  EvalSummary s;
  s.episodes = per.size();
  for (const EpisodeEval& e : per) {
    s.recall += e.recall;
    s.precision += e.precision;
    s.coverage += e.coverage;
    s.success_rate += e.success ? 1.0 : 0.0;
    s.recalls.push_back(e.recall);
  }
  if (!per.empty()) {
    const double n = static_cast<double>(per.size());
    s.recall /= n;
    s.precision /= n;
    s.coverage /= n;
    s.success_rate /= n;
  }
  return s;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw ConfigError("bad seed '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

double ToReal(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': '" + v + "' is not a number");
}

std::size_t ToSize(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': '" + v + "' is not a non-negative integer");
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

nlohmann::json SummaryJson(const EvalSummary& s) {
  return {{"recall", s.recall},
          {"precision", s.precision},
          {"coverage", s.coverage},
          {"success_rate", s.success_rate},
          {"episodes", s.episodes}};
}

}  // namespace

Flops FlopsEstimate(std::uint64_t layers, std::uint64_t n, std::uint64_t d,
                    std::uint64_t m) {
  if (layers == 0 || n == 0 || d == 0 || m == 0) {
    throw std::invalid_argument("flops estimate needs positive arguments");
  }
  Flops f;
  const double approx =
      static_cast<double>(layers) *
      (4.0 * static_cast<double>(n) * static_cast<double>(d) * static_cast<double>(d) +
       2.0 * static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(d) +
       2.0 * static_cast<double>(n) * static_cast<double>(d) * static_cast<double>(m));
  u128 a, b, c, t;
  const bool ok = MulOk(4, n, a) && MulOk(a, d, a) && MulOk(a, d, a) &&
                  MulOk(2, n, b) && MulOk(b, n, b) && MulOk(b, d, b) &&
                  MulOk(2, n, c) && MulOk(c, d, c) && MulOk(c, m, c) &&
                  AddOk(a, b, t) && AddOk(t, c, t) && MulOk(t, layers, t);
  if (ok) {
    f.value = static_cast<double>(t);
    f.digits = ToDecimal(t);
  } else {
    f.exact = false;
    f.value = approx;
  }
  return f;
}

double CompressionFlopsRatio(std::uint64_t layers, std::uint64_t n_vid,
                             std::uint64_t n_qst, double ratio, std::uint64_t d,
                             std::uint64_t m) {
  const std::uint64_t kept = ocss::Budget(n_vid, ratio);
  return FlopsEstimate(layers, kept + n_qst, d, m).value /
         FlopsEstimate(layers, n_vid + n_qst, d, m).value;
}

double TopKRecall(std::span<const double> token_scores,
                  std::span<const std::size_t> planted) {
  if (planted.empty()) throw std::invalid_argument("empty planted set");
  const std::size_t k = std::min(planted.size(), token_scores.size());
  std::vector<std::size_t> idx(token_scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return token_scores[a] > token_scores[b];
  });
  std::size_t hits = 0;
  for (std::size_t q = 0; q < k; ++q) {
    hits += std::find(planted.begin(), planted.end(), idx[q]) != planted.end();
  }
  return static_cast<double>(hits) / static_cast<double>(planted.size());
}

EpisodeEval EvaluateEpisode(const env::Episode& ep,
                            const policy::PolicyParams& params, double ratio,
                            retention::Strategy strategy, double st_fraction) {
  const retention::Compression c =
      retention::Compress(ep.grid, params, ratio, strategy, st_fraction);
  EpisodeEval e;
  e.recall = TopKRecall(c.scores.token_scores, ep.planted_tokens);
  e.coverage = env::Coverage(c.selected, ep);
  e.precision = e.coverage * static_cast<double>(ep.planted_tokens.size()) /
                static_cast<double>(c.selected.size());
  e.success = env::OracleAnswer(c.selected, ep) == std::string(1, ep.answer);
  return e;
}

EvalSummary EvaluateSerial(std::span<const env::Episode> episodes,
                           const policy::PolicyParams& params, double ratio,
                           retention::Strategy strategy, double st_fraction) {
  std::vector<EpisodeEval> per(episodes.size());
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    per[i] = EvaluateEpisode(episodes[i], params, ratio, strategy, st_fraction);
  }
  return Reduce(std::move(per));
}

EvalSummary EvaluateParallel(std::span<const env::Episode> episodes,
                             const policy::PolicyParams& params, double ratio,
                             retention::Strategy strategy, double st_fraction) {
  std::vector<EpisodeEval> per(episodes.size());
  const auto n = static_cast<long>(episodes.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    per[i] = EvaluateEpisode(episodes[i], params, ratio, strategy, st_fraction);
  }
  return Reduce(std::move(per));
}

ExperimentConfig ParseConfig(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig cfg;
  train::TrainConfig& t = cfg.train;
  env::EnvConfig& e = cfg.train.env;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = ToReal(k, v); });
  };
  auto size = [](std::size_t& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = ToSize(k, v); });
  };
  auto u64 = [](std::uint64_t& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = ToSize(k, v); });
  };
  const std::map<std::string, std::map<std::string, Setter>> sections = {
      {"experiment",
       {{"name", [&](const std::string&, const std::string& v) { cfg.name = v; }},
        {"seeds", [&](const std::string&, const std::string& v) { cfg.seeds = ParseSeeds(v); }},
        {"train_samples", size(cfg.train_samples)},
        {"eval_episodes", size(cfg.eval_episodes)},
        {"eval_stream", u64(cfg.eval_stream)},
        {"retention_ratio", real(cfg.retention_ratio)},
        {"strategy",
         [&](const std::string&, const std::string& v) {
           cfg.strategy = retention::ParseStrategy(v);
         }},
        {"st_fraction", real(cfg.st_fraction)},
        {"flops_layers", size(cfg.flops_layers)},
        {"flops_hidden", size(cfg.flops_hidden)},
        {"flops_ffn", size(cfg.flops_ffn)}}},
      {"env",
       {{"frames", size(e.frames)},
        {"height", size(e.height)},
        {"width", size(e.width)},
        {"dim", size(e.dim)},
        {"question_tokens", size(e.question_tokens)},
        {"planted", size(e.planted)},
        {"planted_frames", size(e.planted_frames)},
        {"coverage_threshold", real(e.coverage_threshold)},
        {"noise", real(e.noise)},
        {"signal", real(e.signal)},
        {"question_signal", real(e.question_signal)},
        {"question_offset", real(e.question_offset)},
        {"p_blind", real(e.p_blind)},
        {"alphabet", size(e.alphabet)},
        {"concepts", size(e.concepts)}}},
      {"train",
       {{"r", real(t.r)},
        {"r_f", real(t.r_f)},
        {"g_t", size(t.g_t)},
        {"g_f", size(t.g_f)},
        {"n_iter", size(t.n_iter)},
        {"alpha_low", real(t.alpha_low)},
        {"alpha_high", real(t.alpha_high)},
        {"eps_low", real(t.clip.eps_low)},
        {"eps_high", real(t.clip.eps_high)},
        {"lambda", real(t.lambda)},
        {"lr_attn", real(t.lr_attn)},
        {"lr_mlp", real(t.lr_mlp)},
        {"r_floor", real(t.r_floor)},
        {"r_cap", real(t.r_cap)},
        {"optimizer",
         [&](const std::string&, const std::string& v) {
           t.optimizer = train::ParseOptimizer(v);
         }},
        {"momentum", real(t.momentum)},
        {"adam_beta1", real(t.adam_beta1)},
        {"adam_beta2", real(t.adam_beta2)},
        {"adam_eps", real(t.adam_eps)},
        {"max_grad_norm", real(t.max_grad_norm)},
        {"hidden", size(t.hidden)},
        {"k_nn", size(t.k_nn)},
        {"scope",
         [&](const std::string&, const std::string& v) { t.scope = train::ParseScope(v); }},
        {"sampler",
         [&](const std::string&, const std::string& v) {
           t.sampler = ocss::ParseSampler(v);
         }},
        {"advantage_scope",
         [&](const std::string&, const std::string& v) {
           t.advantage_scope = train::ParseAdvantageScope(v);
         }},
        {"parallel_rollouts",
         [&](const std::string& k, const std::string& v) {
           t.parallel_rollouts = ToBool(k, v);
         }}}},
      {"assert",
       {{"min_recall", real(cfg.assertions.min_recall)},
        {"min_success", real(cfg.assertions.min_success)}}},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' must sit inside a section");
    }
    const auto sec = sections.find(section);
    if (sec == sections.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
      try {
        setter->second(section + "." + key, node.data());
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& ex) {
        throw ConfigError("key '" + section + "." + key + "': " + ex.what());
      }
    }
  }
  try {
    t.Validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  if (!(cfg.retention_ratio > 0.0 && cfg.retention_ratio <= 1.0)) {
    throw ConfigError("experiment.retention_ratio must lie in (0, 1]");
  }
  if (cfg.train_samples == 0 || cfg.eval_episodes == 0) {
    throw ConfigError("train_samples and eval_episodes must be positive");
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return ParseConfig(in);
}

nlohmann::json ConfigToJson(const ExperimentConfig& cfg) {
  const train::TrainConfig& t = cfg.train;
  const env::EnvConfig& e = t.env;
  return {
      {"experiment",
       {{"name", cfg.name},
        {"seeds", cfg.seeds},
        {"train_samples", cfg.train_samples},
        {"eval_episodes", cfg.eval_episodes},
        {"eval_stream", cfg.eval_stream},
        {"retention_ratio", cfg.retention_ratio},
        {"strategy", retention::StrategyName(cfg.strategy)},
        {"st_fraction", cfg.st_fraction},
        {"flops_layers", cfg.flops_layers},
        {"flops_hidden", cfg.flops_hidden},
        {"flops_ffn", cfg.flops_ffn}}},
      {"env",
       {{"frames", e.frames},
        {"height", e.height},
        {"width", e.width},
        {"dim", e.dim},
        {"question_tokens", e.question_tokens},
        {"planted", e.planted},
        {"planted_frames", e.planted_frames},
        {"coverage_threshold", e.coverage_threshold},
        {"noise", e.noise},
        {"signal", e.signal},
        {"question_signal", e.question_signal},
        {"question_offset", e.question_offset},
        {"p_blind", e.p_blind},
        {"alphabet", e.alphabet},
        {"concepts", e.concepts}}},
      {"train",
       {{"r", t.r},
        {"r_f", t.r_f},
        {"g_t", t.g_t},
        {"g_f", t.g_f},
        {"n_iter", t.n_iter},
        {"alpha_low", t.alpha_low},
        {"alpha_high", t.alpha_high},
        {"eps_low", t.clip.eps_low},
        {"eps_high", t.clip.eps_high},
        {"lambda", t.lambda},
        {"lr_attn", t.lr_attn},
        {"lr_mlp", t.lr_mlp},
        {"r_floor", t.r_floor},
        {"r_cap", t.r_cap},
        {"optimizer", train::OptimizerName(t.optimizer)},
        {"momentum", t.momentum},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_eps", t.adam_eps},
        {"max_grad_norm", t.max_grad_norm},
        {"hidden", t.hidden},
        {"k_nn", t.k_nn},
        {"scope", train::ScopeName(t.scope)},
        {"sampler", ocss::SamplerName(t.sampler)},
        {"advantage_scope", train::AdvantageScopeName(t.advantage_scope)},
        {"parallel_rollouts", t.parallel_rollouts}}},
      {"assert",
       {{"min_recall", cfg.assertions.min_recall},
        {"min_success", cfg.assertions.min_success}}},
  };
}

SeedResult RunSeed(const ExperimentConfig& cfg, std::uint64_t seed,
                   std::ostream* metrics_out) {
  train::TrainConfig t = cfg.train;
  t.seed = seed;
  t.env.seed = seed;
  const std::vector<env::Episode> train_set =
      env::GenerateDataset(t.env, cfg.train_samples, 0);
  const std::vector<env::Episode> eval_set =
      env::GenerateDataset(t.env, cfg.eval_episodes, cfg.eval_stream);

  SeedResult r;
  r.seed = seed;
  const policy::PolicyParams init = policy::InitParams(t.env.dim, t.hidden, seed);
  r.baseline = EvaluateParallel(eval_set, init, cfg.retention_ratio,
                                cfg.strategy, cfg.st_fraction);
  const auto start = std::chrono::steady_clock::now();
  train::TrainResult tr = train::Train(train_set, t, init, metrics_out);
  r.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.train_samples = tr.samples;
  r.token_rollouts = tr.token_rollouts;
  r.params = std::move(tr.params);
  r.trained = EvaluateParallel(eval_set, r.params, cfg.retention_ratio,
                               cfg.strategy, cfg.st_fraction);
  return r;
}

Aggregate Summarize(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  for (double v : values) a.mean += v;
  a.mean /= n;
  for (double v : values) a.std += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(a.std / n);
  return a;
}

nlohmann::json MakeReport(const ExperimentConfig& cfg,
                          std::span<const SeedResult> results,
                          bool include_timing) {
  nlohmann::json report;
  report["config"] = ConfigToJson(cfg);
  nlohmann::json per_seed = nlohmann::json::array();
  std::vector<double> success, recall, precision, base_recall;
  for (const SeedResult& r : results) {
    nlohmann::json s = {{"seed", r.seed},
                        {"train_samples", r.train_samples},
                        {"token_rollouts", r.token_rollouts},
                        {"baseline", SummaryJson(r.baseline)},
                        {"trained", SummaryJson(r.trained)}};
    if (include_timing) s["train_seconds"] = r.train_seconds;
    per_seed.push_back(std::move(s));
    success.push_back(r.trained.success_rate);
    recall.push_back(r.trained.recall);
    precision.push_back(r.trained.precision);
    base_recall.push_back(r.baseline.recall);
  }
  report["seeds"] = std::move(per_seed);
  auto agg = [](std::span<const double> v) {
    const Aggregate a = Summarize(v);
    return nlohmann::json{{"mean", a.mean}, {"std", a.std}};
  };
  report["aggregate"] = {{"success_rate", agg(success)},
                         {"recall", agg(recall)},
                         {"precision", agg(precision)},
                         {"baseline_recall", agg(base_recall)}};

  const env::EnvConfig& e = cfg.train.env;
  const Flops full = FlopsEstimate(cfg.flops_layers,
                                   e.num_tokens() + e.question_tokens,
                                   cfg.flops_hidden, cfg.flops_ffn);
  const Flops kept = FlopsEstimate(
      cfg.flops_layers, ocss::Budget(e.num_tokens(), cfg.retention_ratio) + e.question_tokens,
      cfg.flops_hidden, cfg.flops_ffn);
  report["flops"] = {{"full", full.value},
                     {"full_exact", full.digits},
                     {"compressed", kept.value},
                     {"compressed_exact", kept.digits},
                     {"ratio", kept.value / full.value}};
  return report;
}

std::vector<std::string> CheckAssertions(const ExperimentConfig& cfg,
                                         std::span<const SeedResult> results) {
  std::vector<std::string> failed;
  std::vector<double> success, recall;
  for (const SeedResult& r : results) {
    success.push_back(r.trained.success_rate);
    recall.push_back(r.trained.recall);
  }
  if (cfg.assertions.min_recall >= 0.0 &&
      Summarize(recall).mean < cfg.assertions.min_recall) {
    failed.push_back("min_recall");
  }
  if (cfg.assertions.min_success >= 0.0 &&
      Summarize(success).mean < cfg.assertions.min_success) {
    failed.push_back("min_success");
  }
  return failed;
}

namespace {

policy::PolicyParams Jitter(const policy::PolicyParams& p, double scale,
                            RngStream rng) {
  policy::PolicyParams q = p;
  for (auto& [name, t] : q.tensors) {
    for (double& x : t.data()) x += scale * rng.Gaussian();
  }
  return q;
}

cpo::RolloutGroup GroupFrom(cpo::Level level,
                            const std::vector<ocss::SampledCombination>& draws,
                            RngStream& rng) {
  cpo::RolloutGroup g;
  g.level = level;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    g.selections.push_back(draws[i].indices);
    g.rewards.push_back(i < 2 ? static_cast<double>(i)
                              : static_cast<double>(rng.Index(2)));
  }
  g.Normalize();
  return g;
}

}  // namespace

GradCheckSummary CpoGradCheck(std::size_t instances, std::uint64_t seed) {
  const RngStream root(seed);
  GradCheckSummary out;
  for (std::size_t q = 0; out.instances < instances; ++q) {
    RngStream r = root.Split(q);
    const std::size_t t = 1 + r.Index(4);
    const std::size_t h = 1 + r.Index(2);
    const std::size_t w = 1 + r.Index(std::min<std::size_t>(4, 32 / (t * h)));
    const std::size_t dim = 2 + r.Index(7);
    const std::size_t g = 2 + r.Index(3);
    policy::TokenGrid grid;
    grid.layout = {t, h, w};
    grid.video = diffcore::Tensor({grid.layout.num_tokens(), dim});
    grid.question = diffcore::Tensor({1 + r.Index(4), dim});
    for (double& x : grid.video.data()) x = r.Gaussian();
    for (double& x : grid.question.data()) x = r.Gaussian();
    const policy::PolicyParams old =
        policy::InitParams(dim, 1 + r.Index(8), seed + q);
    const policy::PolicyParams now = Jitter(old, 0.02, r.Split(1));
    const auto old_scores = policy::Forward(grid, old);
    const double ratio = std::min(
        0.99, std::max(0.3, 1.0 / static_cast<double>(grid.layout.num_tokens())));
    const auto token_draws =
        ocss::SampleGroup(old_scores.token_scores, ratio, 2.0, g, r.Split(2));
    const auto frame_draws =
        t > 1 ? ocss::SampleGroup(old_scores.frame_scores, 0.5, 2.0, g, r.Split(3))
              : std::vector<ocss::SampledCombination>(
                    g, ocss::SampledCombination{{0}, {0}, 0, 0});
    RngStream rr = r.Split(4);
    const cpo::RolloutGroup tokens = GroupFrom(cpo::Level::kToken, token_draws, rr);
    const cpo::RolloutGroup frames = GroupFrom(cpo::Level::kFrame, frame_draws, rr);
    const cpo::ClipConfig clip;
    const cpo::ObjectiveResult res =
        cpo::JointObjective(grid, now, old_scores, &tokens, &frames, clip);
    const diffcore::ScalarFn fn = [&](const diffcore::ParamMap& p) {
      policy::PolicyParams cur = now;
      cur.tensors = p;
      return cpo::JointObjectiveValue(grid, cur, old_scores, &tokens, &frames, clip);
    };
    const auto check = diffcore::CompareGradients(
        res.gradients, diffcore::CentralDifference(fn, now.tensors));
    if (check.numeric_norm < 1e-6 && check.analytic_norm < 1e-6) {
      ++out.flat_instances;
      continue;
    }
    ++out.instances;
    out.max_relative_error = std::max(out.max_relative_error, check.relative_error);
  }
  return out;
}

SamplerStats SamplerVsExact(std::size_t n, std::size_t k, double lambda,
                            std::size_t draws, std::uint64_t seed) {
  if (k == 0 || k >= n) throw std::invalid_argument("need 0 < k < n");
  if (draws == 0) throw std::invalid_argument("need at least one draw");
  RngStream score_rng(seed, 1);
  std::vector<double> scores(n);
  for (double& x : scores) x = score_rng.Gaussian();
  const double ratio = static_cast<double>(k) / static_cast<double>(n);
  SamplerStats st;
  st.budget = ocss::Budget(n, ratio);
  st.exact = ocss::ExactMarginals(scores, ratio, lambda);
  st.empirical.assign(n, 0.0);
  const RngStream base(seed, 2);
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t j : ocss::SampleCombination(scores, ratio, lambda, base.Split(d)).indices) {
      st.empirical[j] += 1.0;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    st.empirical[j] /= static_cast<double>(draws);
    st.total_variation += std::abs(st.empirical[j] - st.exact[j]);
  }
  st.total_variation *= 0.5 / static_cast<double>(st.budget);
  return st;
}

}  // namespace cacovid::bench
