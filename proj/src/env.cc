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

#include "cacovid/env.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cacovid::env {
namespace {

using diffcore::Tensor;

constexpr double kCoverageSlack = 1e-9;

std::vector<double> RandomUnit(std::size_t dim, RngStream& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.Gaussian();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// First `count` entries of a seeded shuffle of 0..n-1, sorted.
IndexSet ChooseSubset(std::size_t n, std::size_t count, RngStream& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.Index(n - i)]);
  }
  IndexSet out(pool.begin(), pool.begin() + static_cast<long>(count));
  std::sort(out.begin(), out.end());
  return out;
}

// cfg.concepts unit directions orthogonal to a reserved question marker,
// followed by the marker itself. Shared by every episode of one config seed.
std::vector<std::vector<double>> ConceptCodebook(const EnvConfig& cfg) {
  RngStream shared(cfg.seed, 0x636F6E63657074ULL);
  std::vector<double> marker = RandomUnit(cfg.dim, shared);
  std::vector<std::vector<double>> book;
  while (book.size() < cfg.concepts) {
    std::vector<double> v = RandomUnit(cfg.dim, shared);
    double dot = 0.0;
    for (std::size_t d = 0; d < cfg.dim; ++d) dot += v[d] * marker[d];
    double norm = 0.0;
    for (std::size_t d = 0; d < cfg.dim; ++d) {
      v[d] -= dot * marker[d];
      norm += v[d] * v[d];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    for (double& x : v) x /= norm;
    book.push_back(std::move(v));
  }
  book.push_back(std::move(marker));
  return book;
}

double LogChoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void EnvConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("env config: " + msg);
  };
  if (frames == 0 || height == 0 || width == 0 || dim == 0) {
    fail("frames, height, width and dim must be positive");
  }
  if (question_tokens == 0) fail("question_tokens must be positive");
  if (planted == 0) fail("planted set is empty; the question would be vacuous");
  if (planted > num_tokens()) {
    fail("planted (" + std::to_string(planted) + ") exceeds video tokens (" +
         std::to_string(num_tokens()) + ")");
  }
  if (planted_frames == 0 || planted_frames > frames) {
    fail("planted_frames must lie in [1, frames]");
  }
  if (planted > planted_frames * height * width) {
    fail("planted tokens do not fit in planted_frames");
  }
  if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0)) {
    fail("coverage_threshold must lie in (0, 1]");
  }
  if (!(p_blind >= 0.0 && p_blind <= 1.0)) fail("p_blind must lie in [0, 1]");
  if (alphabet < 2 || alphabet > 26) fail("alphabet size must lie in [2, 26]");
  if (concepts < 2) fail("need at least 2 concepts");
  if (dim < 2) fail("dim must be at least 2");
  if (!(noise >= 0.0)) fail("noise must be non-negative");
}

std::string Alphabet(std::size_t size) {
  std::string s;
  for (std::size_t i = 0; i < size; ++i) s.push_back(static_cast<char>('A' + i));
  return s;
}

Episode GenerateEpisode(const EnvConfig& cfg, RngStream rng) {
  cfg.Validate();
  Episode ep;
  ep.seed = rng.base_seed();
  ep.stream = rng.stream_id();
  ep.coverage_threshold = cfg.coverage_threshold;
  ep.alphabet = cfg.alphabet;
  ep.grid.layout = cfg.layout();

  const std::size_t per_frame = cfg.height * cfg.width;
  const std::size_t n = cfg.num_tokens();

  const std::vector<std::vector<double>> codebook = ConceptCodebook(cfg);
  const std::vector<double>& offset = codebook.back();

  RngStream concept_rng = rng.Split(0);
  const std::size_t asked = concept_rng.Index(cfg.concepts);
  const std::vector<double>& signal_dir = codebook[asked];

  RngStream place_rng = rng.Split(1);
  const IndexSet frames = ChooseSubset(cfg.frames, cfg.planted_frames, place_rng);
  const IndexSet slots =
      ChooseSubset(cfg.planted_frames * per_frame, cfg.planted, place_rng);
  for (std::size_t s : slots) {
    ep.planted_tokens.push_back(frames[s / per_frame] * per_frame +
                                s % per_frame);
  }
  std::sort(ep.planted_tokens.begin(), ep.planted_tokens.end());
  for (std::size_t j : ep.planted_tokens) ep.planted_frames.push_back(j / per_frame);
  ep.planted_frames.erase(
      std::unique(ep.planted_frames.begin(), ep.planted_frames.end()),
      ep.planted_frames.end());

  std::vector<bool> planted(n, false);
  for (std::size_t j : ep.planted_tokens) planted[j] = true;

  ep.grid.video = Tensor({n, cfg.dim});
  RngStream video_rng = rng.Split(2);
  for (std::size_t j = 0; j < n; ++j) {
    RngStream tok = video_rng.Split(j);
    std::size_t c = asked;
    if (!planted[j]) {
      c = tok.Index(cfg.concepts - 1);
      if (c >= asked) ++c;
    }
    for (std::size_t d = 0; d < cfg.dim; ++d) {
      ep.grid.video(j, d) = cfg.signal * codebook[c][d] + cfg.noise * tok.Gaussian();
    }
  }

  ep.grid.question = Tensor({cfg.question_tokens, cfg.dim});
  RngStream q_rng = rng.Split(3);
  for (std::size_t i = 0; i < cfg.question_tokens; ++i) {
    for (std::size_t c = 0; c < cfg.dim; ++c) {
      ep.grid.question(i, c) = cfg.question_signal * signal_dir[c] +
                               cfg.question_offset * offset[c] +
                               cfg.noise * q_rng.Gaussian();
    }
  }

  RngStream meta = rng.Split(4);
  ep.answer = static_cast<char>('A' + meta.Index(cfg.alphabet));
  ep.blind_answerable = meta.Uniform() < cfg.p_blind;
  return ep;
}

std::vector<Episode> GenerateDataset(const EnvConfig& cfg, std::size_t count,
                                     std::uint64_t stream_base) {
  const RngStream base(cfg.seed, stream_base);
  std::vector<Episode> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(GenerateEpisode(cfg, base.Split(i)));
  }
  return out;
}

double Coverage(std::span<const std::size_t> selected, const Episode& ep) {
  std::size_t hits = 0;
  for (std::size_t j : selected) {
    hits += std::binary_search(ep.planted_tokens.begin(),
                               ep.planted_tokens.end(), j)
                ? 1
                : 0;
  }
  return static_cast<double>(hits) /
         static_cast<double>(ep.planted_tokens.size());
}

std::string OracleAnswer(std::span<const std::size_t> selected,
                         const Episode& ep) {
  const std::size_t n = ep.grid.layout.num_tokens();
  IndexSet sel(selected.begin(), selected.end());
  std::sort(sel.begin(), sel.end());
  sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
  for (std::size_t j : sel) {
    if (j >= n) throw std::out_of_range("selected token outside the video");
  }
  if (ep.blind_answerable ||
      Coverage(sel, ep) + kCoverageSlack >= ep.coverage_threshold) {
    return std::string(1, ep.answer);
  }
  std::uint64_t h = Mix64(ep.seed ^ Mix64(ep.stream));
  for (std::size_t j : sel) h = Mix64(h ^ (j + 0x9E3779B97F4A7C15ULL));
  const auto offset = 1 + static_cast<std::size_t>(h % (ep.alphabet - 1));
  const auto answer = static_cast<std::size_t>(ep.answer - 'A');
  return std::string(1, static_cast<char>('A' + (answer + offset) % ep.alphabet));
}

double BlindReward(const Episode& ep) {
  return OracleAnswer({}, ep) == std::string(1, ep.answer) ? 1.0 : 0.0;
}

double RandomSelectionSuccess(std::size_t n, std::size_t planted,
                              std::size_t k, double coverage_threshold) {
  if (planted > n || k > n) throw std::invalid_argument("hypergeometric sizes");
  const double need = coverage_threshold * static_cast<double>(planted);
  const double total = LogChoose(static_cast<double>(n), static_cast<double>(k));
  double p = 0.0;
  for (std::size_t x = 0; x <= std::min(planted, k); ++x) {
    if (static_cast<double>(x) + kCoverageSlack < need) continue;
    if (k - x > n - planted) continue;
    p += std::exp(LogChoose(static_cast<double>(planted), static_cast<double>(x)) +
                  LogChoose(static_cast<double>(n - planted),
                            static_cast<double>(k - x)) -
                  total);
  }
  return p;
}

void WriteEpisodeRecord(std::ostream& out, const EnvConfig& cfg,
                        const RngStream& rng) {
  out.precision(17);
  out << "cacovid-episode 1\n"
      << "frames " << cfg.frames << "\n"
      << "height " << cfg.height << "\n"
      << "width " << cfg.width << "\n"
      << "dim " << cfg.dim << "\n"
      << "question_tokens " << cfg.question_tokens << "\n"
      << "planted " << cfg.planted << "\n"
      << "planted_frames " << cfg.planted_frames << "\n"
      << "coverage_threshold " << cfg.coverage_threshold << "\n"
      << "noise " << cfg.noise << "\n"
      << "signal " << cfg.signal << "\n"
      << "question_signal " << cfg.question_signal << "\n"
      << "question_offset " << cfg.question_offset << "\n"
      << "p_blind " << cfg.p_blind << "\n"
      << "alphabet " << cfg.alphabet << "\n"
      << "concepts " << cfg.concepts << "\n"
      << "seed " << cfg.seed << "\n"
      << "base_seed " << rng.base_seed() << "\n"
      << "stream " << rng.stream_id() << "\n";
}

EpisodeRecord ReadEpisodeRecord(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "cacovid-episode 1") {
    throw std::invalid_argument("not an episode record");
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) {
      throw std::invalid_argument("malformed record line: " + line);
    }
    kv[key] = value;
  }
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("record lacks " + key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto size = [&](const std::string& key) {
    return static_cast<std::size_t>(std::stoull(take(key)));
  };
  auto real = [&](const std::string& key) { return std::stod(take(key)); };
  EpisodeRecord r;
  EnvConfig& c = r.config;
  c.frames = size("frames");
  c.height = size("height");
  c.width = size("width");
  c.dim = size("dim");
  c.question_tokens = size("question_tokens");
  c.planted = size("planted");
  c.planted_frames = size("planted_frames");
  c.coverage_threshold = real("coverage_threshold");
  c.noise = real("noise");
  c.signal = real("signal");
  c.question_signal = real("question_signal");
  c.question_offset = real("question_offset");
  c.p_blind = real("p_blind");
  c.alphabet = size("alphabet");
  c.concepts = size("concepts");
  c.seed = std::stoull(take("seed"));
  const std::uint64_t base = std::stoull(take("base_seed"));
  const std::uint64_t stream = std::stoull(take("stream"));
  if (!kv.empty()) {
    throw std::invalid_argument("unknown record key " + kv.begin()->first);
  }
  c.Validate();
  r.rng = RngStream(base, stream);
  return r;
}

}  // namespace cacovid::env
