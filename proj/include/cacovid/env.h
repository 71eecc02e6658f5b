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

// Synthetic video-QA environment standing in for a frozen video LLM.
//
// Each episode plants a set K of critical tokens inside a few frames. The
// "model" answers correctly iff the episode is blind-answerable or the kept
// tokens cover at least a coverage_threshold fraction of K; otherwise it
// returns a wrong symbol fixed by (episode, selection).
//
// Token construction: each config seed fixes a codebook of `concepts` unit
// directions and a question marker direction f orthogonal to all of them.
// An episode asks about one concept c. Planted tokens are signal * c + noise;
// every other token is signal * (a different random concept) + noise, so a
// token's marginal law does not reveal whether it is planted. Question tokens
// are question_signal * c + question_offset * f + noise. Finding K therefore
// means relating video tokens to the question.

#ifndef CACOVID_ENV_H_
#define CACOVID_ENV_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cacovid/policy_net.h"
#include "cacovid/rng.h"

namespace cacovid::env {

using policy::IndexSet;
using policy::TokenGrid;

struct EnvConfig {
  std::size_t frames = 4;
  std::size_t height = 6;
  std::size_t width = 6;
  std::size_t dim = 16;
  std::size_t question_tokens = 8;
  std::size_t planted = 8;          // |K|
  std::size_t planted_frames = 2;   // frames K is spread over
  double coverage_threshold = 0.5;  // theta_cov
  double noise = 0.3;
  double signal = 2.0;
  double question_signal = 2.0;
  double question_offset = 3.0;
  std::size_t concepts = 18;
  double p_blind = 0.0;
  std::size_t alphabet = 4;
  std::uint64_t seed = 42;

  policy::GridLayout layout() const { return {frames, height, width}; }
  std::size_t num_tokens() const { return frames * height * width; }
  void Validate() const;
};

struct Episode {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  TokenGrid grid;
  IndexSet planted_tokens;
  IndexSet planted_frames;
  char answer = 'A';
  bool blind_answerable = false;
  double coverage_threshold = 0.5;
  std::size_t alphabet = 4;
};

std::string Alphabet(std::size_t size);

Episode GenerateEpisode(const EnvConfig& cfg, RngStream rng);
// Episode i uses RngStream(cfg.seed, stream_base).Split(i).
std::vector<Episode> GenerateDataset(const EnvConfig& cfg, std::size_t count,
                                     std::uint64_t stream_base = 0);

// |selected ∩ K| / |K|.
double Coverage(std::span<const std::size_t> selected, const Episode& ep);

std::string OracleAnswer(std::span<const std::size_t> selected,
                         const Episode& ep);

// Reward of answering with no video tokens at all.
double BlindReward(const Episode& ep);

// Probability that a uniformly random k-subset of n tokens answers a
// non-blind episode correctly: P(|X ∩ K| >= theta * |K|) for hypergeometric X.
double RandomSelectionSuccess(std::size_t n, std::size_t planted,
                              std::size_t k, double coverage_threshold);

// Plain-text fixture: "cacovid-episode 1", then one "key value" line per
// config field, then "stream <id>". Tensors are regenerated from the seed.
void WriteEpisodeRecord(std::ostream& out, const EnvConfig& cfg,
                        const RngStream& rng);
struct EpisodeRecord {
  EnvConfig config;
  RngStream rng{0};
};
EpisodeRecord ReadEpisodeRecord(std::istream& in);

}  // namespace cacovid::env

#endif  // CACOVID_ENV_H_
