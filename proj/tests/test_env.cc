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


#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "cacovid/env.h"
#include "cacovid/rng.h"
#include "oracles.h"

namespace cacovid::env {
namespace {

EnvConfig Small() {
  EnvConfig cfg;
  cfg.frames = 4;
  cfg.height = 4;
  cfg.width = 4;
  cfg.planted = 6;
  return cfg;
}

std::string Answer(const Episode& ep) { return std::string(1, ep.answer); }

}  // namespace

TEST_CASE("episodes are reproducible from the seed") {
  const EnvConfig cfg;
  const auto a = GenerateDataset(cfg, 5);
  const auto b = GenerateDataset(cfg, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a[i].grid.video == b[i].grid.video);
    CHECK(a[i].grid.question == b[i].grid.question);
    CHECK(a[i].planted_tokens == b[i].planted_tokens);
    CHECK(a[i].answer == b[i].answer);
  }
  EnvConfig other = cfg;
  other.seed = 43;
  CHECK(GenerateDataset(other, 1)[0].grid.video != a[0].grid.video);
  CHECK(GenerateDataset(cfg, 1, 7)[0].grid.video != a[0].grid.video);
}

TEST_CASE("invalid configs are rejected") {
  EnvConfig cfg = Small();
  cfg.planted = 0;
  CHECK_THROWS(GenerateEpisode(cfg, RngStream(1)));
  cfg.planted = 65;
  CHECK_THROWS(cfg.Validate());
  cfg = Small();
  cfg.planted_frames = 1;
  cfg.planted = 17;
  CHECK_THROWS(cfg.Validate());
  cfg = Small();
  cfg.coverage_threshold = 0.0;
  CHECK_THROWS(cfg.Validate());
  cfg = Small();
  cfg.alphabet = 1;
  CHECK_THROWS(cfg.Validate());
}

TEST_CASE("planted tokens sit inside the planted frames") {
  EnvConfig cfg = Small();
  cfg.planted_frames = 3;
  for (const Episode& ep : GenerateDataset(cfg, 40)) {
    CHECK(ep.planted_tokens.size() == 6);
    CHECK(ep.planted_frames.size() <= 3);
    for (std::size_t j : ep.planted_tokens) {
      CHECK(std::binary_search(ep.planted_frames.begin(), ep.planted_frames.end(), j / 16));
    }
  }
}

TEST_CASE("question tokens point at the planted concept") {
  const EnvConfig cfg;
  const Episode ep = GenerateEpisode(cfg, RngStream(cfg.seed).Split(0));
  auto affinity = [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < cfg.dim; ++c) s += ep.grid.video(j, c) * ep.grid.question(0, c);
    return s;
  };
  double planted = 0.0, other = 0.0;
  std::size_t n_other = 0;
  for (std::size_t j = 0; j < cfg.num_tokens(); ++j) {
    if (std::binary_search(ep.planted_tokens.begin(), ep.planted_tokens.end(), j)) {
      planted += affinity(j);
    } else {
      other += affinity(j);
      ++n_other;
    }
  }
  CHECK(planted / static_cast<double>(cfg.planted) >
        other / static_cast<double>(n_other) + 1.0);
}

TEST_CASE("oracle answers") {
  EnvConfig cfg = Small();
  const Episode ep = GenerateEpisode(cfg, RngStream(5));
  CHECK(OracleAnswer(ep.planted_tokens, ep) == Answer(ep));
  CHECK(OracleAnswer({}, ep) != Answer(ep));
  const IndexSet half(ep.planted_tokens.begin(), ep.planted_tokens.begin() + 3);
  CHECK(OracleAnswer(half, ep) == Answer(ep));
  const IndexSet two(ep.planted_tokens.begin(), ep.planted_tokens.begin() + 2);
  const std::string wrong = OracleAnswer(two, ep);
  CHECK(wrong != Answer(ep));
  CHECK(wrong == OracleAnswer(two, ep));
  CHECK(Alphabet(4).find(wrong) != std::string::npos);
  const std::vector<std::size_t> outside = {64};
  CHECK_THROWS(OracleAnswer(outside, ep));
}

TEST_CASE("blind reward") {
  EnvConfig cfg = Small();
  cfg.p_blind = 0.0;
  for (const Episode& ep : GenerateDataset(cfg, 30)) CHECK(BlindReward(ep) == 0.0);
  cfg.p_blind = 1.0;
  for (const Episode& ep : GenerateDataset(cfg, 30)) {
    CHECK(ep.blind_answerable);
    CHECK(BlindReward(ep) == 1.0);
  }
  cfg.p_blind = 0.5;
  for (const Episode& ep : GenerateDataset(cfg, 30)) {
    CHECK(BlindReward(ep) == (ep.blind_answerable ? 1.0 : 0.0));
  }
}

TEST_CASE("adding planted tokens never breaks a correct answer") {
  const EnvConfig cfg = Small();
  RngStream rng(77);
  for (const Episode& ep : GenerateDataset(cfg, 20)) {
    for (int trial = 0; trial < 20; ++trial) {
      IndexSet sel;
      for (std::size_t j = 0; j < 64; ++j) {
        if (rng.Uniform() < 0.3) sel.push_back(j);
      }
      const bool ok = OracleAnswer(sel, ep) == Answer(ep);
      IndexSet more = sel;
      more.push_back(ep.planted_tokens[rng.Index(ep.planted_tokens.size())]);
      std::sort(more.begin(), more.end());
      more.erase(std::unique(more.begin(), more.end()), more.end());
      if (ok) CHECK(OracleAnswer(more, ep) == Answer(ep));
      CHECK(Coverage(more, ep) >= Coverage(sel, ep));
    }
  }
}

TEST_CASE("random selection success is the hypergeometric tail") {
  CHECK(RandomSelectionSuccess(10, 4, 3, 0.5) ==
        doctest::Approx(oracle::HypergeometricTail(10, 4, 3, 2)).epsilon(1e-12));
  CHECK(RandomSelectionSuccess(12, 6, 5, 0.5) ==
        doctest::Approx(oracle::HypergeometricTail(12, 6, 5, 3)).epsilon(1e-12));
  CHECK(RandomSelectionSuccess(20, 8, 6, 0.25) ==
        doctest::Approx(oracle::HypergeometricTail(20, 8, 6, 2)).epsilon(1e-12));
  CHECK(RandomSelectionSuccess(10, 4, 1, 0.5) == 0.0);
  CHECK_THROWS(RandomSelectionSuccess(4, 5, 1, 0.5));

  EnvConfig cfg;
  cfg.frames = 1;
  cfg.height = 3;
  cfg.width = 4;
  cfg.planted = 4;
  cfg.planted_frames = 1;
  const Episode ep = GenerateEpisode(cfg, RngStream(3));
  RngStream rng(4);
  const std::size_t draws = 40000;
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<std::size_t> pool(12);
    for (std::size_t j = 0; j < 12; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(5);
    hits += OracleAnswer(pool, ep) == Answer(ep) ? 1 : 0;
  }
  const double p = oracle::HypergeometricTail(12, 4, 5, 2);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(draws));
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(draws) - p) <= 5 * se);
}

TEST_CASE("episode records regenerate the same episode") {
  EnvConfig cfg = Small();
  cfg.noise = 0.123456789;
  cfg.seed = 991;
  const RngStream rng = RngStream(cfg.seed).Split(17);
  std::stringstream buf;
  WriteEpisodeRecord(buf, cfg, rng);
  const EpisodeRecord rec = ReadEpisodeRecord(buf);
  const Episode a = GenerateEpisode(cfg, rng);
  const Episode b = GenerateEpisode(rec.config, rec.rng);
  CHECK(a.grid.video == b.grid.video);
  CHECK(a.planted_tokens == b.planted_tokens);
  std::stringstream junk("something else\n");
  CHECK_THROWS(ReadEpisodeRecord(junk));
}

}  // namespace cacovid::env
