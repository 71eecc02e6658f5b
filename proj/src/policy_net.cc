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

#include "cacovid/policy_net.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cacovid/rng.h"

namespace cacovid::policy {
namespace {

using diffcore::Graph;
using diffcore::Shape;
using diffcore::Var;

Var Head(Graph& g, const std::string& group, Var x, std::size_t dim,
         std::size_t hidden) {
  Var w1 = g.Param(group + ".w1", {dim, hidden});
  Var b1 = g.Param(group + ".b1", {hidden});
  Var w2 = g.Param(group + ".w2", {hidden, 2});
  Var b2 = g.Param(group + ".b2", {2});
  Var h = g.Tanh(g.AddBias(g.MatMul(x, w1), b1));
  return g.AddBias(g.MatMul(h, w2), b2);
}

Tensor Uniform(Shape shape, double bound, RngStream rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = (2.0 * rng.Uniform() - 1.0) * bound;
  return t;
}

}  // namespace

GridLayout::Position GridLayout::Locate(std::size_t token) const {
  const std::size_t per_frame = tokens_per_frame();
  return {token / per_frame, (token % per_frame) / width, token % width};
}

void TokenGrid::Validate() const {
  if (layout.frames == 0 || layout.height == 0 || layout.width == 0) {
    throw std::invalid_argument("grid needs at least one frame and position");
  }
  if (video.rank() != 2 || video.rows() != layout.num_tokens()) {
    throw std::invalid_argument(
        "video tensor " + diffcore::ShapeToString(video.shape()) +
        " does not hold t*h*w = " + std::to_string(layout.num_tokens()) +
        " tokens");
  }
  if (question.rank() != 2 || question.rows() == 0) {
    throw std::invalid_argument("question needs at least one token");
  }
  if (question.cols() != video.cols()) {
    throw std::invalid_argument("question and video widths differ");
  }
}

bool PolicyParams::AllFinite() const {
  return std::all_of(tensors.begin(), tensors.end(),
                     [](const auto& kv) { return kv.second.AllFinite(); });
}

std::string ParamGroup(const std::string& name) {
  return name.substr(0, name.find('.'));
}

double XavierBound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

PolicyParams InitParams(std::size_t dim, std::size_t hidden,
                        std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("dim must be positive");
  if (hidden == 0) hidden = 2 * dim;
  PolicyParams p{dim, hidden, {}};
  const RngStream root(seed, 0x706F6C696379ULL);
  std::uint64_t stream = 0;
  for (const char* name : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) {
    p.tensors.emplace(name, Uniform({dim, dim}, XavierBound(dim, dim),
                                    root.Split(stream++)));
  }
  for (const char* group : {kTokenHeadGroup, kFrameHeadGroup}) {
    const std::string g = group;
    p.tensors.emplace(g + ".w1", Uniform({dim, hidden},
                                         XavierBound(dim, hidden),
                                         root.Split(stream++)));
    p.tensors.emplace(g + ".b1", Tensor({hidden}));
    p.tensors.emplace(g + ".w2", Uniform({hidden, 2}, XavierBound(hidden, 2),
                                         root.Split(stream++)));
    p.tensors.emplace(g + ".b2", Tensor({2}));
  }
  return p;
}

PolicyParams FromTensors(diffcore::ParamMap tensors) {
  for (const char* name :
       {"attn.wq", "attn.wk", "attn.wv", "attn.wo", "head_t.w1", "head_t.b1",
        "head_t.w2", "head_t.b2", "head_f.w1", "head_f.b1", "head_f.w2",
        "head_f.b2"}) {
    if (!tensors.contains(name)) {
      throw std::invalid_argument(std::string("missing parameter ") + name);
    }
  }
  const Shape& w1 = tensors.at("head_t.w1").shape();
  PolicyParams p{w1.at(0), w1.at(1), std::move(tensors)};
  if (p.tensors.size() != 12) {
    throw std::invalid_argument("unexpected extra parameters");
  }
  return p;
}

PolicyNodes BuildPolicyGraph(Graph& g, const GridLayout& layout,
                             std::size_t n_question, std::size_t dim,
                             std::size_t hidden) {
  PolicyNodes n;
  const std::size_t n_video = layout.num_tokens();
  n.video = g.Input("video", {n_video, dim});
  n.question = g.Input("question", {n_question, dim});
  Var x = g.ConcatRows(n.video, n.question);

  Var wq = g.Param("attn.wq", {dim, dim});
  Var wk = g.Param("attn.wk", {dim, dim});
  Var wv = g.Param("attn.wv", {dim, dim});
  Var wo = g.Param("attn.wo", {dim, dim});
  Var q = g.MatMul(x, wq);
  Var k = g.MatMul(x, wk);
  Var v = g.MatMul(x, wv);
  Var attn = g.RowSoftmax(
      g.Scale(g.MatMulTransposed(q, k), 1.0 / std::sqrt(static_cast<double>(dim))));
  Var mixed = g.MatMul(g.MatMul(attn, v), wo);
  Var out = g.Add(x, mixed);

  // Question rows took part in attention; only video rows are scored.
  n.features = g.SliceRows(out, 0, n_video);
  n.token_logits = Head(g, kTokenHeadGroup, n.features, dim, hidden);
  Var pooled = g.MeanPoolRows(n.features, layout.tokens_per_frame());
  n.frame_logits = Head(g, kFrameHeadGroup, pooled, dim, hidden);
  return n;
}

diffcore::Feed MakeFeed(const TokenGrid& grid, const PolicyParams& params) {
  diffcore::Feed feed;
  feed.emplace("video", &grid.video);
  feed.emplace("question", &grid.question);
  for (const auto& [name, t] : params.tensors) feed.emplace(name, &t);
  return feed;
}

std::vector<double> ContributionFromLogits(const Tensor& logits) {
  if (logits.rank() != 2 || logits.cols() != 2) {
    throw std::invalid_argument("contribution needs n x 2 logits");
  }
  std::vector<double> hat(logits.rows());
  for (std::size_t j = 0; j < hat.size(); ++j) {
    hat[j] = logits(j, 1) - logits(j, 0);
  }
  return hat;
}

ContributionScores Forward(const TokenGrid& grid, const PolicyParams& params) {
  grid.Validate();
  if (grid.dim() != params.dim) {
    throw std::invalid_argument("token width " + std::to_string(grid.dim()) +
                                " does not match policy width " +
                                std::to_string(params.dim));
  }
  Graph g;
  PolicyNodes n = BuildPolicyGraph(g, grid.layout, grid.question.rows(),
                                   params.dim, params.hidden);
  g.SetOutput(n.frame_logits);
  g.Forward(MakeFeed(grid, params));
  ContributionScores s;
  s.token_logits = g.value(n.token_logits);
  s.frame_logits = g.value(n.frame_logits);
  s.token_scores = ContributionFromLogits(s.token_logits);
  s.frame_scores = ContributionFromLogits(s.frame_logits);
  return s;
}

std::vector<double> SelectionLogProb(const Tensor& logits,
                                     std::span<const std::size_t> selected,
                                     std::size_t universe_size) {
  if (logits.rank() != 2 || logits.cols() != 2 ||
      logits.rows() != universe_size) {
    throw std::invalid_argument("logits must be universe_size x 2");
  }
  std::vector<bool> chosen(universe_size, false);
  for (std::size_t j : selected) {
    if (j >= universe_size) {
      throw std::out_of_range("selected index " + std::to_string(j) +
                              " outside universe of " +
                              std::to_string(universe_size));
    }
    chosen[j] = true;
  }
  std::vector<double> out(universe_size);
  for (std::size_t j = 0; j < universe_size; ++j) {
    const double a = logits(j, 0);
    const double b = logits(j, 1);
    const double mx = std::max(a, b);
    const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
    out[j] = (chosen[j] ? b : a) - lse;
  }
  return out;
}

Tensor SelectionChannels(std::span<const IndexSet> selections,
                         std::size_t universe_size) {
  Tensor ch({selections.size(), universe_size});
  for (std::size_t i = 0; i < selections.size(); ++i) {
    for (std::size_t j : selections[i]) {
      if (j >= universe_size) {
        throw std::out_of_range("selected index " + std::to_string(j) +
                                " outside universe of " +
                                std::to_string(universe_size));
      }
      ch(i, j) = 1.0;
    }
  }
  return ch;
}

diffcore::Var SelectionLogProb(Graph& graph, Var logits,
                               std::span<const IndexSet> selections) {
  const std::size_t n = graph.shape(logits).at(0);
  Var log_probs = graph.ChannelLogSoftmax(logits);
  Var channels = graph.Constant(SelectionChannels(selections, n));
  return graph.GatherChannels(log_probs, channels);
}

}  // namespace cacovid::policy
