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

// Compression policy network.
//
// One single-head self-attention block (with residual, no normalization, no
// positional encoding) runs over the concatenated video and question tokens.
// The video rows feed a token head; their per-frame spatial mean feeds a
// frame head. Each head is a two-layer tanh perceptron with two output
// channels: channel 1 votes "keep", channel 0 votes "drop", and their
// difference is the contribution score.

#ifndef CACOVID_POLICY_NET_H_
#define CACOVID_POLICY_NET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cacovid/checkpoint.h"
#include "cacovid/graph.h"
#include "cacovid/tensor.h"

namespace cacovid::policy {

using diffcore::Tensor;
using IndexSet = std::vector<std::size_t>;

struct GridLayout {
  std::size_t frames = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t tokens_per_frame() const { return height * width; }
  std::size_t num_tokens() const { return frames * height * width; }

  struct Position {
    std::size_t frame;
    std::size_t row;
    std::size_t col;
  };
  Position Locate(std::size_t token) const;
  std::size_t FrameOf(std::size_t token) const {
    return token / tokens_per_frame();
  }
};

struct TokenGrid {
  GridLayout layout;
  Tensor video;     // num_tokens x dim
  Tensor question;  // n_question x dim

  std::size_t dim() const { return video.cols(); }
  // Throws std::invalid_argument when the tensors do not fit the layout.
  void Validate() const;
};

// Parameter names, grouped by prefix so the trainer can give each group its
// own learning rate.
inline constexpr const char* kAttnGroup = "attn";
inline constexpr const char* kTokenHeadGroup = "head_t";
inline constexpr const char* kFrameHeadGroup = "head_f";

struct PolicyParams {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  diffcore::ParamMap tensors;

  const Tensor& at(const std::string& name) const { return tensors.at(name); }
  bool AllFinite() const;
};

// "attn.wq" -> "attn"
std::string ParamGroup(const std::string& name);

// Xavier-uniform weights (attention projections included), zero biases.
// hidden == 0 selects the default width 2 * dim.
PolicyParams InitParams(std::size_t dim, std::size_t hidden,
                        std::uint64_t seed);

// Rebuilds dim/hidden from tensor shapes, e.g. after loading a checkpoint.
PolicyParams FromTensors(diffcore::ParamMap tensors);

double XavierBound(std::size_t fan_in, std::size_t fan_out);

struct ContributionScores {
  Tensor token_logits;               // num_tokens x 2
  Tensor frame_logits;               // frames x 2
  std::vector<double> token_scores;  // logit[:,1] - logit[:,0]
  std::vector<double> frame_scores;
};

// Nodes of the policy inside a caller-owned graph. Inputs are named
// "video" and "question"; parameters use the names in PolicyParams.
struct PolicyNodes {
  diffcore::Var video;
  diffcore::Var question;
  diffcore::Var features;  // question-aware video rows
  diffcore::Var token_logits;
  diffcore::Var frame_logits;
};

PolicyNodes BuildPolicyGraph(diffcore::Graph& graph, const GridLayout& layout,
                             std::size_t n_question, std::size_t dim,
                             std::size_t hidden);

// Feed for BuildPolicyGraph's inputs and parameters. The feed points into
// `grid` and `params`; both must outlive its use.
diffcore::Feed MakeFeed(const TokenGrid& grid, const PolicyParams& params);

ContributionScores Forward(const TokenGrid& grid, const PolicyParams& params);

// hat[j] = logits[j][1] - logits[j][0].
std::vector<double> ContributionFromLogits(const Tensor& logits);

// Per-index log-probability of the observed keep/drop decision:
// log softmax(logits[j])[1] if j is selected, else [0].
std::vector<double> SelectionLogProb(const Tensor& logits,
                                     std::span<const std::size_t> selected,
                                     std::size_t universe_size);

// Channel map for GatherChannels: row i has 1 at selected positions of
// selections[i], 0 elsewhere.
Tensor SelectionChannels(std::span<const IndexSet> selections,
                         std::size_t universe_size);

// Differentiable version over a batch of selections: returns a
// selections.size() x n tensor of log-probabilities.
diffcore::Var SelectionLogProb(diffcore::Graph& graph, diffcore::Var logits,
                               std::span<const IndexSet> selections);

}  // namespace cacovid::policy

#endif  // CACOVID_POLICY_NET_H_
