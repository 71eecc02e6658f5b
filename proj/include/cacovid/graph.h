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

// A static reverse-mode differentiation graph over dense tensors.
//
// Nodes are appended in dependency order, so the node list is already a
// topological sort. Shapes are inferred when a node is added; a mismatch is
// reported immediately with the offending node's name. Forward() binds named
// inputs and parameters, evaluates every node and keeps the intermediate
// values; Backward() then walks the list in reverse.
//
// Broadcasting is limited to AddBias (row vector added to every row).

#ifndef CACOVID_GRAPH_H_
#define CACOVID_GRAPH_H_

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cacovid/tensor.h"

namespace cacovid::diffcore {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Handle to a node of one Graph.
class Var {
 public:
  Var() = default;
  int id() const { return id_; }
  bool valid() const { return id_ >= 0; }

 private:
  friend class Graph;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

enum class OpKind {
  kInput,
  kParam,
  kConstant,
  kMatMul,
  kMatMulTransposed,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddBias,
  kTanh,
  kExp,
  kLog,
  kRowSoftmax,
  kChannelSoftmax,
  kChannelLogSoftmax,
  kMeanPoolRows,
  kSliceRows,
  kConcatRows,
  kGatherChannels,
  kClamp,
  kMinimum,
  kSum,
  kMean,
};

const char* OpName(OpKind op);

using Feed = std::unordered_map<std::string, const Tensor*>;
using Gradients = std::map<std::string, Tensor>;

class Graph {
 public:
  Var Input(const std::string& name, Shape shape);
  Var Param(const std::string& name, Shape shape);
  Var Constant(Tensor value, const std::string& name = "");

  Var MatMul(Var a, Var b);
  // a * b^T; a is m x k, b is n x k.
  Var MatMulTransposed(Var a, Var b);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var a, double factor);
  Var AddBias(Var x, Var bias);
  Var Tanh(Var x);
  Var Exp(Var x);
  Var Log(Var x);
  // Softmax along the last axis; attention rows.
  Var RowSoftmax(Var x);
  // Softmax across the channels (columns) of an n x c logit matrix.
  Var ChannelSoftmax(Var logits);
  Var ChannelLogSoftmax(Var logits);
  // Averages consecutive blocks of `group` rows: (b*group) x c -> b x c.
  Var MeanPoolRows(Var x, std::size_t group);
  Var SliceRows(Var x, std::size_t begin, std::size_t end);
  Var ConcatRows(Var top, Var bottom);
  // out[i][j] = values[j][channel[i][j]] for values n x c, channel g x n.
  // The channel tensor holds integer indices and receives no gradient.
  Var GatherChannels(Var values, Var channel);
  // Gradient passes where lo <= x <= hi.
  Var Clamp(Var x, double lo, double hi);
  // Gradient goes to `a` where a <= b, otherwise to `b`.
  Var Minimum(Var a, Var b);
  Var Sum(Var x);
  Var Mean(Var x);

  void SetOutput(Var v);
  Var output() const { return output_; }

  const Shape& shape(Var v) const;
  const std::string& name(Var v) const;
  std::size_t num_nodes() const { return nodes_.size(); }
  std::vector<std::string> ParamNames() const;

  // Evaluates the graph. Every Input and Param must be present in `feed`
  // with its declared shape.
  const Tensor& Forward(const Feed& feed);
  bool has_forward() const { return forward_done_; }

  // Propagates `seed` (shaped like the output) back to every node and
  // returns the gradient of each parameter, keyed by name.
  Gradients Backward(const Tensor& seed);
  // Scalar output shorthand with seed 1.
  Gradients Backward();

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

 private:
  struct Node {
    OpKind op = OpKind::kInput;
    std::vector<int> inputs;
    Shape shape;
    std::string name;
    double a = 0.0;
    double b = 0.0;
    std::size_t group = 0;
    Tensor value;
    Tensor grad;
  };

  Var AddNode(OpKind op, std::vector<int> inputs, Shape shape,
              std::string name = "");
  const Node& node(Var v) const;
  std::string Describe(int id) const;
  std::string DescribeNew(OpKind op) const;
  void EvalNode(Node& n);
  void BackNode(Node& n);

  std::vector<Node> nodes_;
  Var output_;
  bool forward_done_ = false;
  bool backward_done_ = false;
};

}  // namespace cacovid::diffcore

#endif  // CACOVID_GRAPH_H_
