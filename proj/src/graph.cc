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

#include "cacovid/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cacovid/kernels.h"

namespace cacovid::diffcore {
namespace {

std::size_t LastDim(const Shape& s) { return s.empty() ? 1 : s.back(); }

// Softmax along the last axis, writing into out (same size as in).
void SoftmaxLastAxis(std::span<const double> in, std::size_t width,
                     std::span<double> out) {
  const std::size_t rows = in.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * width;
    double* y = out.data() + r * width;
    const double mx = *std::max_element(x, x + width);
    double z = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      y[c] = std::exp(x[c] - mx);
      z += y[c];
    }
    for (std::size_t c = 0; c < width; ++c) y[c] /= z;
  }
}

void AddInto(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

const char* OpName(OpKind op) {
  switch (op) {
    case OpKind::kInput: return "input";
    case OpKind::kParam: return "param";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatMulTransposed: return "matmul_transposed";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kTanh: return "tanh";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kRowSoftmax: return "row_softmax";
    case OpKind::kChannelSoftmax: return "channel_softmax";
    case OpKind::kChannelLogSoftmax: return "channel_log_softmax";
    case OpKind::kMeanPoolRows: return "mean_pool_rows";
    case OpKind::kSliceRows: return "slice_rows";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kGatherChannels: return "gather_channels";
    case OpKind::kClamp: return "clamp";
    case OpKind::kMinimum: return "minimum";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
  }
  return "unknown";
}

Var Graph::AddNode(OpKind op, std::vector<int> inputs, Shape shape,
                   std::string name) {
  const int id = static_cast<int>(nodes_.size());
  if (name.empty()) name = std::string(OpName(op)) + "#" + std::to_string(id);
  Node n;
  n.op = op;
  n.inputs = std::move(inputs);
  n.shape = std::move(shape);
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  forward_done_ = false;
  backward_done_ = false;
  return Var(id);
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id() >= static_cast<int>(nodes_.size())) {
    throw GraphError("invalid node handle");
  }
  return nodes_[v.id()];
}

std::string Graph::Describe(int id) const {
  return "node '" + nodes_[id].name + "' (" + ShapeToString(nodes_[id].shape) +
         ")";
}

std::string Graph::DescribeNew(OpKind op) const {
  return std::string(OpName(op)) + "#" + std::to_string(nodes_.size());
}

const Shape& Graph::shape(Var v) const { return node(v).shape; }
const std::string& Graph::name(Var v) const { return node(v).name; }

std::vector<std::string> Graph::ParamNames() const {
  std::vector<std::string> names;
  for (const Node& n : nodes_) {
    if (n.op == OpKind::kParam) names.push_back(n.name);
  }
  return names;
}

Var Graph::Input(const std::string& name, Shape shape) {
  return AddNode(OpKind::kInput, {}, std::move(shape), name);
}

Var Graph::Param(const std::string& name, Shape shape) {
  for (const Node& n : nodes_) {
    if (n.op == OpKind::kParam && n.name == name) {
      throw GraphError("duplicate parameter '" + name + "'");
    }
  }
  return AddNode(OpKind::kParam, {}, std::move(shape), name);
}

Var Graph::Constant(Tensor value, const std::string& name) {
  Shape s = value.shape();
  Var v = AddNode(OpKind::kConstant, {}, std::move(s), name);
  nodes_[v.id()].value = std::move(value);
  return v;
}

Var Graph::MatMul(Var a, Var b) {
  const Shape& sa = shape(a);
  const Shape& sb = shape(b);
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw GraphError(DescribeNew(OpKind::kMatMul) + ": cannot multiply " +
                     Describe(a.id()) + " by " + Describe(b.id()));
  }
  return AddNode(OpKind::kMatMul, {a.id(), b.id()}, {sa[0], sb[1]});
}

Var Graph::MatMulTransposed(Var a, Var b) {
  const Shape& sa = shape(a);
  const Shape& sb = shape(b);
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[1]) {
    throw GraphError(DescribeNew(OpKind::kMatMulTransposed) +
                     ": cannot multiply " + Describe(a.id()) +
                     " by transpose of " + Describe(b.id()));
  }
  return AddNode(OpKind::kMatMulTransposed, {a.id(), b.id()}, {sa[0], sb[0]});
}

#define CACOVID_SAME_SHAPE_OP(Method, Kind)                                 \
  Var Graph::Method(Var a, Var b) {                                         \
    if (shape(a) != shape(b)) {                                             \
      throw GraphError(DescribeNew(Kind) + ": shape mismatch between " +    \
                       Describe(a.id()) + " and " + Describe(b.id()));      \
    }                                                                       \
    return AddNode(Kind, {a.id(), b.id()}, shape(a));                       \
  }

CACOVID_SAME_SHAPE_OP(Add, OpKind::kAdd)
CACOVID_SAME_SHAPE_OP(Sub, OpKind::kSub)
CACOVID_SAME_SHAPE_OP(Mul, OpKind::kMul)
CACOVID_SAME_SHAPE_OP(Minimum, OpKind::kMinimum)
#undef CACOVID_SAME_SHAPE_OP

Var Graph::Scale(Var a, double factor) {
  Var v = AddNode(OpKind::kScale, {a.id()}, shape(a));
  nodes_[v.id()].a = factor;
  return v;
}

Var Graph::AddBias(Var x, Var bias) {
  const Shape& sx = shape(x);
  const Shape& sb = shape(bias);
  if (sx.size() != 2 || sb.size() != 1 || sb[0] != sx[1]) {
    throw GraphError(DescribeNew(OpKind::kAddBias) + ": bias " +
                     Describe(bias.id()) + " does not fit rows of " +
                     Describe(x.id()));
  }
  return AddNode(OpKind::kAddBias, {x.id(), bias.id()}, sx);
}

Var Graph::Tanh(Var x) { return AddNode(OpKind::kTanh, {x.id()}, shape(x)); }
Var Graph::Exp(Var x) { return AddNode(OpKind::kExp, {x.id()}, shape(x)); }
Var Graph::Log(Var x) { return AddNode(OpKind::kLog, {x.id()}, shape(x)); }

Var Graph::RowSoftmax(Var x) {
  if (shape(x).empty() || NumElements(shape(x)) == 0) {
    throw GraphError(DescribeNew(OpKind::kRowSoftmax) +
                     ": softmax of empty " + Describe(x.id()));
  }
  return AddNode(OpKind::kRowSoftmax, {x.id()}, shape(x));
}

Var Graph::ChannelSoftmax(Var logits) {
  if (shape(logits).size() != 2 || shape(logits)[1] == 0) {
    throw GraphError(DescribeNew(OpKind::kChannelSoftmax) +
                     ": expected n x c logits, got " + Describe(logits.id()));
  }
  return AddNode(OpKind::kChannelSoftmax, {logits.id()}, shape(logits));
}

Var Graph::ChannelLogSoftmax(Var logits) {
  if (shape(logits).size() != 2 || shape(logits)[1] == 0) {
    throw GraphError(DescribeNew(OpKind::kChannelLogSoftmax) +
                     ": expected n x c logits, got " + Describe(logits.id()));
  }
  return AddNode(OpKind::kChannelLogSoftmax, {logits.id()}, shape(logits));
}

Var Graph::MeanPoolRows(Var x, std::size_t group) {
  const Shape& s = shape(x);
  if (s.size() != 2 || group == 0 || s[0] % group != 0) {
    throw GraphError(DescribeNew(OpKind::kMeanPoolRows) + ": cannot pool " +
                     Describe(x.id()) + " in blocks of " +
                     std::to_string(group));
  }
  Var v = AddNode(OpKind::kMeanPoolRows, {x.id()}, {s[0] / group, s[1]});
  nodes_[v.id()].group = group;
  return v;
}

Var Graph::SliceRows(Var x, std::size_t begin, std::size_t end) {
  const Shape& s = shape(x);
  if (s.size() != 2 || begin >= end || end > s[0]) {
    throw GraphError(DescribeNew(OpKind::kSliceRows) + ": rows [" +
                     std::to_string(begin) + "," + std::to_string(end) +
                     ") out of " + Describe(x.id()));
  }
  Var v = AddNode(OpKind::kSliceRows, {x.id()}, {end - begin, s[1]});
  nodes_[v.id()].group = begin;
  return v;
}

Var Graph::ConcatRows(Var top, Var bottom) {
  const Shape& a = shape(top);
  const Shape& b = shape(bottom);
  if (a.size() != 2 || b.size() != 2 || a[1] != b[1]) {
    throw GraphError(DescribeNew(OpKind::kConcatRows) + ": cannot stack " +
                     Describe(top.id()) + " on " + Describe(bottom.id()));
  }
  return AddNode(OpKind::kConcatRows, {top.id(), bottom.id()},
                 {a[0] + b[0], a[1]});
}

Var Graph::GatherChannels(Var values, Var channel) {
  const Shape& sv = shape(values);
  const Shape& sc = shape(channel);
  if (sv.size() != 2 || sc.size() != 2 || sc[1] != sv[0]) {
    throw GraphError(DescribeNew(OpKind::kGatherChannels) +
                     ": channel map " + Describe(channel.id()) +
                     " does not index rows of " + Describe(values.id()));
  }
  return AddNode(OpKind::kGatherChannels, {values.id(), channel.id()}, sc);
}

Var Graph::Clamp(Var x, double lo, double hi) {
  if (!(lo <= hi)) {
    throw GraphError(DescribeNew(OpKind::kClamp) + ": empty interval");
  }
  Var v = AddNode(OpKind::kClamp, {x.id()}, shape(x));
  nodes_[v.id()].a = lo;
  nodes_[v.id()].b = hi;
  return v;
}

Var Graph::Sum(Var x) { return AddNode(OpKind::kSum, {x.id()}, Shape{}); }
Var Graph::Mean(Var x) {
  if (NumElements(shape(x)) == 0) {
    throw GraphError(DescribeNew(OpKind::kMean) + ": mean of empty " +
                     Describe(x.id()));
  }
  return AddNode(OpKind::kMean, {x.id()}, Shape{});
}

void Graph::SetOutput(Var v) {
  node(v);
  output_ = v;
}

const Tensor& Graph::value(Var v) const {
  if (!forward_done_) throw GraphError("value requested before forward");
  return node(v).value;
}

const Tensor& Graph::grad(Var v) const {
  if (!backward_done_) throw GraphError("gradient requested before backward");
  return node(v).grad;
}

const Tensor& Graph::Forward(const Feed& feed) {
  if (!output_.valid()) {
    if (nodes_.empty()) throw GraphError("forward on an empty graph");
    output_ = Var(static_cast<int>(nodes_.size()) - 1);
  }
  backward_done_ = false;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    Node& n = nodes_[id];
    if (n.op == OpKind::kInput || n.op == OpKind::kParam) {
      auto it = feed.find(n.name);
      if (it == feed.end() || it->second == nullptr) {
        throw GraphError(Describe(static_cast<int>(id)) + " was not fed");
      }
      if (it->second->shape() != n.shape) {
        throw GraphError(Describe(static_cast<int>(id)) + " fed with shape " +
                         ShapeToString(it->second->shape()));
      }
      n.value = *it->second;
    } else if (n.op != OpKind::kConstant) {
      EvalNode(n);
    }
  }
  forward_done_ = true;
  return nodes_[output_.id()].value;
}

void Graph::EvalNode(Node& n) {
  auto in = [&](std::size_t i) -> const Tensor& {
    return nodes_[n.inputs[i]].value;
  };
  n.value = Tensor(n.shape);
  auto out = n.value.data();
  switch (n.op) {
    case OpKind::kMatMul: {
      const Shape& sa = in(0).shape();
      kernels::MatMul(in(0).data(), in(1).data(), out,
                      {sa[0], sa[1], n.shape[1], false, false});
      break;
    }
    case OpKind::kMatMulTransposed: {
      const Shape& sa = in(0).shape();
      kernels::MatMul(in(0).data(), in(1).data(), out,
                      {sa[0], sa[1], n.shape[1], false, true});
      break;
    }
    case OpKind::kAdd:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = in(0)[i] + in(1)[i];
      break;
    case OpKind::kSub:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = in(0)[i] - in(1)[i];
      break;
    case OpKind::kMul:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = in(0)[i] * in(1)[i];
      break;
    case OpKind::kMinimum:
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::min(in(0)[i], in(1)[i]);
      }
      break;
    case OpKind::kScale:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = n.a * in(0)[i];
      break;
    case OpKind::kAddBias: {
      const std::size_t cols = n.shape[1];
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = in(0)[i] + in(1)[i % cols];
      }
      break;
    }
    case OpKind::kTanh:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(in(0)[i]);
      break;
    case OpKind::kExp:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(in(0)[i]);
      break;
    case OpKind::kLog:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(in(0)[i]);
      break;
    case OpKind::kRowSoftmax:
    case OpKind::kChannelSoftmax:
      SoftmaxLastAxis(in(0).data(), LastDim(n.shape), out);
      break;
    case OpKind::kChannelLogSoftmax: {
      const std::size_t c = n.shape[1];
      const auto x = in(0).data();
      for (std::size_t r = 0; r < n.shape[0]; ++r) {
        const double* row = x.data() + r * c;
        const double mx = *std::max_element(row, row + c);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < c; ++j) out[r * c + j] = row[j] - lse;
      }
      break;
    }
    case OpKind::kMeanPoolRows: {
      const std::size_t c = n.shape[1];
      const double inv = 1.0 / static_cast<double>(n.group);
      for (std::size_t b = 0; b < n.shape[0]; ++b) {
        for (std::size_t j = 0; j < c; ++j) {
          double acc = 0.0;
          for (std::size_t g = 0; g < n.group; ++g) {
            acc += in(0)[(b * n.group + g) * c + j];
          }
          out[b * c + j] = acc * inv;
        }
      }
      break;
    }
    case OpKind::kSliceRows: {
      const std::size_t c = n.shape[1];
      const auto src = in(0).data().subspan(n.group * c, out.size());
      std::copy(src.begin(), src.end(), out.begin());
      break;
    }
    case OpKind::kConcatRows: {
      const auto a = in(0).data();
      const auto b = in(1).data();
      std::copy(a.begin(), a.end(), out.begin());
      std::copy(b.begin(), b.end(), out.begin() + a.size());
      break;
    }
    case OpKind::kGatherChannels: {
      const Tensor& v = in(0);
      const Tensor& ch = in(1);
      const std::size_t rows = n.shape[0];
      const std::size_t cols = n.shape[1];
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          const double cd = ch(i, j);
          const auto c = static_cast<std::size_t>(cd);
          if (cd < 0 || c >= v.cols() || static_cast<double>(c) != cd) {
            throw GraphError("node '" + n.name + "': channel index " +
                             std::to_string(cd) + " out of range");
          }
          out[i * cols + j] = v(j, c);
        }
      }
      break;
    }
    case OpKind::kClamp:
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(in(0)[i], n.a, n.b);
      }
      break;
    case OpKind::kSum: {
      double acc = 0.0;
      for (double v : in(0).data()) acc += v;
      out[0] = acc;
      break;
    }
    case OpKind::kMean: {
      double acc = 0.0;
      for (double v : in(0).data()) acc += v;
      out[0] = acc / static_cast<double>(in(0).size());
      break;
    }
    case OpKind::kInput:
    case OpKind::kParam:
    case OpKind::kConstant:
      break;
  }
}

Gradients Graph::Backward() {
  if (!forward_done_) throw GraphError("backward before forward");
  const Node& out = nodes_[output_.id()];
  if (NumElements(out.shape) != 1) {
    throw GraphError("implicit seed needs a scalar output, got " +
                     Describe(output_.id()));
  }
  return Backward(Tensor(out.shape, 1.0));
}

Gradients Graph::Backward(const Tensor& seed) {
  if (!forward_done_) throw GraphError("backward before forward");
  Node& out = nodes_[output_.id()];
  if (seed.shape() != out.shape) {
    throw GraphError("seed gradient " + ShapeToString(seed.shape()) +
                     " does not match " + Describe(output_.id()));
  }
  for (Node& n : nodes_) n.grad = Tensor(n.shape);
  out.grad = seed;
  for (int id = output_.id(); id >= 0; --id) BackNode(nodes_[id]);
  backward_done_ = true;

  Gradients grads;
  for (const Node& n : nodes_) {
    if (n.op == OpKind::kParam) grads.emplace(n.name, n.grad);
  }
  return grads;
}

void Graph::BackNode(Node& n) {
  auto in_val = [&](std::size_t i) -> const Tensor& {
    return nodes_[n.inputs[i]].value;
  };
  auto in_grad = [&](std::size_t i) -> Tensor& {
    return nodes_[n.inputs[i]].grad;
  };
  const Tensor& dy = n.grad;
  const Tensor& y = n.value;
  switch (n.op) {
    case OpKind::kMatMul: {
      // C = A B: dA = dC B^T, dB = A^T dC.
      const std::size_t m = n.shape[0];
      const std::size_t k = in_val(0).shape()[1];
      const std::size_t p = n.shape[1];
      Tensor da(in_val(0).shape());
      kernels::MatMul(dy.data(), in_val(1).data(), da.data(),
                      {m, p, k, false, true});
      AddInto(in_grad(0), da);
      Tensor db(in_val(1).shape());
      kernels::MatMul(in_val(0).data(), dy.data(), db.data(),
                      {k, m, p, true, false});
      AddInto(in_grad(1), db);
      break;
    }
    case OpKind::kMatMulTransposed: {
      // C = A B^T: dA = dC B, dB = dC^T A.
      const std::size_t m = n.shape[0];
      const std::size_t p = n.shape[1];
      const std::size_t k = in_val(0).shape()[1];
      Tensor da(in_val(0).shape());
      kernels::MatMul(dy.data(), in_val(1).data(), da.data(),
                      {m, p, k, false, false});
      AddInto(in_grad(0), da);
      Tensor db(in_val(1).shape());
      kernels::MatMul(dy.data(), in_val(0).data(), db.data(),
                      {p, m, k, true, false});
      AddInto(in_grad(1), db);
      break;
    }
    case OpKind::kAdd:
      AddInto(in_grad(0), dy);
      AddInto(in_grad(1), dy);
      break;
    case OpKind::kSub: {
      AddInto(in_grad(0), dy);
      auto g = in_grad(1).data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= dy[i];
      break;
    }
    case OpKind::kMul: {
      auto ga = in_grad(0).data();
      auto gb = in_grad(1).data();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        ga[i] += dy[i] * in_val(1)[i];
        gb[i] += dy[i] * in_val(0)[i];
      }
      break;
    }
    case OpKind::kMinimum: {
      auto ga = in_grad(0).data();
      auto gb = in_grad(1).data();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        if (in_val(0)[i] <= in_val(1)[i]) {
          ga[i] += dy[i];
        } else {
          gb[i] += dy[i];
        }
      }
      break;
    }
    case OpKind::kScale: {
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.a * dy[i];
      break;
    }
    case OpKind::kAddBias: {
      AddInto(in_grad(0), dy);
      auto gb = in_grad(1).data();
      const std::size_t cols = n.shape[1];
      for (std::size_t i = 0; i < dy.size(); ++i) gb[i % cols] += dy[i];
      break;
    }
    case OpKind::kTanh: {
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += dy[i] * (1.0 - y[i] * y[i]);
      }
      break;
    }
    case OpKind::kExp: {
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] * y[i];
      break;
    }
    case OpKind::kLog: {
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i] / in_val(0)[i];
      break;
    }
    case OpKind::kRowSoftmax:
    case OpKind::kChannelSoftmax: {
      const std::size_t w = LastDim(n.shape);
      auto g = in_grad(0).data();
      for (std::size_t r = 0; r < y.size() / w; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < w; ++c) dot += dy[r * w + c] * y[r * w + c];
        for (std::size_t c = 0; c < w; ++c) {
          g[r * w + c] += y[r * w + c] * (dy[r * w + c] - dot);
        }
      }
      break;
    }
    case OpKind::kChannelLogSoftmax: {
      const std::size_t w = n.shape[1];
      auto g = in_grad(0).data();
      for (std::size_t r = 0; r < n.shape[0]; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < w; ++c) total += dy[r * w + c];
        for (std::size_t c = 0; c < w; ++c) {
          g[r * w + c] += dy[r * w + c] - std::exp(y[r * w + c]) * total;
        }
      }
      break;
    }
    case OpKind::kMeanPoolRows: {
      const std::size_t c = n.shape[1];
      const double inv = 1.0 / static_cast<double>(n.group);
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t row = i / c;
        g[i] += dy[(row / n.group) * c + i % c] * inv;
      }
      break;
    }
    case OpKind::kSliceRows: {
      const std::size_t offset = n.group * n.shape[1];
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < dy.size(); ++i) g[offset + i] += dy[i];
      break;
    }
    case OpKind::kConcatRows: {
      auto ga = in_grad(0).data();
      auto gb = in_grad(1).data();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += dy[i];
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += dy[ga.size() + i];
      break;
    }
    case OpKind::kGatherChannels: {
      Tensor& gv = in_grad(0);
      const Tensor& ch = in_val(1);
      const std::size_t cols = n.shape[1];
      for (std::size_t i = 0; i < n.shape[0]; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          gv(j, static_cast<std::size_t>(ch(i, j))) += dy(i, j);
        }
      }
      break;
    }
    case OpKind::kClamp: {
      auto g = in_grad(0).data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = in_val(0)[i];
        if (x >= n.a && x <= n.b) g[i] += dy[i];
      }
      break;
    }
    case OpKind::kSum: {
      auto g = in_grad(0).data();
      for (double& v : g) v += dy[0];
      break;
    }
    case OpKind::kMean: {
      auto g = in_grad(0).data();
      const double s = dy[0] / static_cast<double>(g.size());
      for (double& v : g) v += s;
      break;
    }
    case OpKind::kInput:
    case OpKind::kParam:
    case OpKind::kConstant:
      break;
  }
}

}  // namespace cacovid::diffcore
