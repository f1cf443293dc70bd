// Copyright 2026 The Winne Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WINNE_GRAPH_HPP_
#define WINNE_GRAPH_HPP_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "winne/tensor.hpp"

namespace winne {

// Reverse-mode autodiff over an append-only tape of tensor nodes. Values are
// computed eagerly when a node is pushed; insertion order is the topological
// order. backward() runs the tape in reverse and accumulates gradients in a
// pinned left-to-right order so trajectories are bit-reproducible.
class Graph {
 public:
  using NodeId = int32_t;

  enum class Op : uint8_t {
    kInput,
    kAdd,
    kSub,
    kMul,            // elementwise
    kScale,          // x * aux_a
    kAddConst,       // x + aux_a
    kMatVec,         // W [m x n] * x [n]
    kAffine,         // W*x + U*h, fused
    kDot,            // <a, b> -> scalar
    kConcat,         // [a; b]
    kGather,         // a[aux_i] -> scalar
    kSum,            // sum(a) -> scalar
    kTanh,
    kSigmoid,
    kRelu,
    kExp,
    kLog,
    kNeg,
    kSquare,
    kMin2,           // min of two scalars; first argument wins ties
    kClip,           // clamp to [aux_a, aux_b]; gradient zero when clipped
    kMaskedSoftmax,  // masked entries exactly 0; stabilized by max-subtraction
    kEntropy,        // -sum p log p over the positive entries of a distribution
    kL2Norm,         // x / ||x||
  };

  NodeId input(Tensor v);
  // Leaf that neither stores nor propagates gradients (observations,
  // one-hot encodings). Sparse inputs also take a fast matvec path.
  NodeId constant(Tensor v);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_const(NodeId a, double c);
  NodeId matvec(NodeId w, NodeId x);
  NodeId affine(NodeId w, NodeId x, NodeId u, NodeId h);
  NodeId dot(NodeId a, NodeId b);
  NodeId concat(NodeId a, NodeId b);
  NodeId gather(NodeId a, int index);
  NodeId sum(NodeId a);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId relu(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId neg(NodeId a);
  NodeId square(NodeId a);
  NodeId min2(NodeId a, NodeId b);
  NodeId clip(NodeId a, double lo, double hi);
  NodeId masked_softmax(NodeId logits, std::span<const uint8_t> mask);
  NodeId entropy(NodeId probs);
  NodeId l2_normalize(NodeId a);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node.
  // The loss must be scalar. Nodes that do not feed the loss keep zero
  // gradient.
  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].val; }
  // Valid after backward(); zeros of the value's shape otherwise.
  Tensor grad(NodeId id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.shape != n.val.shape) return Tensor::zeros(n.val.shape);
    return n.grad;
  }
  double scalar(NodeId id) const { return value(id).data[0]; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    NodeId in0 = -1;
    NodeId in1 = -1;
    NodeId in2 = -1;
    NodeId in3 = -1;
    double aux_a = 0.0;
    double aux_b = 0.0;
    int aux_i = 0;
    bool no_grad = false;
    std::vector<uint8_t> mask;
    Tensor val;
    Tensor grad;
  };

  NodeId push(Node n);
  void backprop_node(Node& n);

  std::vector<Node> nodes_;
};

// Graph plus parameter binding. Binding the same tensor twice within one
// tape returns the same leaf node, so gradients from repeated layer
// applications accumulate in one place.
class Tape {
 public:
  Graph g;

  Graph::NodeId bind(const Tensor& t) {
    auto it = bound_.find(t.data.data());
    if (it != bound_.end()) return it->second;
    Graph::NodeId id = g.input(t);
    bound_.emplace(t.data.data(), id);
    return id;
  }

  // Gradient of a bound parameter; zero tensor when the parameter never
  // entered this tape (or before backward ran).
  Tensor grad_of(const Tensor& t) const {
    auto it = bound_.find(t.data.data());
    if (it == bound_.end()) return Tensor::zeros(t.shape);
    return g.grad(it->second);
  }

 private:
  std::unordered_map<const double*, Graph::NodeId> bound_;
};

}  // namespace winne

#endif  // WINNE_GRAPH_HPP_
