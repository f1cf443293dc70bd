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

#include "winne/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "winne/error.hpp"

namespace winne {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape == b.shape, ErrorKind::kContract,
          std::string(op) + ": shape mismatch");
}

}  // namespace

Graph::NodeId Graph::push(Node n) {
  if (!n.no_grad) {
    for (double v : n.val.data) {
      if (!std::isfinite(v)) {
        fail(ErrorKind::kNumeric,
             "non-finite value at node " + std::to_string(nodes_.size()));
      }
    }
  }
  // Gradients are materialized lazily by backward(); forward-only passes
  // never pay for them.
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Graph::NodeId Graph::input(Tensor v) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(v);
  return push(std::move(n));
}

Graph::NodeId Graph::constant(Tensor v) {
  Node n;
  n.op = Op::kInput;
  n.no_grad = true;
  n.val = std::move(v);
  return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  check_same_shape(value(a), value(b), "add");
  Node n;
  n.op = Op::kAdd;
  n.in0 = a;
  n.in1 = b;
  n.val = value(a);
  for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] += value(b).data[i];
  return push(std::move(n));
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
  check_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = Op::kSub;
  n.in0 = a;
  n.in1 = b;
  n.val = value(a);
  for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] -= value(b).data[i];
  return push(std::move(n));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
  check_same_shape(value(a), value(b), "mul");
  Node n;
  n.op = Op::kMul;
  n.in0 = a;
  n.in1 = b;
  n.val = value(a);
  for (size_t i = 0; i < n.val.size(); ++i) n.val.data[i] *= value(b).data[i];
  return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId a, double c) {
  Node n;
  n.op = Op::kScale;
  n.in0 = a;
  n.aux_a = c;
  n.val = value(a);
  for (double& v : n.val.data) v *= c;
  return push(std::move(n));
}

Graph::NodeId Graph::add_const(NodeId a, double c) {
  Node n;
  n.op = Op::kAddConst;
  n.in0 = a;
  n.aux_a = c;
  n.val = value(a);
  for (double& v : n.val.data) v += c;
  return push(std::move(n));
}

Graph::NodeId Graph::matvec(NodeId w, NodeId x) {
  const Tensor& W = value(w);
  const Tensor& X = value(x);
  require(W.shape.size() == 2 && X.shape.size() == 1 && W.cols() == X.rows(),
          ErrorKind::kContract, "matvec: dimension mismatch");
  Node n;
  n.op = Op::kMatVec;
  n.in0 = w;
  n.in1 = x;
  n.val = Tensor::zeros({W.rows()});
  int nnz = 0;
  for (int c = 0; c < W.cols(); ++c) nnz += X.at(c) != 0.0 ? 1 : 0;
  if (nnz * 4 < W.cols()) {
    for (int c = 0; c < W.cols(); ++c) {
      const double xc = X.at(c);
      if (xc == 0.0) continue;
      for (int r = 0; r < W.rows(); ++r) n.val.at(r) += W.at(r, c) * xc;
    }
  } else {
    for (int r = 0; r < W.rows(); ++r) {
      double acc = 0.0;
      for (int c = 0; c < W.cols(); ++c) acc += W.at(r, c) * X.at(c);
      n.val.at(r) = acc;
    }
  }
  return push(std::move(n));
}

namespace {

void matvec_accumulate(const Tensor& W, const Tensor& X, Tensor* out) {
  int nnz = 0;
  for (int c = 0; c < W.cols(); ++c) nnz += X.at(c) != 0.0 ? 1 : 0;
  if (nnz * 4 < W.cols()) {
    for (int c = 0; c < W.cols(); ++c) {
      const double xc = X.at(c);
      if (xc == 0.0) continue;
      for (int r = 0; r < W.rows(); ++r) out->at(r) += W.at(r, c) * xc;
    }
  } else {
    for (int r = 0; r < W.rows(); ++r) {
      double acc = 0.0;
      for (int c = 0; c < W.cols(); ++c) acc += W.at(r, c) * X.at(c);
      out->at(r) += acc;
    }
  }
}

}  // namespace

Graph::NodeId Graph::affine(NodeId w, NodeId x, NodeId u, NodeId h) {
  const Tensor& W = value(w);
  const Tensor& X = value(x);
  const Tensor& U = value(u);
  const Tensor& H = value(h);
  require(W.shape.size() == 2 && X.shape.size() == 1 && W.cols() == X.rows() &&
              U.shape.size() == 2 && H.shape.size() == 1 && U.cols() == H.rows() &&
              W.rows() == U.rows(),
          ErrorKind::kContract, "affine: dimension mismatch");
  Node n;
  n.op = Op::kAffine;
  n.in0 = w;
  n.in1 = x;
  n.in2 = u;
  n.in3 = h;
  n.val = Tensor::zeros({W.rows()});
  matvec_accumulate(W, X, &n.val);
  matvec_accumulate(U, H, &n.val);
  return push(std::move(n));
}

Graph::NodeId Graph::dot(NodeId a, NodeId b) {
  check_same_shape(value(a), value(b), "dot");
  Node n;
  n.op = Op::kDot;
  n.in0 = a;
  n.in1 = b;
  double acc = 0.0;
  for (size_t i = 0; i < value(a).size(); ++i)
    acc += value(a).data[i] * value(b).data[i];
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

Graph::NodeId Graph::concat(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kConcat;
  n.in0 = a;
  n.in1 = b;
  std::vector<double> d = value(a).data;
  d.insert(d.end(), value(b).data.begin(), value(b).data.end());
  n.val = Tensor::vector(std::move(d));
  return push(std::move(n));
}

Graph::NodeId Graph::gather(NodeId a, int index) {
  require(index >= 0 && static_cast<size_t>(index) < value(a).size(),
          ErrorKind::kContract, "gather: index out of range");
  Node n;
  n.op = Op::kGather;
  n.in0 = a;
  n.aux_i = index;
  n.val = Tensor::scalar(value(a).at(index));
  return push(std::move(n));
}

Graph::NodeId Graph::sum(NodeId a) {
  Node n;
  n.op = Op::kSum;
  n.in0 = a;
  double acc = 0.0;
  for (double v : value(a).data) acc += v;
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

Graph::NodeId Graph::tanh(NodeId a) {
  Node n;
  n.op = Op::kTanh;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = std::tanh(v);
  return push(std::move(n));
}

Graph::NodeId Graph::sigmoid(NodeId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(n));
}

Graph::NodeId Graph::relu(NodeId a) {
  Node n;
  n.op = Op::kRelu;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Graph::NodeId Graph::exp(NodeId a) {
  Node n;
  n.op = Op::kExp;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = std::exp(v);
  return push(std::move(n));
}

Graph::NodeId Graph::log(NodeId a) {
  Node n;
  n.op = Op::kLog;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = std::log(v);
  return push(std::move(n));
}

Graph::NodeId Graph::neg(NodeId a) {
  Node n;
  n.op = Op::kNeg;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = -v;
  return push(std::move(n));
}

Graph::NodeId Graph::square(NodeId a) {
  Node n;
  n.op = Op::kSquare;
  n.in0 = a;
  n.val = value(a);
  for (double& v : n.val.data) v = v * v;
  return push(std::move(n));
}

Graph::NodeId Graph::min2(NodeId a, NodeId b) {
  require(value(a).is_scalar() && value(b).is_scalar(), ErrorKind::kContract,
          "min2: scalar inputs required");
  Node n;
  n.op = Op::kMin2;
  n.in0 = a;
  n.in1 = b;
  n.val = Tensor::scalar(std::min(value(a).data[0], value(b).data[0]));
  return push(std::move(n));
}

Graph::NodeId Graph::clip(NodeId a, double lo, double hi) {
  Node n;
  n.op = Op::kClip;
  n.in0 = a;
  n.aux_a = lo;
  n.aux_b = hi;
  n.val = value(a);
  for (double& v : n.val.data) v = std::clamp(v, lo, hi);
  return push(std::move(n));
}

Graph::NodeId Graph::masked_softmax(NodeId logits, std::span<const uint8_t> mask) {
  const Tensor& x = value(logits);
  require(mask.size() == x.size(), ErrorKind::kContract,
          "masked_softmax: mask length mismatch");
  bool any = false;
  double mx = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!any || x.data[i] > mx) mx = x.data[i];
    any = true;
  }
  require(any, ErrorKind::kEmptySupport, "masked_softmax: no legal entry");
  Node n;
  n.op = Op::kMaskedSoftmax;
  n.in0 = logits;
  n.mask.assign(mask.begin(), mask.end());
  n.val = Tensor::zeros(x.shape);
  double denom = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    n.val.data[i] = std::exp(x.data[i] - mx);
    denom += n.val.data[i];
  }
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) n.val.data[i] /= denom;
  }
  return push(std::move(n));
}

Graph::NodeId Graph::entropy(NodeId probs) {
  Node n;
  n.op = Op::kEntropy;
  n.in0 = probs;
  double h = 0.0;
  for (double p : value(probs).data) {
    if (p > 0.0) h -= p * std::log(p);
  }
  n.val = Tensor::scalar(h);
  return push(std::move(n));
}

Graph::NodeId Graph::l2_normalize(NodeId a) {
  Node n;
  n.op = Op::kL2Norm;
  n.in0 = a;
  double sq = 0.0;
  for (double v : value(a).data) sq += v * v;
  double norm = std::sqrt(sq);
  n.aux_a = norm;
  n.val = value(a);
  if (norm > 1e-12) {
    for (double& v : n.val.data) v /= norm;
  }
  return push(std::move(n));
}

void Graph::backward(NodeId loss) {
  require(value(loss).is_scalar(), ErrorKind::kContract,
          "backward: loss must be scalar");
  for (Node& n : nodes_) {
    if (n.grad.shape != n.val.shape) {
      n.grad = Tensor::zeros(n.val.shape);
    } else {
      std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
  }
  nodes_[static_cast<size_t>(loss)].grad.data[0] = 1.0;
  for (size_t i = static_cast<size_t>(loss) + 1; i-- > 0;) {
    backprop_node(nodes_[i]);
  }
}

void Graph::backprop_node(Node& n) {
  if (n.op == Op::kInput) return;
  Tensor& g = n.grad;
  bool all_zero = true;
  for (double v : g.data) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) return;

  auto& g0 = nodes_[static_cast<size_t>(n.in0)];
  switch (n.op) {
    case Op::kAdd: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      for (size_t i = 0; i < g.size(); ++i) {
        g0.grad.data[i] += g.data[i];
        g1.grad.data[i] += g.data[i];
      }
      break;
    }
    case Op::kSub: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      for (size_t i = 0; i < g.size(); ++i) {
        g0.grad.data[i] += g.data[i];
        g1.grad.data[i] -= g.data[i];
      }
      break;
    }
    case Op::kMul: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      for (size_t i = 0; i < g.size(); ++i) {
        g0.grad.data[i] += g.data[i] * g1.val.data[i];
        g1.grad.data[i] += g.data[i] * g0.val.data[i];
      }
      break;
    }
    case Op::kScale:
      for (size_t i = 0; i < g.size(); ++i) g0.grad.data[i] += g.data[i] * n.aux_a;
      break;
    case Op::kAddConst:
      for (size_t i = 0; i < g.size(); ++i) g0.grad.data[i] += g.data[i];
      break;
    case Op::kAffine: {
      auto& gx = nodes_[static_cast<size_t>(n.in1)];
      auto& gu = nodes_[static_cast<size_t>(n.in2)];
      auto& gh = nodes_[static_cast<size_t>(n.in3)];
      const Tensor& W = g0.val;
      const Tensor& X = gx.val;
      const Tensor& U = gu.val;
      const Tensor& H = gh.val;
      const bool need_dw = !g0.no_grad;
      const bool need_dx = !gx.no_grad;
      const bool need_du = !gu.no_grad;
      const bool need_dh = !gh.no_grad;
      for (int r = 0; r < W.rows(); ++r) {
        const double gr = g.data[static_cast<size_t>(r)];
        if (gr == 0.0) continue;
        if (need_dw) {
          for (int c = 0; c < W.cols(); ++c) {
            const double xc = X.at(c);
            if (xc != 0.0) g0.grad.at(r, c) += gr * xc;
          }
        }
        if (need_dx) {
          for (int c = 0; c < W.cols(); ++c) gx.grad.at(c) += gr * W.at(r, c);
        }
        if (need_du) {
          for (int c = 0; c < U.cols(); ++c) {
            const double hc = H.at(c);
            if (hc != 0.0) gu.grad.at(r, c) += gr * hc;
          }
        }
        if (need_dh) {
          for (int c = 0; c < U.cols(); ++c) gh.grad.at(c) += gr * U.at(r, c);
        }
      }
      break;
    }
    case Op::kMatVec: {
      auto& gx = nodes_[static_cast<size_t>(n.in1)];
      const Tensor& W = g0.val;
      const Tensor& X = gx.val;
      const bool need_dw = !g0.no_grad;
      const bool need_dx = !gx.no_grad;
      for (int r = 0; r < W.rows(); ++r) {
        const double gr = g.data[static_cast<size_t>(r)];
        if (gr == 0.0) continue;
        if (need_dw) {
          for (int c = 0; c < W.cols(); ++c) {
            const double xc = X.at(c);
            if (xc != 0.0) g0.grad.at(r, c) += gr * xc;
          }
        }
        if (need_dx) {
          for (int c = 0; c < W.cols(); ++c) gx.grad.at(c) += gr * W.at(r, c);
        }
      }
      break;
    }
    case Op::kDot: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      const double gs = g.data[0];
      for (size_t i = 0; i < g0.val.size(); ++i) {
        g0.grad.data[i] += gs * g1.val.data[i];
        g1.grad.data[i] += gs * g0.val.data[i];
      }
      break;
    }
    case Op::kConcat: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      const size_t n0 = g0.val.size();
      for (size_t i = 0; i < n0; ++i) g0.grad.data[i] += g.data[i];
      for (size_t i = 0; i < g1.val.size(); ++i) g1.grad.data[i] += g.data[n0 + i];
      break;
    }
    case Op::kGather:
      g0.grad.data[static_cast<size_t>(n.aux_i)] += g.data[0];
      break;
    case Op::kSum:
      for (size_t i = 0; i < g0.val.size(); ++i) g0.grad.data[i] += g.data[0];
      break;
    case Op::kTanh:
      for (size_t i = 0; i < g.size(); ++i) {
        const double y = n.val.data[i];
        g0.grad.data[i] += g.data[i] * (1.0 - y * y);
      }
      break;
    case Op::kSigmoid:
      for (size_t i = 0; i < g.size(); ++i) {
        const double y = n.val.data[i];
        g0.grad.data[i] += g.data[i] * y * (1.0 - y);
      }
      break;
    case Op::kRelu:
      for (size_t i = 0; i < g.size(); ++i) {
        if (g0.val.data[i] > 0.0) g0.grad.data[i] += g.data[i];
      }
      break;
    case Op::kExp:
      for (size_t i = 0; i < g.size(); ++i)
        g0.grad.data[i] += g.data[i] * n.val.data[i];
      break;
    case Op::kLog:
      for (size_t i = 0; i < g.size(); ++i)
        g0.grad.data[i] += g.data[i] / g0.val.data[i];
      break;
    case Op::kNeg:
      for (size_t i = 0; i < g.size(); ++i) g0.grad.data[i] -= g.data[i];
      break;
    case Op::kSquare:
      for (size_t i = 0; i < g.size(); ++i)
        g0.grad.data[i] += g.data[i] * 2.0 * g0.val.data[i];
      break;
    case Op::kMin2: {
      auto& g1 = nodes_[static_cast<size_t>(n.in1)];
      if (g0.val.data[0] <= g1.val.data[0]) {
        g0.grad.data[0] += g.data[0];
      } else {
        g1.grad.data[0] += g.data[0];
      }
      break;
    }
    case Op::kClip:
      for (size_t i = 0; i < g.size(); ++i) {
        const double x = g0.val.data[i];
        if (x > n.aux_a && x < n.aux_b) g0.grad.data[i] += g.data[i];
      }
      break;
    case Op::kMaskedSoftmax: {
      double dot_gp = 0.0;
      for (size_t i = 0; i < g.size(); ++i) {
        if (n.mask[i]) dot_gp += g.data[i] * n.val.data[i];
      }
      for (size_t i = 0; i < g.size(); ++i) {
        if (n.mask[i])
          g0.grad.data[i] += n.val.data[i] * (g.data[i] - dot_gp);
      }
      break;
    }
    case Op::kEntropy: {
      const double gs = g.data[0];
      for (size_t i = 0; i < g0.val.size(); ++i) {
        const double p = g0.val.data[i];
        if (p > 0.0) g0.grad.data[i] += gs * (-(std::log(p) + 1.0));
      }
      break;
    }
    case Op::kL2Norm: {
      const double norm = n.aux_a;
      if (norm <= 1e-12) {
        for (size_t i = 0; i < g.size(); ++i) g0.grad.data[i] += g.data[i];
        break;
      }
      double yg = 0.0;
      for (size_t i = 0; i < g.size(); ++i) yg += n.val.data[i] * g.data[i];
      for (size_t i = 0; i < g.size(); ++i) {
        g0.grad.data[i] += (g.data[i] - n.val.data[i] * yg) / norm;
      }
      break;
    }
    case Op::kInput:
      break;
  }
}

}  // namespace winne
