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

#ifndef WINNE_NN_HPP_
#define WINNE_NN_HPP_

#include <span>
#include <string>
#include <vector>

#include "winne/graph.hpp"
#include "winne/rng.hpp"
#include "winne/tensor.hpp"

namespace winne {

enum class Activation { kTanh, kRelu, kSigmoid, kIdentity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Fully connected layer y = act(W x + b).
struct DenseLayer {
  Tensor W;  // [out x in]
  Tensor b;  // [out]
  Activation act = Activation::kIdentity;

  static DenseLayer init(int out, int in, Activation act, RngStream& rng);

  Graph::NodeId forward(Tape& t, Graph::NodeId x) const;
  void collect(std::vector<Tensor*>& out);
  void collect_named(const std::string& prefix,
                     std::vector<std::pair<std::string, Tensor*>>& out);
  int in_size() const { return W.cols(); }
  int out_size() const { return W.rows(); }
};

// Gated recurrent unit with the update-gate convention
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   hc = tanh(Wh x + Uh (r*h) + bh)
//   h' = (1 - z)*h + z*hc
struct GruCell {
  Tensor Wz, Wr, Wh;  // [hidden x in]
  Tensor Uz, Ur, Uh;  // [hidden x hidden]
  Tensor bz, br, bh;  // [hidden]

  static GruCell init(int hidden, int in, RngStream& rng);

  Graph::NodeId step(Tape& t, Graph::NodeId x, Graph::NodeId h) const;
  void collect(std::vector<Tensor*>& out);
  void collect_named(const std::string& prefix,
                     std::vector<std::pair<std::string, Tensor*>>& out);
  int hidden_size() const { return Wz.rows(); }
  int in_size() const { return Wz.cols(); }
};

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, const std::vector<Tensor*>& params);

  // One update. grads[i] pairs with the params[i] given at construction.
  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

  int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }
  std::vector<Tensor>& moments_m() { return m_; }
  std::vector<Tensor>& moments_v() { return v_; }
  void set_step_count(int64_t c) { step_count_ = c; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  int64_t step_count_ = 0;
};

// ---- Loss building blocks ----

/// Numerically stabilized masked softmax over raw values (no gradients).
std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const uint8_t> mask);

/// exp(dot(zi, zj) / t), the pairwise similarity factor of the contrastive
/// loss.
double contrastive_pair(std::span<const double> zi, std::span<const double> zj,
                        double t);

/// One anchor's contribution to the supervised contrastive loss:
///   -(1/|P(i)|) * sum_{j in P(i)} log(c_ij / sum_{a != i} c_ia).
/// Throws kInvalidBatch when the anchor has no positive.
double contrastive_anchor_term(const std::vector<std::vector<double>>& z,
                               const std::vector<int>& labels, int anchor,
                               double t);

/// Supervised contrastive loss over embedding nodes, summed over anchors.
/// Every anchor needs at least one same-label other element.
Graph::NodeId contrastive_loss_node(Tape& t,
                                    const std::vector<Graph::NodeId>& embeddings,
                                    const std::vector<int>& labels, double temp);

struct PpoTerms {
  Graph::NodeId loss;       // full loss node
  double policy = 0.0;      // -min(ratio*A, clip(ratio)*A)
  double value = 0.0;       // c_v * (R - V)^2
  double entropy = 0.0;     // raw entropy H
};

/// Clipped-surrogate PPO loss for one sample:
///   -min(r*A, clip(r, 1-eps, 1+eps)*A) + c_v (R - V)^2 - c_e H,
/// r = exp(new_logprob - old_logprob).
PpoTerms ppo_sample_loss(Tape& t, double old_logprob, Graph::NodeId new_logprob,
                         double advantage, Graph::NodeId value,
                         double return_target, double clip_eps, double c_value,
                         double c_entropy, Graph::NodeId entropy);

/// Double-Q target: done ? r : r + gamma * q_target_next[argmax(q_online_next)].
double double_q_target(double reward, bool done, double gamma,
                       std::span<const double> q_online_next,
                       std::span<const double> q_target_next);

}  // namespace winne

#endif  // WINNE_NN_HPP_
