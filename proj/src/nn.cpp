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

#include "winne/nn.hpp"

#include <algorithm>
#include <cmath>

#include "winne/error.hpp"

namespace winne {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  fail(ErrorKind::kConfig, "unknown activation: " + name);
}

DenseLayer DenseLayer::init(int out, int in, Activation act, RngStream& rng) {
  DenseLayer l;
  l.W = Tensor::uniform_fan_in({out, in}, in, rng);
  l.b = Tensor::zeros({out});
  l.act = act;
  return l;
}

Graph::NodeId DenseLayer::forward(Tape& t, Graph::NodeId x) const {
  Graph::NodeId y = t.g.add(t.g.matvec(t.bind(W), x), t.bind(b));
  switch (act) {
    case Activation::kTanh: return t.g.tanh(y);
    case Activation::kRelu: return t.g.relu(y);
    case Activation::kSigmoid: return t.g.sigmoid(y);
    case Activation::kIdentity: return y;
  }
  return y;
}

void DenseLayer::collect(std::vector<Tensor*>& out) {
  out.push_back(&W);
  out.push_back(&b);
}

void DenseLayer::collect_named(const std::string& prefix,
                               std::vector<std::pair<std::string, Tensor*>>& out) {
  out.emplace_back(prefix + ".W", &W);
  out.emplace_back(prefix + ".b", &b);
}

GruCell GruCell::init(int hidden, int in, RngStream& rng) {
  GruCell c;
  c.Wz = Tensor::uniform_fan_in({hidden, in}, in, rng);
  c.Wr = Tensor::uniform_fan_in({hidden, in}, in, rng);
  c.Wh = Tensor::uniform_fan_in({hidden, in}, in, rng);
  c.Uz = Tensor::uniform_fan_in({hidden, hidden}, hidden, rng);
  c.Ur = Tensor::uniform_fan_in({hidden, hidden}, hidden, rng);
  c.Uh = Tensor::uniform_fan_in({hidden, hidden}, hidden, rng);
  c.bz = Tensor::zeros({hidden});
  c.br = Tensor::zeros({hidden});
  c.bh = Tensor::zeros({hidden});
  return c;
}

Graph::NodeId GruCell::step(Tape& t, Graph::NodeId x, Graph::NodeId h) const {
  require(t.g.value(x).rows() == in_size() && t.g.value(h).rows() == hidden_size(),
          ErrorKind::kContract, "gru_step: dimension mismatch");
  Graph& g = t.g;
  Graph::NodeId z =
      g.sigmoid(g.add(g.affine(t.bind(Wz), x, t.bind(Uz), h), t.bind(bz)));
  Graph::NodeId r =
      g.sigmoid(g.add(g.affine(t.bind(Wr), x, t.bind(Ur), h), t.bind(br)));
  Graph::NodeId hc = g.tanh(
      g.add(g.affine(t.bind(Wh), x, t.bind(Uh), g.mul(r, h)), t.bind(bh)));
  // h' = (1 - z) * h + z * hc
  Graph::NodeId one_minus_z = g.add_const(g.neg(z), 1.0);
  return g.add(g.mul(one_minus_z, h), g.mul(z, hc));
}

void GruCell::collect(std::vector<Tensor*>& out) {
  for (Tensor* t : {&Wz, &Wr, &Wh, &Uz, &Ur, &Uh, &bz, &br, &bh}) out.push_back(t);
}

void GruCell::collect_named(const std::string& prefix,
                            std::vector<std::pair<std::string, Tensor*>>& out) {
  const char* names[] = {"Wz", "Wr", "Wh", "Uz", "Ur", "Uh", "bz", "br", "bh"};
  Tensor* ts[] = {&Wz, &Wr, &Wh, &Uz, &Ur, &Uh, &bz, &br, &bh};
  for (int i = 0; i < 9; ++i) out.emplace_back(prefix + "." + names[i], ts[i]);
}

Adam::Adam(AdamConfig cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor* p : params) {
    m_.push_back(Tensor::zeros(p->shape));
    v_.push_back(Tensor::zeros(p->shape));
  }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
  require(params.size() == m_.size() && grads.size() == m_.size(),
          ErrorKind::kContract, "adam_step: parameter list changed");
  for (const Tensor& g : grads) {
    for (double v : g.data) {
      require(std::isfinite(v), ErrorKind::kNumeric, "adam_step: NaN gradient");
    }
  }
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    for (size_t k = 0; k < p.size(); ++k) {
      m_[i].data[k] = cfg_.beta1 * m_[i].data[k] + (1.0 - cfg_.beta1) * g.data[k];
      v_[i].data[k] =
          cfg_.beta2 * v_[i].data[k] + (1.0 - cfg_.beta2) * g.data[k] * g.data[k];
      const double mhat = m_[i].data[k] / bc1;
      const double vhat = v_[i].data[k] / bc2;
      p.data[k] -= cfg_.alpha * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const uint8_t> mask) {
  require(logits.size() == mask.size(), ErrorKind::kContract,
          "masked_softmax: mask length mismatch");
  bool any = false;
  double mx = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!any || logits[i] > mx) mx = logits[i];
    any = true;
  }
  require(any, ErrorKind::kEmptySupport, "masked_softmax: no legal entry");
  std::vector<double> out(logits.size(), 0.0);
  double denom = 0.0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(logits[i] - mx);
    denom += out[i];
  }
  for (size_t i = 0; i < mask.size(); ++i) out[i] /= denom;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) out[i] = 0.0;
  }
  return out;
}

double contrastive_pair(std::span<const double> zi, std::span<const double> zj,
                        double t) {
  require(zi.size() == zj.size(), ErrorKind::kContract,
          "contrastive_pair: dimension mismatch");
  require(t > 0.0, ErrorKind::kContract, "contrastive_pair: temperature must be > 0");
  double d = 0.0;
  for (size_t k = 0; k < zi.size(); ++k) d += zi[k] * zj[k];
  return std::exp(d / t);
}

double contrastive_anchor_term(const std::vector<std::vector<double>>& z,
                               const std::vector<int>& labels, int anchor,
                               double t) {
  const size_t n = z.size();
  require(n >= 2 && labels.size() == n, ErrorKind::kContract,
          "contrastive_anchor_term: need >= 2 labeled embeddings");
  double denom = 0.0;
  for (size_t a = 0; a < n; ++a) {
    if (static_cast<int>(a) == anchor) continue;
    denom += contrastive_pair(z[static_cast<size_t>(anchor)], z[a], t);
  }
  double term = 0.0;
  int positives = 0;
  for (size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) == anchor || labels[j] != labels[static_cast<size_t>(anchor)])
      continue;
    ++positives;
    term -= std::log(contrastive_pair(z[static_cast<size_t>(anchor)], z[j], t) / denom);
  }
  require(positives > 0, ErrorKind::kInvalidBatch,
          "contrastive loss: anchor " + std::to_string(anchor) + " has no positive");
  return term / positives;
}

Graph::NodeId contrastive_loss_node(Tape& t,
                                    const std::vector<Graph::NodeId>& embeddings,
                                    const std::vector<int>& labels, double temp) {
  const int n = static_cast<int>(embeddings.size());
  require(n >= 2 && static_cast<int>(labels.size()) == n, ErrorKind::kContract,
          "contrastive_loss: need >= 2 labeled embeddings");
  require(temp > 0.0, ErrorKind::kContract, "contrastive_loss: temperature must be > 0");
  Graph& g = t.g;

  // Scaled dot products d[i][j] = <z_i, z_j> / t, shared across anchors.
  std::vector<std::vector<Graph::NodeId>> d(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)].resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Graph::NodeId s =
          g.scale(g.dot(embeddings[static_cast<size_t>(i)], embeddings[static_cast<size_t>(j)]),
                  1.0 / temp);
      d[static_cast<size_t>(i)][static_cast<size_t>(j)] = s;
      d[static_cast<size_t>(j)][static_cast<size_t>(i)] = s;
    }
  }

  Graph::NodeId total = g.input(Tensor::scalar(0.0));
  for (int i = 0; i < n; ++i) {
    int positives = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i && labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(i)])
        ++positives;
    }
    require(positives > 0, ErrorKind::kInvalidBatch,
            "contrastive loss: anchor " + std::to_string(i) + " has no positive");

    // log-sum-exp over all non-anchor similarities, max-stabilized.
    double mx = -1e300;
    for (int a = 0; a < n; ++a) {
      if (a == i) continue;
      mx = std::max(mx, g.scalar(d[static_cast<size_t>(i)][static_cast<size_t>(a)]));
    }
    Graph::NodeId acc = g.input(Tensor::scalar(0.0));
    for (int a = 0; a < n; ++a) {
      if (a == i) continue;
      acc = g.add(acc,
                  g.exp(g.add_const(d[static_cast<size_t>(i)][static_cast<size_t>(a)], -mx)));
    }
    Graph::NodeId lse = g.add_const(g.log(acc), mx);

    Graph::NodeId anchor_sum = g.input(Tensor::scalar(0.0));
    for (int j = 0; j < n; ++j) {
      if (j == i || labels[static_cast<size_t>(j)] != labels[static_cast<size_t>(i)])
        continue;
      anchor_sum =
          g.add(anchor_sum, g.sub(d[static_cast<size_t>(i)][static_cast<size_t>(j)], lse));
    }
    total = g.add(total, g.scale(g.neg(anchor_sum), 1.0 / positives));
  }
  return total;
}

PpoTerms ppo_sample_loss(Tape& t, double old_logprob, Graph::NodeId new_logprob,
                         double advantage, Graph::NodeId value,
                         double return_target, double clip_eps, double c_value,
                         double c_entropy, Graph::NodeId entropy) {
  require(clip_eps > 0.0 && clip_eps < 1.0, ErrorKind::kContract,
          "ppo_loss: clip_eps must lie in (0,1)");
  require(c_value >= 0.0 && c_entropy >= 0.0, ErrorKind::kContract,
          "ppo_loss: coefficients must be >= 0");
  Graph& g = t.g;
  Graph::NodeId ratio = g.exp(g.add_const(new_logprob, -old_logprob));
  Graph::NodeId surr1 = g.scale(ratio, advantage);
  Graph::NodeId surr2 = g.scale(g.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps), advantage);
  Graph::NodeId policy = g.neg(g.min2(surr1, surr2));
  Graph::NodeId verr = g.scale(g.square(g.add_const(g.neg(value), return_target)), c_value);
  Graph::NodeId ent = g.scale(entropy, c_entropy);
  PpoTerms terms;
  terms.loss = g.sub(g.add(policy, verr), ent);
  terms.policy = g.scalar(policy);
  terms.value = g.scalar(verr);
  terms.entropy = g.scalar(entropy);
  return terms;
}

double double_q_target(double reward, bool done, double gamma,
                       std::span<const double> q_online_next,
                       std::span<const double> q_target_next) {
  require(q_online_next.size() == q_target_next.size(), ErrorKind::kContract,
          "double_q_target: vector length mismatch");
  if (done) return reward;
  size_t best = 0;
  for (size_t i = 1; i < q_online_next.size(); ++i) {
    if (q_online_next[i] > q_online_next[best]) best = i;
  }
  return reward + gamma * q_target_next[best];
}

}  // namespace winne
