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

#include "winne/grad_check.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "winne/nn.hpp"

namespace winne {

namespace {

constexpr double kStep = 1e-5;
constexpr double kBar = 1e-4;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

void randomize(std::vector<Tensor*>& params, RngStream& rng, double scale) {
  for (Tensor* p : params) {
    for (double& v : p->data) v = rng.uniform_real(-scale, scale);
  }
}

}  // namespace

double finite_difference_max_err(const std::function<Graph::NodeId(Tape&)>& build,
                                 const std::vector<Tensor*>& params) {
  Tape tape;
  Graph::NodeId loss = build(tape);
  tape.g.backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Tensor* p : params) analytic.push_back(tape.grad_of(*p));

  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    for (size_t k = 0; k < p.size(); ++k) {
      const double saved = p.data[k];
      p.data[k] = saved + kStep;
      Tape plus;
      const double f_plus = plus.g.scalar(build(plus));
      p.data[k] = saved - kStep;
      Tape minus;
      const double f_minus = minus.g.scalar(build(minus));
      p.data[k] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * kStep);
      worst = std::max(worst, rel_err(analytic[i].data[k], numeric));
    }
  }
  return worst;
}

std::vector<GradCheckResult> run_grad_checks(uint64_t seed, int cases) {
  std::vector<GradCheckResult> results;
  RngStream rng(seed);

  auto run = [&](const std::string& name, std::vector<Tensor*> params,
                 const std::function<Graph::NodeId(Tape&)>& build,
                 const std::function<void(RngStream&)>& reroll) {
    GradCheckResult r;
    r.name = name;
    r.cases = cases;
    for (int c = 0; c < cases; ++c) {
      reroll(rng);
      randomize(params, rng, 0.8);
      r.max_rel_err = std::max(r.max_rel_err, finite_difference_max_err(build, params));
    }
    r.pass = r.max_rel_err < kBar;
    results.push_back(r);
  };

  // Dense layer under each activation, loss = sum of outputs squared.
  for (Activation act :
       {Activation::kTanh, Activation::kRelu, Activation::kSigmoid, Activation::kIdentity}) {
    auto layer = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    RngStream init(seed);
    *layer = DenseLayer::init(5, 4, act, init);
    std::vector<Tensor*> params = {&layer->W, &layer->b};
    run(std::string("dense_") + activation_name(act), params,
        [layer, x](Tape& t) {
          Graph::NodeId in = t.g.input(*x);
          return t.g.sum(t.g.square(layer->forward(t, in)));
        },
        [x](RngStream& r) {
          *x = Tensor::zeros({4});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
        });
  }

  // Two-layer tanh MLP, scalar head.
  {
    auto l1 = std::make_shared<DenseLayer>();
    auto l2 = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    RngStream init(seed + 1);
    *l1 = DenseLayer::init(6, 4, Activation::kTanh, init);
    *l2 = DenseLayer::init(1, 6, Activation::kIdentity, init);
    std::vector<Tensor*> params = {&l1->W, &l1->b, &l2->W, &l2->b};
    run("mlp_tanh_2layer", params,
        [l1, l2, x](Tape& t) {
          Graph::NodeId h = l1->forward(t, t.g.input(*x));
          return t.g.sum(l2->forward(t, h));
        },
        [x](RngStream& r) {
          *x = Tensor::zeros({4});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
        });
  }

  // GRU cell over a 3-step sequence, loss = sum of final hidden state.
  {
    auto cell = std::make_shared<GruCell>();
    auto xs = std::make_shared<std::vector<Tensor>>();
    RngStream init(seed + 2);
    *cell = GruCell::init(5, 3, init);
    std::vector<Tensor*> params;
    cell->collect(params);
    run("gru_sequence", params,
        [cell, xs](Tape& t) {
          Graph::NodeId h = t.g.input(Tensor::zeros({5}));
          for (const Tensor& x : *xs) h = cell->step(t, t.g.input(x), h);
          return t.g.sum(h);
        },
        [xs](RngStream& r) {
          xs->clear();
          for (int s = 0; s < 3; ++s) {
            Tensor x = Tensor::zeros({3});
            for (double& v : x.data) v = r.uniform_real(-1.0, 1.0);
            xs->push_back(std::move(x));
          }
        });
  }

  // Masked softmax + log-likelihood of one legal action.
  {
    auto layer = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    auto mask = std::make_shared<std::vector<uint8_t>>();
    auto target = std::make_shared<int>(0);
    RngStream init(seed + 3);
    *layer = DenseLayer::init(6, 4, Activation::kIdentity, init);
    std::vector<Tensor*> params = {&layer->W, &layer->b};
    run("masked_softmax_xent", params,
        [layer, x, mask, target](Tape& t) {
          Graph::NodeId logits = layer->forward(t, t.g.input(*x));
          Graph::NodeId probs = t.g.masked_softmax(logits, *mask);
          return t.g.neg(t.g.log(t.g.gather(probs, *target)));
        },
        [x, mask, target](RngStream& r) {
          *x = Tensor::zeros({4});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
          mask->assign(6, 0);
          int legal = 2 + r.uniform_int(0, 3);
          std::vector<int> idx = {0, 1, 2, 3, 4, 5};
          r.shuffle(idx);
          for (int i = 0; i < legal; ++i) (*mask)[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 1;
          *target = idx[0];
        });
  }

  // Entropy of a masked distribution.
  {
    auto layer = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    auto mask = std::make_shared<std::vector<uint8_t>>();
    RngStream init(seed + 4);
    *layer = DenseLayer::init(5, 3, Activation::kIdentity, init);
    std::vector<Tensor*> params = {&layer->W, &layer->b};
    run("masked_entropy", params,
        [layer, x, mask](Tape& t) {
          Graph::NodeId probs = t.g.masked_softmax(layer->forward(t, t.g.input(*x)), *mask);
          return t.g.entropy(probs);
        },
        [x, mask](RngStream& r) {
          *x = Tensor::zeros({3});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
          mask->assign(5, 1);
          (*mask)[static_cast<size_t>(r.uniform_int(0, 4))] = 0;
        });
  }

  // Supervised contrastive loss over normalized dense embeddings.
  {
    auto enc = std::make_shared<DenseLayer>();
    auto xs = std::make_shared<std::vector<Tensor>>();
    auto labels = std::make_shared<std::vector<int>>();
    auto temp = std::make_shared<double>(1.0);
    RngStream init(seed + 5);
    *enc = DenseLayer::init(6, 4, Activation::kTanh, init);
    std::vector<Tensor*> params = {&enc->W, &enc->b};
    run("contrastive_loss", params,
        [enc, xs, labels, temp](Tape& t) {
          std::vector<Graph::NodeId> z;
          for (const Tensor& x : *xs)
            z.push_back(t.g.l2_normalize(enc->forward(t, t.g.input(x))));
          return contrastive_loss_node(t, z, *labels, *temp);
        },
        [xs, labels, temp](RngStream& r) {
          xs->clear();
          labels->clear();
          for (int i = 0; i < 6; ++i) {
            Tensor x = Tensor::zeros({4});
            for (double& v : x.data) v = r.uniform_real(-1.0, 1.0);
            xs->push_back(std::move(x));
            labels->push_back(i < 3 ? 0 : 1);
          }
          *temp = r.uniform_real(0.5, 2.0);
        });
  }

  // PPO surrogate with value and entropy heads.
  {
    auto actor = std::make_shared<DenseLayer>();
    auto critic = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    auto mask = std::make_shared<std::vector<uint8_t>>();
    auto fixed = std::make_shared<std::vector<double>>();  // old_lp, adv, ret
    auto action = std::make_shared<int>(0);
    RngStream init(seed + 6);
    *actor = DenseLayer::init(4, 3, Activation::kIdentity, init);
    *critic = DenseLayer::init(1, 3, Activation::kIdentity, init);
    std::vector<Tensor*> params = {&actor->W, &actor->b, &critic->W, &critic->b};
    run("ppo_loss", params,
        [actor, critic, x, mask, fixed, action](Tape& t) {
          Graph::NodeId in = t.g.input(*x);
          Graph::NodeId probs = t.g.masked_softmax(actor->forward(t, in), *mask);
          Graph::NodeId lp = t.g.log(t.g.gather(probs, *action));
          Graph::NodeId v = t.g.gather(critic->forward(t, in), 0);
          Graph::NodeId h = t.g.entropy(probs);
          return ppo_sample_loss(t, (*fixed)[0], lp, (*fixed)[1], v, (*fixed)[2], 0.2,
                                 0.5, 0.01, h)
              .loss;
        },
        [x, mask, fixed, action](RngStream& r) {
          *x = Tensor::zeros({3});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
          mask->assign(4, 1);
          *action = r.uniform_int(0, 3);
          *fixed = {r.uniform_real(-2.0, -0.5), r.uniform_real(-1.5, 1.5),
                    r.uniform_real(-1.0, 1.0)};
        });
  }

  // TD loss with a double-Q target held fixed.
  {
    auto q = std::make_shared<DenseLayer>();
    auto x = std::make_shared<Tensor>();
    auto target = std::make_shared<double>(0.0);
    auto action = std::make_shared<int>(0);
    RngStream init(seed + 7);
    *q = DenseLayer::init(4, 3, Activation::kIdentity, init);
    std::vector<Tensor*> params = {&q->W, &q->b};
    run("dql_td_loss", params,
        [q, x, target, action](Tape& t) {
          Graph::NodeId qs = q->forward(t, t.g.input(*x));
          return t.g.square(t.g.add_const(t.g.neg(t.g.gather(qs, *action)), *target));
        },
        [x, target, action](RngStream& r) {
          *x = Tensor::zeros({3});
          for (double& v : x->data) v = r.uniform_real(-1.0, 1.0);
          std::vector<double> online(4), tgt(4);
          for (double& v : online) v = r.uniform_real(-1.0, 1.0);
          for (double& v : tgt) v = r.uniform_real(-1.0, 1.0);
          *target = double_q_target(r.uniform_real(-1.0, 1.0), false, 0.95, online, tgt);
          *action = r.uniform_int(0, 3);
        });
  }

  return results;
}

std::string grad_check_report(const std::vector<GradCheckResult>& results) {
  std::ostringstream os;
  for (const GradCheckResult& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  cases=" << r.cases
       << "  max_rel_err=" << r.max_rel_err << "\n";
  }
  return os.str();
}

}  // namespace winne
