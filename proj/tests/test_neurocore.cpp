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

#include <doctest.h>

#include <bit>
#include <cmath>
#include <thread>

#include "winne/checkpoint.hpp"
#include "winne/grad_check.hpp"
#include "winne/graph.hpp"
#include "winne/nn.hpp"

using namespace winne;

namespace {

// Naive double-loop oracle for the pinned contrastive form, kept independent
// of the graph implementation.
double contrastive_oracle(const std::vector<std::vector<double>>& z,
                          const std::vector<int>& labels, double t) {
  const int n = static_cast<int>(z.size());
  auto pair = [&](int i, int j) {
    double d = 0.0;
    for (size_t k = 0; k < z[static_cast<size_t>(i)].size(); ++k)
      d += z[static_cast<size_t>(i)][k] * z[static_cast<size_t>(j)][k];
    return std::exp(d / t);
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double denom = 0.0;
    for (int a = 0; a < n; ++a) {
      if (a != i) denom += pair(i, a);
    }
    double acc = 0.0;
    int positives = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i || labels[static_cast<size_t>(j)] != labels[static_cast<size_t>(i)]) continue;
      acc += std::log(pair(i, j) / denom);
      ++positives;
    }
    total += -acc / positives;
  }
  return total;
}

double graph_contrastive(const std::vector<std::vector<double>>& z,
                         const std::vector<int>& labels, double t) {
  Tape tape;
  std::vector<Graph::NodeId> ids;
  for (const auto& v : z) ids.push_back(tape.g.input(Tensor::vector(v)));
  return tape.g.scalar(contrastive_loss_node(tape, ids, labels, t));
}

}  // namespace

TEST_CASE("gradient suite passes for every layer and loss") {
  auto results = run_grad_checks(1234, 50);
  CHECK(results.size() >= 10);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CHECK(r.pass);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("forward_backward polynomial and linear fixtures") {
  SUBCASE("d(x^2)/dx at 3 is 6") {
    Graph g;
    auto x = g.input(Tensor::scalar(3.0));
    auto loss = g.square(x);
    g.backward(loss);
    CHECK(g.grad(x).data[0] == doctest::Approx(6.0));
  }
  SUBCASE("d(sum(Wx))/dW_ij = x_j") {
    Graph g;
    Tensor W = Tensor::zeros({2, 3});
    W.data = {1, 2, 3, 4, 5, 6};
    Tensor x = Tensor::vector({0.5, -1.0, 2.0});
    auto wn = g.input(W);
    auto xn = g.input(x);
    auto loss = g.sum(g.matvec(wn, xn));
    g.backward(loss);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) {
        CHECK(g.grad(wn).at(r, c) == doctest::Approx(x.at(c)));
      }
    }
  }
  SUBCASE("gradients of unused nodes stay zero") {
    Graph g;
    auto x = g.input(Tensor::scalar(2.0));
    auto unused = g.input(Tensor::scalar(5.0));
    auto loss = g.square(x);
    g.backward(loss);
    CHECK(g.grad(unused).data[0] == 0.0);
  }
  SUBCASE("non-scalar loss rejected") {
    Graph g;
    auto x = g.input(Tensor::vector({1.0, 2.0}));
    CHECK_THROWS_AS(g.backward(x), Error);
  }
  SUBCASE("NaN names the offending node") {
    Graph g;
    auto x = g.input(Tensor::scalar(-1.0));
    try {
      g.log(x);
      FAIL("expected numeric failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumeric);
      CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
  }
}

TEST_CASE("gru_step matches the pinned gate convention") {
  RngStream rng(1);
  GruCell cell = GruCell::init(4, 3, rng);
  // Zero every parameter.
  std::vector<Tensor*> params;
  cell.collect(params);
  for (Tensor* p : params) std::fill(p->data.begin(), p->data.end(), 0.0);

  SUBCASE("zero parameters, zero state") {
    Tape t;
    auto h = cell.step(t, t.g.input(Tensor::zeros({3})), t.g.input(Tensor::zeros({4})));
    for (double v : t.g.value(h).data) CHECK(v == 0.0);
  }
  SUBCASE("zero parameters halve the carried state") {
    Tape t;
    Tensor v = Tensor::vector({1.0, -2.0, 0.5, 4.0});
    auto h = cell.step(t, t.g.input(Tensor::zeros({3})), t.g.input(v));
    for (int i = 0; i < 4; ++i)
      CHECK(t.g.value(h).at(i) == doctest::Approx(0.5 * v.at(i)));
  }
  SUBCASE("dimension mismatch rejected") {
    Tape t;
    CHECK_THROWS_AS(
        cell.step(t, t.g.input(Tensor::zeros({5})), t.g.input(Tensor::zeros({4}))),
        Error);
  }
}

TEST_CASE("masked_softmax fixtures") {
  SUBCASE("uniform over equal logits") {
    auto p = masked_softmax(std::vector<double>{0, 0, 0}, std::vector<uint8_t>{1, 1, 1});
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
  }
  SUBCASE("masked index gets exactly zero") {
    auto p = masked_softmax(std::vector<double>{5, 5, 5}, std::vector<uint8_t>{1, 1, 0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == 0.0);
  }
  SUBCASE("two-logit direct evaluation") {
    auto p = masked_softmax(std::vector<double>{1, 0}, std::vector<uint8_t>{1, 1});
    CHECK(p[0] == doctest::Approx(0.73106).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.26894).epsilon(1e-4));
  }
  SUBCASE("empty support rejected") {
    try {
      masked_softmax(std::vector<double>{1, 2}, std::vector<uint8_t>{0, 0});
      FAIL("expected empty-support error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kEmptySupport);
    }
  }
  SUBCASE("sums to one within 1e-12 over random draws") {
    RngStream rng(9);
    for (int c = 0; c < 200; ++c) {
      int n = rng.uniform_int(2, 12);
      std::vector<double> logits(static_cast<size_t>(n));
      std::vector<uint8_t> mask(static_cast<size_t>(n), 0);
      for (double& v : logits) v = rng.uniform_real(-30, 30);
      int legal = rng.uniform_int(1, n);
      for (int i = 0; i < legal; ++i) mask[static_cast<size_t>(i)] = 1;
      rng.shuffle(mask);
      auto p = masked_softmax(logits, mask);
      double sum = 0.0;
      for (size_t i = 0; i < p.size(); ++i) {
        if (!mask[i]) CHECK(p[i] == 0.0);
        sum += p[i];
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("contrastive_pair fixtures") {
  std::vector<double> a = {1.0, 0.0};
  std::vector<double> b = {0.0, 1.0};
  CHECK(contrastive_pair(a, b, 0.7) == doctest::Approx(1.0));  // dot 0
  CHECK(contrastive_pair(a, a, 1.0) == doctest::Approx(2.71828).epsilon(1e-5));
  CHECK(contrastive_pair(a, a, 0.5) == doctest::Approx(7.38906).epsilon(1e-5));
}

TEST_CASE("contrastive loss hand fixtures") {
  SUBCASE("identical embeddings, anchor term is ln 2") {
    std::vector<std::vector<double>> z = {{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}};
    std::vector<int> labels = {0, 0, 1};
    CHECK(contrastive_anchor_term(z, labels, 0, 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(contrastive_anchor_term(z, labels, 1, 1.0) ==
          doctest::Approx(0.69315).epsilon(1e-4));
  }
  SUBCASE("orthogonal negative fixture: -log(e/(e+1))") {
    std::vector<std::vector<double>> z = {{1, 0}, {1, 0}, {0, 1}};
    std::vector<int> labels = {0, 0, 1};
    CHECK(contrastive_anchor_term(z, labels, 0, 1.0) ==
          doctest::Approx(0.31326).epsilon(1e-4));
  }
  SUBCASE("anchor without positive names the anchor") {
    Tape t;
    std::vector<Graph::NodeId> ids = {t.g.input(Tensor::vector({1, 0})),
                                      t.g.input(Tensor::vector({1, 0})),
                                      t.g.input(Tensor::vector({0, 1}))};
    try {
      contrastive_loss_node(t, ids, {0, 0, 1}, 1.0);
      FAIL("expected invalid-batch error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidBatch);
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
}

TEST_CASE("contrastive graph matches the double-loop oracle on 100 batches") {
  RngStream rng(2024);
  for (int batch = 0; batch < 100; ++batch) {
    int n = rng.uniform_int(4, 12);
    int dim = rng.uniform_int(2, 8);
    std::vector<std::vector<double>> z;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<size_t>(dim));
      for (double& x : v) x = rng.uniform_real(-1.0, 1.0);
      z.push_back(std::move(v));
      labels.push_back(i % 2);
    }
    double t = rng.uniform_real(0.2, 2.0);
    CHECK(std::abs(graph_contrastive(z, labels, t) - contrastive_oracle(z, labels, t)) <
          1e-9);
  }
}

TEST_CASE("contrastive loss is permutation invariant") {
  RngStream rng(5);
  std::vector<std::vector<double>> z;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform_real(-1.0, 1.0);
    z.push_back(std::move(v));
    labels.push_back(i % 2);
  }
  double base = graph_contrastive(z, labels, 0.7);
  std::vector<size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  std::vector<std::vector<double>> z2;
  std::vector<int> l2;
  for (size_t p : perm) {
    z2.push_back(z[p]);
    l2.push_back(labels[p]);
  }
  CHECK(graph_contrastive(z2, l2, 0.7) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("scaling separable embeddings never increases the loss") {
  RngStream rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    // Two tight clusters around opposite directions: same-label dots exceed
    // every cross-label dot.
    std::vector<std::vector<double>> z;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      double cx = i < 3 ? 1.0 : -1.0;
      z.push_back({cx + rng.uniform_real(-0.05, 0.05), rng.uniform_real(-0.05, 0.05)});
      labels.push_back(i < 3 ? 0 : 1);
    }
    double before = graph_contrastive(z, labels, 1.0);
    double c = 1.0 + rng.uniform_real(0.1, 2.0);
    for (auto& v : z) {
      for (double& x : v) x *= c;
    }
    double after = graph_contrastive(z, labels, 1.0);
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("ppo_loss policy term fixtures") {
  auto policy_term = [](double old_lp, double new_lp, double adv) {
    Tape t;
    auto lp = t.g.input(Tensor::scalar(new_lp));
    auto v = t.g.input(Tensor::scalar(0.0));
    auto h = t.g.input(Tensor::scalar(0.0));
    auto terms = ppo_sample_loss(t, old_lp, lp, adv, v, 0.0, 0.2, 0.0, 0.0, h);
    return terms.policy;
  };
  // ratio 1, A 2: unclipped, policy term -2.
  CHECK(policy_term(-1.0, -1.0, 2.0) == doctest::Approx(-2.0));
  // ratio 2, A 1: clipped to 1.2.
  CHECK(policy_term(-1.0, -1.0 + std::log(2.0), 1.0) == doctest::Approx(-1.2));
  // ratio 0.5, A -1: min(-0.5, -0.8) = -0.8, term +0.8.
  CHECK(policy_term(-1.0, -1.0 + std::log(0.5), -1.0) == doctest::Approx(0.8));
}

TEST_CASE("double_q_target fixtures") {
  std::vector<double> online = {0.1, 0.2, 0.9, 0.3};
  std::vector<double> target = {1.0, 2.0, 0.5, 3.0};
  CHECK(double_q_target(1.0, true, 0.98, online, target) == doctest::Approx(1.0));
  CHECK(double_q_target(0.0, false, 0.98, online, target) == doctest::Approx(0.49));
  CHECK(double_q_target(0.7, false, 0.0, online, target) == doctest::Approx(0.7));
  // With identical nets this is the standard Q-learning target.
  CHECK(double_q_target(0.0, false, 0.9, online, online) ==
        doctest::Approx(0.9 * 0.9));
}

TEST_CASE("adam_step fixtures") {
  SUBCASE("first update moves each coordinate by about alpha") {
    Tensor p = Tensor::vector({1.0, -2.0, 3.0});
    Tensor g = Tensor::vector({0.4, -0.01, 100.0});
    std::vector<Tensor*> params = {&p};
    Adam adam(AdamConfig{0.1, 0.9, 0.999, 1e-8}, params);
    Tensor before = p;
    adam.step(params, {g});
    CHECK(adam.step_count() == 1);
    for (int i = 0; i < 3; ++i) {
      double delta = before.at(i) - p.at(i);
      CHECK(std::abs(delta) == doctest::Approx(0.1).epsilon(1e-4));
      CHECK(delta * g.at(i) > 0.0);  // steps against the gradient sign
    }
  }
  SUBCASE("zero gradient leaves parameters and moments untouched") {
    Tensor p = Tensor::vector({1.0, 2.0});
    std::vector<Tensor*> params = {&p};
    Adam adam(AdamConfig{}, params);
    adam.step(params, {Tensor::zeros({2})});
    CHECK(adam.step_count() == 1);
    CHECK(p.data[0] == 1.0);
    CHECK(p.data[1] == 2.0);
    for (double v : adam.moments_m()[0].data) CHECK(v == 0.0);
    for (double v : adam.moments_v()[0].data) CHECK(v == 0.0);
  }
  SUBCASE("drives x^2 toward zero from x=5") {
    Tensor x = Tensor::scalar(5.0);
    std::vector<Tensor*> params = {&x};
    Adam adam(AdamConfig{0.1, 0.9, 0.999, 1e-8}, params);
    for (int i = 0; i < 100; ++i) {
      Tensor g = Tensor::scalar(2.0 * x.data[0]);
      adam.step(params, {g});
    }
    CHECK(std::abs(x.data[0]) < 1.0);
  }
  SUBCASE("NaN gradient is a numeric failure") {
    Tensor p = Tensor::scalar(1.0);
    std::vector<Tensor*> params = {&p};
    Adam adam(AdamConfig{}, params);
    Tensor g = Tensor::scalar(std::nan(""));
    try {
      adam.step(params, {g});
      FAIL("expected numeric failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNumeric);
    }
  }
}

TEST_CASE("initialization and updates are seed deterministic") {
  auto build = [](uint64_t seed) {
    RngStream rng(seed);
    DenseLayer l = DenseLayer::init(8, 5, Activation::kTanh, rng);
    // A few Adam steps on a fixed quadratic target.
    std::vector<Tensor*> params;
    l.collect(params);
    Adam adam(AdamConfig{0.01, 0.9, 0.999, 1e-8}, params);
    for (int i = 0; i < 5; ++i) {
      Tape t;
      auto y = l.forward(t, t.g.input(Tensor::vector({1, 2, 3, 4, 5})));
      auto loss = t.g.sum(t.g.square(y));
      t.g.backward(loss);
      std::vector<Tensor> grads;
      for (Tensor* p : params) grads.push_back(t.grad_of(*p));
      adam.step(params, grads);
    }
    uint64_t h = hash_tensor(l.W);
    return hash_tensor(l.b, h);
  };
  CHECK(build(77) == build(77));
  CHECK(build(77) != build(78));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  RngStream rng(3);
  DenseLayer l = DenseLayer::init(4, 3, Activation::kRelu, rng);
  l.W.data[0] = 0.1 + 0.2;  // a value with a non-terminating binary expansion
  nlohmann::json doc = checkpoint_to_json(
      "test", nlohmann::json::array(),
      {{"dense.W", &l.W}, {"dense.b", &l.b}});
  std::string text = doc.dump();

  DenseLayer restored = DenseLayer::init(4, 3, Activation::kRelu, rng);
  checkpoint_from_json(nlohmann::json::parse(text), "test",
                       {{"dense.W", &restored.W}, {"dense.b", &restored.b}});
  CHECK(hash_tensor(restored.W) == hash_tensor(l.W));
  CHECK(hash_tensor(restored.b) == hash_tensor(l.b));

  // Serialize again: byte-identical.
  nlohmann::json doc2 = checkpoint_to_json(
      "test", nlohmann::json::array(),
      {{"dense.W", &restored.W}, {"dense.b", &restored.b}});
  CHECK(doc2.dump() == text);

  SUBCASE("version mismatch is refused") {
    nlohmann::json bad = nlohmann::json::parse(text);
    bad["format_version"] = 999;
    try {
      checkpoint_from_json(bad, "test", {{"dense.W", &restored.W}});
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kVersion);
    }
  }
}

TEST_CASE("hex double codec is exact") {
  std::vector<double> values = {0.0, -0.0, 1.0, -1.0, 0.1, 1e-300, 1e300, 3.141592653589793};
  auto hex = encode_doubles_hex(values);
  CHECK(hex.size() == values.size() * 16);
  auto back = decode_doubles_hex(hex);
  REQUIRE(back.size() == values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    CHECK(std::bit_cast<uint64_t>(back[i]) == std::bit_cast<uint64_t>(values[i]));
  }
}

TEST_CASE("independent graphs evaluate safely in parallel") {
  RngStream rng(8);
  DenseLayer shared = DenseLayer::init(6, 4, Activation::kTanh, rng);
  auto run = [&shared](uint64_t seed) {
    RngStream r(seed);
    double acc = 0.0;
    for (int i = 0; i < 200; ++i) {
      Tape t;
      Tensor x = Tensor::zeros({4});
      for (double& v : x.data) v = r.uniform_real(-1, 1);
      auto y = shared.forward(t, t.g.input(x));
      auto loss = t.g.sum(t.g.square(y));
      t.g.backward(loss);
      acc += t.g.scalar(loss);
    }
    return acc;
  };
  double direct = run(42);
  double threaded = 0.0;
  std::thread worker([&] { threaded = run(42); });
  double other = run(43);
  worker.join();
  CHECK(threaded == direct);
  CHECK(other != direct);
}
