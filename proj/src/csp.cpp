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

#include "winne/csp.hpp"

#include <algorithm>

#include "winne/checkpoint.hpp"
#include "winne/error.hpp"

namespace winne {

nlohmann::json CspConfig::to_json() const {
  nlohmann::json j;
  j["input_dim"] = input_dim;
  j["action_dim"] = action_dim;
  j["gru_units"] = gru_units;
  j["entangled"] = entangled;
  j["seq_len"] = seq_len;
  j["batch"] = batch;
  j["temperature"] = temperature;
  j["lr"] = lr;
  j["contrastive_weight"] = contrastive_weight;
  j["train_steps_per_turn"] = train_steps_per_turn;
  j["sample_recent"] = sample_recent;
  j["capacity"] = capacity;
  j["min_windows"] = min_windows;
  return j;
}

CspConfig CspConfig::from_json(const nlohmann::json& j) {
  CspConfig c;
  c.input_dim = j.at("input_dim").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.gru_units = j.at("gru_units").get<int>();
  c.entangled = j.at("entangled").get<int>();
  c.seq_len = j.at("seq_len").get<int>();
  c.batch = j.at("batch").get<int>();
  c.temperature = j.at("temperature").get<double>();
  c.lr = j.at("lr").get<double>();
  c.contrastive_weight = j.value("contrastive_weight", 1.0);
  c.train_steps_per_turn = j.value("train_steps_per_turn", 1);
  c.sample_recent = j.value("sample_recent", 0);
  c.capacity = j.at("capacity").get<int>();
  c.min_windows = j.at("min_windows").get<int>();
  return c;
}

CspConfig csp_default_config(EnvKind kind) {
  CspConfig c;
  if (kind == EnvKind::kDuel) {
    c.input_dim = 10;
    c.action_dim = 6;
    c.gru_units = 16;
  } else {
    c.input_dim = 11;
    c.action_dim = 200;
    c.gru_units = 32;
  }
  return c;
}

std::vector<double> SequenceBuffer::make_input(const std::vector<double>& state,
                                               int prev_action, int action_dim) {
  std::vector<double> input = state;
  input.resize(state.size() + static_cast<size_t>(action_dim), 0.0);
  if (prev_action >= 0 && prev_action < action_dim)
    input[state.size() + static_cast<size_t>(prev_action)] = 1.0;
  return input;
}

void SequenceBuffer::push(CspObservation obs) {
  require(static_cast<int>(obs.state.size()) == state_dim_, ErrorKind::kContract,
          "sequence buffer: wrong state dimension");
  entries_.push_back({std::move(obs), match_id_});
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

CspWindow SequenceBuffer::window_at(size_t index) const {
  require(index < entries_.size(), ErrorKind::kContract,
          "sequence buffer: window index out of range");
  CspWindow w;
  w.action = entries_[index].obs.action;
  w.mask = entries_[index].obs.mask;
  // Walk back over consecutive same-match pairs.
  std::vector<size_t> run;
  const int64_t match = entries_[index].match;
  for (size_t k = 0; k < static_cast<size_t>(seq_len_) && k <= index; ++k) {
    size_t i = index - k;
    if (entries_[i].match != match) break;
    run.push_back(i);
  }
  const int pad = seq_len_ - static_cast<int>(run.size());
  const size_t width = static_cast<size_t>(state_dim_ + action_dim_);
  for (int i = 0; i < pad; ++i)
    w.inputs.push_back(std::vector<double>(width, 0.0));
  for (size_t i = run.size(); i-- > 0;) {
    size_t idx = run[i];
    int prev = idx > 0 && entries_[idx - 1].match == match
                   ? entries_[idx - 1].obs.action
                   : -1;
    w.inputs.push_back(make_input(entries_[idx].obs.state, prev, action_dim_));
  }
  return w;
}

std::vector<std::vector<double>> SequenceBuffer::recent_inputs() const {
  std::vector<std::vector<double>> out;
  if (entries_.empty()) return out;
  std::vector<size_t> run;
  for (size_t k = 0; k < static_cast<size_t>(seq_len_ - 1) && k < entries_.size(); ++k) {
    size_t i = entries_.size() - 1 - k;
    if (entries_[i].match != match_id_) break;
    run.push_back(i);
  }
  for (size_t i = run.size(); i-- > 0;) {
    size_t idx = run[i];
    int prev = idx > 0 && entries_[idx - 1].match == match_id_
                   ? entries_[idx - 1].obs.action
                   : -1;
    out.push_back(make_input(entries_[idx].obs.state, prev, action_dim_));
  }
  return out;
}

int SequenceBuffer::last_action_in_match() const {
  if (entries_.empty() || entries_.back().match != match_id_) return -1;
  return entries_.back().obs.action;
}

nlohmann::json SequenceBuffer::to_json() const {
  nlohmann::json j;
  j["capacity"] = capacity_;
  j["seq_len"] = seq_len_;
  j["state_dim"] = state_dim_;
  j["action_dim"] = action_dim_;
  j["match_id"] = match_id_;
  nlohmann::json arr = nlohmann::json::array();
  for (const Entry& e : entries_) {
    nlohmann::json one;
    one["state"] = encode_doubles_hex(e.obs.state);
    one["action"] = e.obs.action;
    std::string mask(e.obs.mask.size(), '0');
    for (size_t i = 0; i < e.obs.mask.size(); ++i) mask[i] = e.obs.mask[i] ? '1' : '0';
    one["mask"] = mask;
    one["match"] = e.match;
    arr.push_back(std::move(one));
  }
  j["entries"] = std::move(arr);
  return j;
}

void SequenceBuffer::from_json(const nlohmann::json& j) {
  capacity_ = j.at("capacity").get<int>();
  seq_len_ = j.at("seq_len").get<int>();
  state_dim_ = j.at("state_dim").get<int>();
  action_dim_ = j.at("action_dim").get<int>();
  match_id_ = j.at("match_id").get<int64_t>();
  entries_.clear();
  for (const auto& one : j.at("entries")) {
    Entry e;
    e.obs.state = decode_doubles_hex(one.at("state").get<std::string>());
    e.obs.action = one.at("action").get<int>();
    std::string mask = one.at("mask").get<std::string>();
    e.obs.mask.assign(mask.size(), 0);
    for (size_t i = 0; i < mask.size(); ++i) e.obs.mask[i] = mask[i] == '1' ? 1 : 0;
    e.match = one.at("match").get<int64_t>();
    entries_.push_back(std::move(e));
  }
}

namespace {

CspWindow scramble_window(const CspWindow& w, RngStream& rng) {
  CspWindow out = w;
  const size_t n = out.inputs.size();
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  bool identity = true;
  for (size_t i = 0; i < n; ++i) identity = identity && perm[i] == i;
  if (identity) std::rotate(perm.begin(), perm.begin() + 1, perm.end());
  std::vector<std::vector<double>> inputs(n);
  for (size_t i = 0; i < n; ++i) inputs[i] = w.inputs[perm[i]];
  out.inputs = std::move(inputs);
  return out;
}

}  // namespace

std::optional<ContrastiveBatch> build_batch(
    const SequenceBuffer& own, const std::vector<const SequenceBuffer*>& others,
    int n, int seq_len, RngStream& rng, int recent_limit) {
  (void)seq_len;
  if (own.window_count() < 2) return std::nullopt;
  // Draw from the newest windows so training tracks the opponent's current
  // behavior instead of diluting over the whole ring.
  auto draw = [&](const SequenceBuffer& buf) {
    const int count = static_cast<int>(buf.window_count());
    const int span = recent_limit > 0 ? std::min(recent_limit, count) : count;
    const int lo = count - span;
    return static_cast<size_t>(lo + rng.uniform_int(0, span - 1));
  };
  ContrastiveBatch batch;
  const int genuine = n / 2;
  for (int i = 0; i < genuine; ++i) {
    batch.genuine.push_back(own.window_at(draw(own)));
  }
  std::vector<const SequenceBuffer*> sources;
  for (const SequenceBuffer* b : others) {
    if (b && b->window_count() > 0) sources.push_back(b);
  }
  for (int i = 0; i < n - genuine; ++i) {
    const SequenceBuffer* src =
        sources.empty()
            ? &own
            : sources[static_cast<size_t>(
                  rng.uniform_int(0, static_cast<int>(sources.size()) - 1))];
    batch.scrambled.push_back(scramble_window(src->window_at(draw(*src)), rng));
  }
  return batch;
}

CspNetwork::CspNetwork(CspConfig cfg, uint64_t init_seed) : cfg_(cfg) {
  init_network(init_seed);
}

void CspNetwork::init_network(uint64_t init_seed) {
  RngStream rng(init_seed);
  param_list_.clear();
  gru1_ = GruCell::init(cfg_.gru_units, cfg_.input_dim + cfg_.action_dim, rng);
  // The action block of the encoder input is one-hot, so at most one of its
  // entries is ever active; scale the input weights by the effective fan-in
  // (state plus one) instead of the full width.
  {
    const double full = std::sqrt(static_cast<double>(cfg_.input_dim + cfg_.action_dim));
    const double effective = std::sqrt(static_cast<double>(cfg_.input_dim + 1));
    const double boost = full / effective;
    for (Tensor* w : {&gru1_.Wz, &gru1_.Wr, &gru1_.Wh}) {
      for (double& v : w->data) v *= boost;
    }
  }
  gru2_ = GruCell::init(cfg_.gru_units, cfg_.gru_units, rng);
  entangled_ = DenseLayer::init(cfg_.entangled, cfg_.gru_units, Activation::kTanh, rng);
  action_head_ = DenseLayer::init(cfg_.action_dim, cfg_.entangled, Activation::kIdentity, rng);
  gru1_.collect(param_list_);
  gru2_.collect(param_list_);
  entangled_.collect(param_list_);
  action_head_.collect(param_list_);
  adam_ = Adam(AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8}, param_list_);
}

Graph::NodeId CspNetwork::encode(Tape& t,
                                 const std::vector<std::vector<double>>& states) const {
  Graph::NodeId h1 = t.g.constant(Tensor::zeros({cfg_.gru_units}));
  Graph::NodeId h2 = t.g.constant(Tensor::zeros({cfg_.gru_units}));
  for (const auto& s : states) {
    Graph::NodeId x = t.g.constant(Tensor::vector(s));
    h1 = gru1_.step(t, x, h1);
    h2 = gru2_.step(t, h1, h2);
  }
  return entangled_.forward(t, h2);
}

CspPrediction CspNetwork::predict(const std::vector<std::vector<double>>& window,
                                  const std::vector<uint8_t>& mask) const {
  // Left-pad short histories with zero inputs.
  std::vector<std::vector<double>> inputs = window;
  require(static_cast<int>(inputs.size()) <= cfg_.seq_len, ErrorKind::kContract,
          "csp predict: window longer than the configured sequence length");
  while (static_cast<int>(inputs.size()) < cfg_.seq_len) {
    inputs.insert(inputs.begin(),
                  std::vector<double>(
                      static_cast<size_t>(cfg_.input_dim + cfg_.action_dim), 0.0));
  }
  Tape t;
  Graph::NodeId z = encode(t, inputs);
  Graph::NodeId probs = t.g.masked_softmax(action_head_.forward(t, z), mask);
  CspPrediction pred;
  pred.distribution = t.g.value(probs).data;
  pred.embedding = t.g.value(z).data;
  for (size_t a = 0; a < pred.distribution.size(); ++a) {
    if (mask[a] && (pred.top_action < 0 ||
                    pred.distribution[a] > pred.distribution[static_cast<size_t>(pred.top_action)])) {
      pred.top_action = static_cast<int>(a);
    }
  }
  pred.top_prob = pred.top_action >= 0
                      ? pred.distribution[static_cast<size_t>(pred.top_action)]
                      : 0.0;
  return pred;
}

CspTrainStats CspNetwork::train_step(const ContrastiveBatch& batch) {
  require(!batch.genuine.empty() && !batch.scrambled.empty(), ErrorKind::kInvalidBatch,
          "csp train_step: both batch halves must be populated");
  Tape t;
  std::vector<Graph::NodeId> embeddings;
  std::vector<int> labels;
  std::vector<Graph::NodeId> genuine_raw;
  for (const CspWindow& w : batch.genuine) {
    Graph::NodeId z = encode(t, w.inputs);
    genuine_raw.push_back(z);
    embeddings.push_back(t.g.l2_normalize(z));
    labels.push_back(1);
  }
  for (const CspWindow& w : batch.scrambled) {
    embeddings.push_back(t.g.l2_normalize(encode(t, w.inputs)));
    labels.push_back(0);
  }
  Graph::NodeId contrastive =
      contrastive_loss_node(t, embeddings, labels, cfg_.temperature);

  // Action cross-entropy on the genuine windows' observed next actions,
  // summed so its gradient scale matches the summed contrastive term.
  Graph::NodeId xent = t.g.input(Tensor::scalar(0.0));
  for (size_t i = 0; i < batch.genuine.size(); ++i) {
    const CspWindow& w = batch.genuine[i];
    Graph::NodeId probs =
        t.g.masked_softmax(action_head_.forward(t, genuine_raw[i]), w.mask);
    xent = t.g.add(xent, t.g.neg(t.g.log(t.g.gather(probs, w.action))));
  }
  Graph::NodeId loss = t.g.add(t.g.scale(contrastive, cfg_.contrastive_weight), xent);
  t.g.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(param_list_.size());
  for (Tensor* p : param_list_) grads.push_back(t.grad_of(*p));
  adam_.step(param_list_, grads);

  CspTrainStats stats;
  stats.contrastive = t.g.scalar(contrastive);
  stats.action_xent = t.g.scalar(xent) / static_cast<double>(batch.genuine.size());
  return stats;
}

uint64_t CspNetwork::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor* p : param_list_) h = hash_tensor(*p, h);
  return h;
}

std::vector<std::pair<std::string, Tensor*>> CspNetwork::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  gru1_.collect_named("gru1", out);
  gru2_.collect_named("gru2", out);
  entangled_.collect_named("entangled", out);
  action_head_.collect_named("action_head", out);
  for (size_t i = 0; i < adam_.moments_m().size(); ++i) {
    out.emplace_back("adam.m." + std::to_string(i), &adam_.moments_m()[i]);
    out.emplace_back("adam.v." + std::to_string(i), &adam_.moments_v()[i]);
  }
  return out;
}

nlohmann::json CspNetwork::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  layers.push_back({{"kind", "gru"}, {"in", cfg_.input_dim + cfg_.action_dim}, {"out", cfg_.gru_units}});
  layers.push_back({{"kind", "gru"}, {"in", cfg_.gru_units}, {"out", cfg_.gru_units}});
  layers.push_back({{"kind", "dense"}, {"in", cfg_.gru_units}, {"out", cfg_.entangled},
                    {"activation", "tanh"}, {"head", "entangled"}});
  layers.push_back({{"kind", "dense"}, {"in", cfg_.entangled}, {"out", cfg_.action_dim},
                    {"activation", "identity"}, {"head", "action"}});
  auto named = const_cast<CspNetwork*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> all(named.begin(), named.end());
  nlohmann::json doc = checkpoint_to_json("csp", layers, all);
  doc["config"] = cfg_.to_json();
  doc["adam_steps"] = adam_.step_count();
  return doc;
}

void CspNetwork::from_json(const nlohmann::json& doc) {
  cfg_ = CspConfig::from_json(doc.at("config"));
  init_network(0);
  checkpoint_from_json(doc, "csp", named_params());
  adam_.set_step_count(doc.value("adam_steps", int64_t{0}));
}

}  // namespace winne
