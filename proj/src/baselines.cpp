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

#include "winne/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "winne/card_env.hpp"
#include "winne/checkpoint.hpp"
#include "winne/error.hpp"

namespace winne {

nlohmann::json PolicySpec::to_json() const {
  nlohmann::json j;
  j["layers"] = layers;
  j["activation"] = activation_name(activation);
  j["gamma"] = gamma;
  j["lr"] = lr;
  j["clip_eps"] = clip_eps;
  j["update_every"] = update_every;
  j["actor_input_skip"] = actor_input_skip;
  j["skip_offset"] = skip_offset;
  j["skip_init"] = skip_init;
  j["c_value"] = c_value;
  j["c_entropy"] = c_entropy;
  j["epochs"] = epochs;
  j["double_q"] = double_q;
  j["target_update"] = target_update;
  j["prioritized"] = prioritized;
  j["buffer_capacity"] = buffer_capacity;
  j["batch_size"] = batch_size;
  j["priority_alpha"] = priority_alpha;
  j["beta_start"] = beta_start;
  j["beta_anneal_steps"] = beta_anneal_steps;
  j["eps_start"] = eps_start;
  j["eps_end"] = eps_end;
  j["eps_decay_episodes"] = eps_decay_episodes;
  return j;
}

PolicySpec PolicySpec::from_json(const nlohmann::json& j) {
  PolicySpec s;
  s.layers = j.at("layers").get<std::vector<int>>();
  s.activation = activation_from_name(j.at("activation").get<std::string>());
  s.gamma = j.at("gamma").get<double>();
  s.lr = j.at("lr").get<double>();
  s.clip_eps = j.value("clip_eps", s.clip_eps);
  s.update_every = j.value("update_every", s.update_every);
  s.actor_input_skip = j.value("actor_input_skip", s.actor_input_skip);
  s.skip_offset = j.value("skip_offset", s.skip_offset);
  s.skip_init = j.value("skip_init", s.skip_init);
  s.c_value = j.value("c_value", s.c_value);
  s.c_entropy = j.value("c_entropy", s.c_entropy);
  s.epochs = j.value("epochs", s.epochs);
  s.double_q = j.value("double_q", s.double_q);
  s.target_update = j.value("target_update", s.target_update);
  s.prioritized = j.value("prioritized", s.prioritized);
  s.buffer_capacity = j.value("buffer_capacity", s.buffer_capacity);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.priority_alpha = j.value("priority_alpha", s.priority_alpha);
  s.beta_start = j.value("beta_start", s.beta_start);
  s.beta_anneal_steps = j.value("beta_anneal_steps", s.beta_anneal_steps);
  s.eps_start = j.value("eps_start", s.eps_start);
  s.eps_end = j.value("eps_end", s.eps_end);
  s.eps_decay_episodes = j.value("eps_decay_episodes", s.eps_decay_episodes);
  return s;
}

PolicySpec ppo_paper_spec(EnvKind kind) {
  PolicySpec s;
  if (kind == EnvKind::kDuel) {
    s.layers = {16, 32};
    s.gamma = 0.97;
    s.lr = 0.1;
    s.c_entropy = 0.01;
  } else {
    s.layers = {32, 256};
    s.gamma = 0.99;
    s.lr = 0.05;
    s.c_entropy = 0.008;
  }
  s.c_value = 0.5;
  return s;
}

PolicySpec dql_paper_spec(EnvKind kind) {
  PolicySpec s;
  if (kind == EnvKind::kDuel) {
    s.layers = {16, 256};
    s.gamma = 0.95;
    s.lr = 0.03;
  } else {
    s.layers = {32, 256};
    s.gamma = 0.98;
    s.lr = 0.004;
  }
  s.double_q = true;
  s.target_update = 500;
  s.prioritized = true;
  return s;
}

PolicySpec ppo_desk_spec(EnvKind kind) {
  PolicySpec s = ppo_paper_spec(kind);
  if (kind == EnvKind::kDuel) {
    // Short-horizon shaping signal: the damage reward carries the ranking
    // information, so the desk preset discounts hard and takes many
    // optimizer steps per batch.
    s.gamma = 0.5;
    s.lr = 6e-3;
    s.epochs = 16;
    s.update_every = 16;
  } else {
    s.lr = 2e-3;
    s.epochs = 8;
    s.update_every = 4;
  }
  return s;
}

PolicySpec dql_desk_spec(EnvKind kind) {
  PolicySpec s = dql_paper_spec(kind);
  s.lr = 5e-4;
  if (kind == EnvKind::kDuel) s.gamma = 0.5;
  return s;
}

PolicySpec spec_preset(const std::string& algo, const std::string& preset, EnvKind kind) {
  if (algo == "ppo") return preset == "paper" ? ppo_paper_spec(kind) : ppo_desk_spec(kind);
  if (algo == "dql") return preset == "paper" ? dql_paper_spec(kind) : dql_desk_spec(kind);
  fail(ErrorKind::kConfig, "unknown algorithm: " + algo);
}

namespace {

std::vector<int> legal_indices(const std::vector<uint8_t>& mask) {
  std::vector<int> out;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

int env_input_dim(EnvKind kind) { return kind == EnvKind::kDuel ? 22 : 28; }
int env_action_dim(EnvKind kind) { return kind == EnvKind::kDuel ? 6 : 200; }

}  // namespace

int RandomAgent::act(const GameEnv& env, int player, RngStream& rng, bool /*greedy*/,
                     ActDiag* diag) {
  auto legal = legal_indices(env.legal_mask(player));
  require(!legal.empty(), ErrorKind::kEmptySupport, "random agent: no legal action");
  int a = legal[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(legal.size()) - 1))];
  if (diag) diag->logprob = -std::log(static_cast<double>(legal.size()));
  return a;
}

int GreedyAgent::act(const GameEnv& env, int player, RngStream& /*rng*/, bool /*greedy*/,
                     ActDiag* /*diag*/) {
  const auto mask = env.legal_mask(player);
  if (env.kind() == EnvKind::kDuel) {
    // Effective damage reconstructed from the observation layout:
    // powers/100 in slots 0..3, multipliers/2 in slots 4..7.
    const auto obs = env.encode_full(player);
    int best = -1;
    double best_damage = -1.0;
    for (int m = 0; m < 4; ++m) {
      if (!mask[static_cast<size_t>(m)]) continue;
      double damage = obs[static_cast<size_t>(m)] * 100.0 * obs[static_cast<size_t>(4 + m)] * 2.0;
      if (damage > best_damage + 1e-12) {
        best = m;
        best_damage = damage;
      }
    }
    if (best >= 0) return best;
    for (int a = 4; a < 6; ++a) {
      if (mask[static_cast<size_t>(a)]) return a;
    }
    fail(ErrorKind::kEmptySupport, "greedy agent: no legal action");
  }
  // Card game: largest legal discard, ties to the lowest value then the
  // fewest jokers; pass only when nothing can be discarded.
  int best = -1;
  int best_size = -1, best_value = 0, best_jokers = 0;
  for (int a = 0; a < CardEnv::kPassAction; ++a) {
    if (!mask[static_cast<size_t>(a)]) continue;
    auto d = CardEnv::decode_discard(a);
    int size = d.quantity + d.jokers;
    bool better = size > best_size ||
                  (size == best_size &&
                   (d.value < best_value ||
                    (d.value == best_value && d.jokers < best_jokers)));
    if (better) {
      best = a;
      best_size = size;
      best_value = d.value;
      best_jokers = d.jokers;
    }
  }
  if (best >= 0) return best;
  if (mask[CardEnv::kJokerOnlyAction]) return CardEnv::kJokerOnlyAction;
  require(mask[CardEnv::kPassAction], ErrorKind::kEmptySupport,
          "greedy agent: no legal action");
  return CardEnv::kPassAction;
}

// ---- PPO ----

PpoAgent::PpoAgent(EnvKind kind, PolicySpec spec, uint64_t init_seed)
    : PpoAgent(env_input_dim(kind), env_action_dim(kind), kind, std::move(spec),
               init_seed) {}

PpoAgent::PpoAgent(int input_dim, int action_dim, EnvKind kind, PolicySpec spec,
                   uint64_t init_seed)
    : kind_(kind), spec_(std::move(spec)), input_dim_(input_dim),
      action_dim_(action_dim) {
  init_network(init_seed);
}

void PpoAgent::init_network(uint64_t init_seed) {
  RngStream rng(init_seed);
  actor_hidden_.clear();
  critic_hidden_.clear();
  param_list_.clear();
  const int input = input_dim_;
  const int actions = action_dim_;
  // Separate actor and critic stacks: value regression gradients would
  // otherwise dominate a shared trunk.
  int in = input;
  for (int width : spec_.layers) {
    actor_hidden_.push_back(DenseLayer::init(width, in, spec_.activation, rng));
    in = width;
  }
  actor_ = DenseLayer::init(actions, in, Activation::kIdentity, rng);
  in = input;
  for (int width : spec_.layers) {
    critic_hidden_.push_back(DenseLayer::init(width, in, spec_.activation, rng));
    in = width;
  }
  critic_ = DenseLayer::init(1, in, Activation::kIdentity, rng);
  if (spec_.actor_input_skip) {
    skip_ = DenseLayer{Tensor::zeros({actions, input}), Tensor::zeros({actions}),
                       Activation::kIdentity};
    for (int a = 0; a < actions; ++a) {
      int col = spec_.skip_offset + a;
      if (col < input) skip_.W.at(a, col) = spec_.skip_init;
    }
  }
  for (auto& l : actor_hidden_) l.collect(param_list_);
  actor_.collect(param_list_);
  if (spec_.actor_input_skip) skip_.collect(param_list_);
  for (auto& l : critic_hidden_) l.collect(param_list_);
  critic_.collect(param_list_);
  adam_ = Adam(AdamConfig{spec_.lr, 0.9, 0.999, 1e-8}, param_list_);
}

Graph::NodeId PpoAgent::actor_trunk(Tape& t, Graph::NodeId x) const {
  Graph::NodeId h = x;
  for (const auto& l : actor_hidden_) h = l.forward(t, h);
  return h;
}

Graph::NodeId PpoAgent::critic_trunk(Tape& t, Graph::NodeId x) const {
  Graph::NodeId h = x;
  for (const auto& l : critic_hidden_) h = l.forward(t, h);
  return h;
}

Graph::NodeId PpoAgent::actor_logits(Tape& t, Graph::NodeId x) const {
  Graph::NodeId logits = actor_.forward(t, actor_trunk(t, x));
  if (spec_.actor_input_skip) logits = t.g.add(logits, skip_.forward(t, x));
  return logits;
}

std::vector<double> PpoAgent::action_probs(const std::vector<double>& obs,
                                           const std::vector<uint8_t>& mask) const {
  Tape t;
  Graph::NodeId x = t.g.constant(Tensor::vector(obs));
  Graph::NodeId probs = t.g.masked_softmax(actor_logits(t, x), mask);
  return t.g.value(probs).data;
}

double PpoAgent::state_value(const std::vector<double>& obs) const {
  Tape t;
  Graph::NodeId h = critic_trunk(t, t.g.constant(Tensor::vector(obs)));
  return t.g.scalar(t.g.gather(critic_.forward(t, h), 0));
}

int PpoAgent::select(const std::vector<double>& obs, const std::vector<uint8_t>& mask,
                     RngStream& rng, bool greedy, double* logprob) const {
  auto probs = action_probs(obs, mask);
  int chosen = -1;
  if (greedy) {
    for (size_t i = 0; i < probs.size(); ++i) {
      if (mask[i] && (chosen < 0 || probs[i] > probs[static_cast<size_t>(chosen)]))
        chosen = static_cast<int>(i);
    }
  } else {
    double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
      if (!mask[i]) continue;
      chosen = static_cast<int>(i);
      acc += probs[i];
      if (u < acc) break;
    }
  }
  require(chosen >= 0, ErrorKind::kEmptySupport, "ppo: no legal action");
  if (logprob) *logprob = std::log(std::max(probs[static_cast<size_t>(chosen)], 1e-300));
  return chosen;
}

int PpoAgent::act(const GameEnv& env, int player, RngStream& rng, bool greedy,
                  ActDiag* diag) {
  double lp = 0.0;
  int a = select(env.encode_full(player), env.legal_mask(player), rng, greedy, &lp);
  if (diag) diag->logprob = lp;
  return a;
}

void PpoAgent::observe_transition(const Transition& t) {
  if (learning_) trajectory_.push_back(t);
}

// begin_episode keeps any batched trajectory: episode boundaries live in
// the done flags.

void PpoAgent::end_episode(RngStream& /*rng*/) {
  if (!learning_) return;
  ++episodes_seen_;
  if (episodes_seen_ % std::max(1, spec_.update_every) != 0) return;
  if (trajectory_.empty()) return;
  update(trajectory_);
  trajectory_.clear();
}

PpoStats PpoAgent::update(const std::vector<Transition>& batch) {
  require(!batch.empty(), ErrorKind::kInvalidBatch, "ppo_update: empty batch");
  const size_t n = batch.size();

  // Monte-Carlo returns; episodes are delimited by done flags.
  std::vector<double> returns(n, 0.0);
  double run = 0.0;
  for (size_t i = n; i-- > 0;) {
    if (batch[i].done) run = 0.0;
    run = batch[i].reward + spec_.gamma * run;
    returns[i] = run;
  }
  std::vector<double> advantages(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    advantages[i] = returns[i] - state_value(batch[i].obs);
  }

  PpoStats stats;
  for (int epoch = 0; epoch < spec_.epochs; ++epoch) {
    Tape t;
    Graph::NodeId total = t.g.input(Tensor::scalar(0.0));
    double policy_sum = 0.0, value_sum = 0.0, entropy_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      Graph::NodeId x = t.g.constant(Tensor::vector(batch[i].obs));
      Graph::NodeId probs = t.g.masked_softmax(actor_logits(t, x), batch[i].mask);
      Graph::NodeId lp = t.g.log(t.g.gather(probs, batch[i].action));
      Graph::NodeId v = t.g.gather(critic_.forward(t, critic_trunk(t, x)), 0);
      Graph::NodeId ent = t.g.entropy(probs);
      PpoTerms terms =
          ppo_sample_loss(t, batch[i].logprob, lp, advantages[i], v, returns[i],
                          spec_.clip_eps, spec_.c_value, spec_.c_entropy, ent);
      total = t.g.add(total, terms.loss);
      policy_sum += terms.policy;
      value_sum += terms.value;
      entropy_sum += terms.entropy;
    }
    Graph::NodeId loss = t.g.scale(total, 1.0 / static_cast<double>(n));
    if (epoch == 0) {
      stats.policy = policy_sum / static_cast<double>(n);
      stats.value = value_sum / static_cast<double>(n);
      stats.entropy = entropy_sum / static_cast<double>(n);
      stats.total = t.g.scalar(loss);
    }
    t.g.backward(loss);
    std::vector<Tensor> grads;
    grads.reserve(param_list_.size());
    for (Tensor* p : param_list_) grads.push_back(t.grad_of(*p));
    adam_.step(param_list_, grads);
  }
  return stats;
}

uint64_t PpoAgent::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor* p : param_list_) h = hash_tensor(*p, h);
  return h;
}

std::vector<std::pair<std::string, Tensor*>> PpoAgent::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (size_t i = 0; i < actor_hidden_.size(); ++i)
    actor_hidden_[i].collect_named("actor_hidden" + std::to_string(i), out);
  actor_.collect_named("actor", out);
  if (spec_.actor_input_skip) skip_.collect_named("actor_skip", out);
  for (size_t i = 0; i < critic_hidden_.size(); ++i)
    critic_hidden_[i].collect_named("critic_hidden" + std::to_string(i), out);
  critic_.collect_named("critic", out);
  for (size_t i = 0; i < adam_.moments_m().size(); ++i) {
    out.emplace_back("adam.m." + std::to_string(i), &adam_.moments_m()[i]);
    out.emplace_back("adam.v." + std::to_string(i), &adam_.moments_v()[i]);
  }
  return out;
}

nlohmann::json PpoAgent::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : actor_hidden_) {
    layers.push_back({{"kind", "dense"},
                      {"in", l.in_size()},
                      {"out", l.out_size()},
                      {"activation", activation_name(l.act)},
                      {"stack", "actor"}});
  }
  layers.push_back({{"kind", "dense"}, {"in", actor_.in_size()}, {"out", actor_.out_size()},
                    {"activation", "identity"}, {"head", "actor"}});
  for (const auto& l : critic_hidden_) {
    layers.push_back({{"kind", "dense"},
                      {"in", l.in_size()},
                      {"out", l.out_size()},
                      {"activation", activation_name(l.act)},
                      {"stack", "critic"}});
  }
  layers.push_back({{"kind", "dense"}, {"in", critic_.in_size()}, {"out", critic_.out_size()},
                    {"activation", "identity"}, {"head", "critic"}});
  auto named = const_cast<PpoAgent*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> all(named.begin(), named.end());
  nlohmann::json doc = checkpoint_to_json("ppo", layers, all);
  doc["env_kind"] = env_kind_name(kind_);
  doc["spec"] = spec_.to_json();
  doc["input_dim"] = input_dim_;
  doc["action_dim"] = action_dim_;
  doc["adam_steps"] = adam_.step_count();
  doc["learning"] = learning_;
  return doc;
}

void PpoAgent::from_json(const nlohmann::json& doc) {
  spec_ = PolicySpec::from_json(doc.at("spec"));
  kind_ = env_kind_from_name(doc.at("env_kind").get<std::string>());
  input_dim_ = doc.value("input_dim", env_input_dim(kind_));
  action_dim_ = doc.value("action_dim", env_action_dim(kind_));
  init_network(0);
  checkpoint_from_json(doc, "ppo", named_params());
  adam_.set_step_count(doc.value("adam_steps", int64_t{0}));
  learning_ = doc.value("learning", true);
  trajectory_.clear();
}

std::unique_ptr<PpoAgent> PpoAgent::clone_frozen() const {
  auto copy = std::make_unique<PpoAgent>(input_dim_, action_dim_, kind_, spec_, 0);
  copy->from_json(to_json());
  copy->set_learning(false);
  return copy;
}

// ---- Replay buffer ----

void ReplayBuffer::push(Transition t, double priority) {
  require(priority > 0.0, ErrorKind::kContract, "replay: priority must be positive");
  if (static_cast<int>(items_.size()) < capacity_) {
    items_.push_back(std::move(t));
    priorities_.push_back(priority);
  } else {
    items_[next_] = std::move(t);
    priorities_[next_] = priority;
    next_ = (next_ + 1) % static_cast<size_t>(capacity_);
  }
}

double ReplayBuffer::max_priority() const {
  double mx = 1.0;
  for (double p : priorities_) mx = std::max(mx, p);
  return mx;
}

std::vector<size_t> ReplayBuffer::sample(int k, double alpha, RngStream& rng) const {
  std::vector<double> cum(priorities_.size());
  double total = 0.0;
  for (size_t i = 0; i < priorities_.size(); ++i) {
    total += std::pow(priorities_[i], alpha);
    cum[i] = total;
  }
  std::vector<size_t> out;
  out.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    double u = rng.uniform() * total;
    size_t idx = static_cast<size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    out.push_back(std::min(idx, items_.size() - 1));
  }
  return out;
}

std::vector<size_t> ReplayBuffer::sample_uniform(int k, RngStream& rng) const {
  std::vector<size_t> out;
  out.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    size_t idx = static_cast<size_t>(rng.uniform() * static_cast<double>(items_.size()));
    out.push_back(std::min(idx, items_.size() - 1));
  }
  return out;
}

std::vector<double> ReplayBuffer::importance_weights(const std::vector<size_t>& idx,
                                                     double alpha, double beta) const {
  double total = 0.0;
  for (double p : priorities_) total += std::pow(p, alpha);
  const double n = static_cast<double>(items_.size());
  std::vector<double> w(idx.size());
  double mx = 0.0;
  for (size_t i = 0; i < idx.size(); ++i) {
    double prob = std::pow(priorities_[idx[i]], alpha) / total;
    w[i] = std::pow(n * prob, -beta);
    mx = std::max(mx, w[i]);
  }
  for (double& v : w) v /= mx;
  return w;
}

// ---- DQL ----

Graph::NodeId DqlAgent::QNet::forward(Tape& t, Graph::NodeId x) const {
  Graph::NodeId h = x;
  for (const auto& l : hidden) h = l.forward(t, h);
  return head.forward(t, h);
}

DqlAgent::DqlAgent(EnvKind kind, PolicySpec spec, uint64_t init_seed)
    : kind_(kind),
      spec_(std::move(spec)),
      buffer_(spec_.buffer_capacity),
      update_rng_(init_seed ^ 0x9e3779b97f4a7c15ULL) {
  init_network(init_seed);
}

void DqlAgent::init_network(uint64_t init_seed) {
  RngStream rng(init_seed);
  online_.hidden.clear();
  param_list_.clear();
  int in = env_input_dim(kind_);
  const int actions = env_action_dim(kind_);
  for (int width : spec_.layers) {
    online_.hidden.push_back(DenseLayer::init(width, in, spec_.activation, rng));
    in = width;
  }
  online_.head = DenseLayer::init(actions, in, Activation::kIdentity, rng);
  for (auto& l : online_.hidden) l.collect(param_list_);
  online_.head.collect(param_list_);
  adam_ = Adam(AdamConfig{spec_.lr, 0.9, 0.999, 1e-8}, param_list_);
  sync_target();
}

void DqlAgent::sync_target() { target_ = online_; }

std::vector<double> DqlAgent::forward_values(const QNet& net,
                                             const std::vector<double>& obs) const {
  Tape t;
  return t.g.value(net.forward(t, t.g.constant(Tensor::vector(obs)))).data;
}

std::vector<double> DqlAgent::q_values(const std::vector<double>& obs) const {
  return forward_values(online_, obs);
}

std::vector<double> DqlAgent::q_values_target(const std::vector<double>& obs) const {
  return forward_values(target_, obs);
}

double DqlAgent::epsilon() const {
  if (!learning_) return 0.0;
  double frac = std::min(1.0, static_cast<double>(episodes_) /
                                  std::max(1, spec_.eps_decay_episodes));
  return spec_.eps_start + frac * (spec_.eps_end - spec_.eps_start);
}

int DqlAgent::act(const GameEnv& env, int player, RngStream& rng, bool greedy,
                  ActDiag* diag) {
  const auto mask = env.legal_mask(player);
  auto legal = legal_indices(mask);
  require(!legal.empty(), ErrorKind::kEmptySupport, "dql: no legal action");
  if (!greedy && rng.uniform() < epsilon()) {
    int a = legal[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(legal.size()) - 1))];
    if (diag) diag->logprob = -std::log(static_cast<double>(legal.size()));
    return a;
  }
  auto q = q_values(env.encode_full(player));
  int best = legal[0];
  for (int a : legal) {
    if (q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
  }
  if (diag) diag->logprob = 0.0;
  return best;
}

void DqlAgent::observe_transition(const Transition& t) {
  if (!learning_) return;
  buffer_.push(t, buffer_.max_priority());
  update(update_rng_);
}

void DqlAgent::end_episode(RngStream& /*rng*/) {
  if (learning_) ++episodes_;
}

std::optional<double> DqlAgent::update(RngStream& rng) {
  if (static_cast<int>(buffer_.size()) < spec_.batch_size) return std::nullopt;
  const int k = spec_.batch_size;
  std::vector<size_t> idx = spec_.prioritized
                                ? buffer_.sample(k, spec_.priority_alpha, rng)
                                : buffer_.sample_uniform(k, rng);
  const double beta =
      std::min(1.0, spec_.beta_start + (1.0 - spec_.beta_start) *
                                           static_cast<double>(updates_) /
                                           std::max(1, spec_.beta_anneal_steps));
  std::vector<double> weights =
      spec_.prioritized ? buffer_.importance_weights(idx, spec_.priority_alpha, beta)
                        : std::vector<double>(static_cast<size_t>(k), 1.0);

  std::vector<double> targets(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    const Transition& tr = buffer_.at(idx[static_cast<size_t>(i)]);
    if (tr.done) {
      targets[static_cast<size_t>(i)] = tr.reward;
      continue;
    }
    std::vector<double> online_next = q_values(tr.next_obs);
    std::vector<double> target_next = q_values_target(tr.next_obs);
    // Restrict the online argmax to legal next actions.
    for (size_t a = 0; a < online_next.size(); ++a) {
      if (!tr.next_mask[a]) online_next[a] = -1e30;
    }
    if (spec_.double_q) {
      targets[static_cast<size_t>(i)] =
          double_q_target(tr.reward, tr.done, spec_.gamma, online_next, target_next);
    } else {
      for (size_t a = 0; a < target_next.size(); ++a) {
        if (!tr.next_mask[a]) target_next[a] = -1e30;
      }
      double best = *std::max_element(target_next.begin(), target_next.end());
      targets[static_cast<size_t>(i)] = tr.reward + spec_.gamma * best;
    }
  }

  Tape t;
  Graph::NodeId total = t.g.input(Tensor::scalar(0.0));
  double td_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const Transition& tr = buffer_.at(idx[static_cast<size_t>(i)]);
    Graph::NodeId q = online_.forward(t, t.g.constant(Tensor::vector(tr.obs)));
    Graph::NodeId qa = t.g.gather(q, tr.action);
    Graph::NodeId err = t.g.add_const(t.g.neg(qa), targets[static_cast<size_t>(i)]);
    total = t.g.add(total, t.g.scale(t.g.square(err), weights[static_cast<size_t>(i)]));
    const double td = std::abs(t.g.scalar(err));
    td_sum += td;
    buffer_.set_priority(idx[static_cast<size_t>(i)], td + 1e-3);
  }
  Graph::NodeId loss = t.g.scale(total, 1.0 / static_cast<double>(k));
  t.g.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(param_list_.size());
  for (Tensor* p : param_list_) grads.push_back(t.grad_of(*p));
  adam_.step(param_list_, grads);
  ++updates_;
  if (updates_ % spec_.target_update == 0) sync_target();
  return td_sum / k;
}

uint64_t DqlAgent::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor* p : param_list_) h = hash_tensor(*p, h);
  return h;
}

uint64_t DqlAgent::target_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : target_.hidden) {
    h = hash_tensor(l.W, h);
    h = hash_tensor(l.b, h);
  }
  h = hash_tensor(target_.head.W, h);
  return hash_tensor(target_.head.b, h);
}

std::vector<std::pair<std::string, Tensor*>> DqlAgent::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (size_t i = 0; i < online_.hidden.size(); ++i)
    online_.hidden[i].collect_named("online" + std::to_string(i), out);
  online_.head.collect_named("online_head", out);
  for (size_t i = 0; i < target_.hidden.size(); ++i)
    target_.hidden[i].collect_named("target" + std::to_string(i), out);
  target_.head.collect_named("target_head", out);
  for (size_t i = 0; i < adam_.moments_m().size(); ++i) {
    out.emplace_back("adam.m." + std::to_string(i), &adam_.moments_m()[i]);
    out.emplace_back("adam.v." + std::to_string(i), &adam_.moments_v()[i]);
  }
  return out;
}

nlohmann::json DqlAgent::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : online_.hidden) {
    layers.push_back({{"kind", "dense"},
                      {"in", l.in_size()},
                      {"out", l.out_size()},
                      {"activation", activation_name(l.act)}});
  }
  layers.push_back({{"kind", "dense"},
                    {"in", online_.head.in_size()},
                    {"out", online_.head.out_size()},
                    {"activation", "identity"},
                    {"head", "q"}});
  auto named = const_cast<DqlAgent*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> all(named.begin(), named.end());
  // The replay buffer is deliberately not persisted; a reloaded agent
  // resumes with fresh experience.
  nlohmann::json doc = checkpoint_to_json("dql", layers, all);
  doc["env_kind"] = env_kind_name(kind_);
  doc["spec"] = spec_.to_json();
  doc["adam_steps"] = adam_.step_count();
  doc["updates"] = updates_;
  doc["episodes"] = episodes_;
  doc["learning"] = learning_;
  return doc;
}

void DqlAgent::from_json(const nlohmann::json& doc) {
  spec_ = PolicySpec::from_json(doc.at("spec"));
  kind_ = env_kind_from_name(doc.at("env_kind").get<std::string>());
  init_network(0);
  checkpoint_from_json(doc, "dql", named_params());
  adam_.set_step_count(doc.value("adam_steps", int64_t{0}));
  updates_ = doc.value("updates", int64_t{0});
  episodes_ = doc.value("episodes", int64_t{0});
  learning_ = doc.value("learning", true);
}

std::shared_ptr<Agent> make_naive(const std::string& kind) {
  if (kind == "nr" || kind == "naive_random") return std::make_shared<RandomAgent>();
  if (kind == "ns" || kind == "naive_greedy") return std::make_shared<GreedyAgent>();
  fail(ErrorKind::kConfig, "unknown naive agent: " + kind);
}

std::shared_ptr<Agent> make_learner(const std::string& algo, EnvKind kind,
                                    const PolicySpec& spec, uint64_t seed) {
  if (algo == "ppo") return std::make_shared<PpoAgent>(kind, spec, seed);
  if (algo == "dql") return std::make_shared<DqlAgent>(kind, spec, seed);
  fail(ErrorKind::kConfig, "unknown algorithm: " + algo);
}

}  // namespace winne
