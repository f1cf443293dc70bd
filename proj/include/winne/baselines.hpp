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

#ifndef WINNE_BASELINES_HPP_
#define WINNE_BASELINES_HPP_

#include <memory>
#include <optional>

#include "winne/agent.hpp"
#include "winne/nn.hpp"

namespace winne {

// Hyperparameters for one learner. The paper presets carry the published
// final architectures; the desk presets keep the same shapes with learning
// rates that stay stable at small scale.
struct PolicySpec {
  std::vector<int> layers;
  Activation activation = Activation::kTanh;
  double gamma = 0.95;
  double lr = 1e-3;

  // PPO
  double clip_eps = 0.2;
  double c_value = 0.5;
  double c_entropy = 0.01;
  int epochs = 4;
  int update_every = 1;  // episodes accumulated per PPO update
  // Optional trainable input-to-logits skip block. When enabled, columns
  // [skip_offset, skip_offset + actions) start as skip_init * identity so a
  // fresh policy initially follows action scores embedded in its input.
  bool actor_input_skip = false;
  int skip_offset = 0;
  double skip_init = 0.0;

  // DQL
  bool double_q = true;
  int target_update = 500;
  bool prioritized = true;
  int buffer_capacity = 5000;
  int batch_size = 32;
  double priority_alpha = 0.6;
  double beta_start = 0.4;
  int beta_anneal_steps = 5000;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_episodes = 300;

  nlohmann::json to_json() const;
  static PolicySpec from_json(const nlohmann::json& j);
};

PolicySpec ppo_paper_spec(EnvKind kind);
PolicySpec dql_paper_spec(EnvKind kind);
PolicySpec ppo_desk_spec(EnvKind kind);
PolicySpec dql_desk_spec(EnvKind kind);
PolicySpec spec_preset(const std::string& algo, const std::string& preset, EnvKind kind);

// Uniform choice over the legal actions.
class RandomAgent : public Agent {
 public:
  std::string algorithm() const override { return "naive_random"; }
  int act(const GameEnv& env, int player, RngStream& rng, bool greedy,
          ActDiag* diag) override;
};

// Simple strategy: maximum effective damage in the duel, maximum-size
// discard (ties to the lowest value, then fewest jokers) in the card game.
class GreedyAgent : public Agent {
 public:
  std::string algorithm() const override { return "naive_greedy"; }
  int act(const GameEnv& env, int player, RngStream& rng, bool greedy,
          ActDiag* diag) override;
};

struct PpoStats {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

// Actor-critic over a shared dense trunk, trained with the clipped PPO
// surrogate on Monte-Carlo returns (no GAE).
class PpoAgent : public Agent {
 public:
  PpoAgent(EnvKind kind, PolicySpec spec, uint64_t init_seed);
  // Detached policy head over an arbitrary input/action space (the
  // composite agent's local policies use this form).
  PpoAgent(int input_dim, int action_dim, EnvKind kind, PolicySpec spec,
           uint64_t init_seed);

  std::string algorithm() const override { return "ppo"; }
  int act(const GameEnv& env, int player, RngStream& rng, bool greedy,
          ActDiag* diag) override;
  bool is_learning() const override { return learning_; }
  void set_learning(bool on) override { learning_ = on; }
  void observe_transition(const Transition& t) override;
  void end_episode(RngStream& rng) override;
  uint64_t param_hash() const override;
  nlohmann::json to_json() const override;
  void from_json(const nlohmann::json& doc) override;

  // One PPO update on a batch of complete-episode transitions. Returns the
  // first-epoch loss components.
  PpoStats update(const std::vector<Transition>& batch);

  // Action distribution and state value for an arbitrary observation.
  std::vector<double> action_probs(const std::vector<double>& obs,
                                   const std::vector<uint8_t>& mask) const;
  double state_value(const std::vector<double>& obs) const;

  int select(const std::vector<double>& obs, const std::vector<uint8_t>& mask,
             RngStream& rng, bool greedy, double* logprob) const;

  const PolicySpec& spec() const { return spec_; }
  EnvKind env_kind() const { return kind_; }
  std::unique_ptr<PpoAgent> clone_frozen() const;

 private:
  void init_network(uint64_t init_seed);
  Graph::NodeId actor_trunk(Tape& t, Graph::NodeId x) const;
  Graph::NodeId critic_trunk(Tape& t, Graph::NodeId x) const;
  Graph::NodeId actor_logits(Tape& t, Graph::NodeId x) const;
  std::vector<std::pair<std::string, Tensor*>> named_params();

  EnvKind kind_;
  PolicySpec spec_;
  int input_dim_ = 0;
  int action_dim_ = 0;
  std::vector<DenseLayer> actor_hidden_;
  std::vector<DenseLayer> critic_hidden_;
  DenseLayer actor_;
  DenseLayer critic_;
  DenseLayer skip_;
  Adam adam_;
  std::vector<Tensor*> param_list_;
  std::vector<Transition> trajectory_;
  int64_t episodes_seen_ = 0;
  bool learning_ = true;
};

// Ring replay buffer with optional proportional prioritization.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void push(Transition t, double priority);
  size_t size() const { return items_.size(); }
  const Transition& at(size_t i) const { return items_[i]; }
  void set_priority(size_t i, double p) { priorities_[i] = p; }
  double max_priority() const;

  // Proportional sampling over priority^alpha. With equal priorities this
  // reduces to uniform sampling.
  std::vector<size_t> sample(int k, double alpha, RngStream& rng) const;
  std::vector<size_t> sample_uniform(int k, RngStream& rng) const;

  // Importance weights normalized by the batch maximum.
  std::vector<double> importance_weights(const std::vector<size_t>& idx, double alpha,
                                         double beta) const;

 private:
  int capacity_;
  size_t next_ = 0;
  std::vector<Transition> items_;
  std::vector<double> priorities_;
};

// Double deep Q-learning with a periodically synced target network,
// prioritized replay, and epsilon-greedy exploration.
class DqlAgent : public Agent {
 public:
  DqlAgent(EnvKind kind, PolicySpec spec, uint64_t init_seed);

  std::string algorithm() const override { return "dql"; }
  int act(const GameEnv& env, int player, RngStream& rng, bool greedy,
          ActDiag* diag) override;
  bool is_learning() const override { return learning_; }
  void set_learning(bool on) override { learning_ = on; }
  void observe_transition(const Transition& t) override;
  void end_episode(RngStream& rng) override;
  uint64_t param_hash() const override;
  nlohmann::json to_json() const override;
  void from_json(const nlohmann::json& doc) override;

  // One minibatch update; empty when the buffer is not ready.
  std::optional<double> update(RngStream& rng);

  std::vector<double> q_values(const std::vector<double>& obs) const;
  std::vector<double> q_values_target(const std::vector<double>& obs) const;
  int64_t update_count() const { return updates_; }
  uint64_t target_hash() const;
  double epsilon() const;
  ReplayBuffer& buffer() { return buffer_; }
  const PolicySpec& spec() const { return spec_; }

 private:
  struct QNet {
    std::vector<DenseLayer> hidden;
    DenseLayer head;
    Graph::NodeId forward(Tape& t, Graph::NodeId x) const;
  };
  void init_network(uint64_t init_seed);
  std::vector<double> forward_values(const QNet& net, const std::vector<double>& obs) const;
  void sync_target();
  std::vector<std::pair<std::string, Tensor*>> named_params();

  EnvKind kind_;
  PolicySpec spec_;
  QNet online_;
  QNet target_;
  Adam adam_;
  std::vector<Tensor*> param_list_;
  ReplayBuffer buffer_;
  RngStream update_rng_{0};
  int64_t updates_ = 0;
  int64_t episodes_ = 0;
  bool learning_ = true;
};

std::shared_ptr<Agent> make_naive(const std::string& kind);
std::shared_ptr<Agent> make_learner(const std::string& algo, EnvKind kind,
                                    const PolicySpec& spec, uint64_t seed);

}  // namespace winne

#endif  // WINNE_BASELINES_HPP_
