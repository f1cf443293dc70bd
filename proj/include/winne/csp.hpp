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

#ifndef WINNE_CSP_HPP_
#define WINNE_CSP_HPP_

#include <deque>
#include <optional>

#include <json.hpp>

#include "winne/env.hpp"
#include "winne/nn.hpp"

namespace winne {

// Contrastive strategy predictor configuration. The encoder is two stacked
// GRU layers over windows of public states; the entangled head is 16 wide
// in both scenarios.
struct CspConfig {
  int input_dim = 0;
  int action_dim = 0;
  int gru_units = 16;
  int entangled = 16;
  int seq_len = 5;
  int batch = 16;
  double temperature = 0.1;
  double lr = 5e-3;
  double contrastive_weight = 1.0;
  int train_steps_per_turn = 1;
  int capacity = 2048;
  int min_windows = 16;
  int sample_recent = 0;  // draw training windows from the newest K only (0 = all)

  nlohmann::json to_json() const;
  static CspConfig from_json(const nlohmann::json& j);
};

CspConfig csp_default_config(EnvKind kind);

// One observed opponent turn: the public state they acted on, the action
// they took, and the publicly inferable legal mask at that moment.
struct CspObservation {
  std::vector<double> state;
  int action = -1;
  std::vector<uint8_t> mask;
};

struct CspWindow {
  // Exactly seq_len encoder inputs, each the public state concatenated with
  // a one-hot of the opponent's previous action (zeros at match starts).
  std::vector<std::vector<double>> inputs;
  int action = -1;
  std::vector<uint8_t> mask;
};

// Ring of (public state, action) pairs per opponent. Windows are seq_len
// consecutive pairs from one match, zero-padded on the left for short
// histories; they never straddle a match boundary.
class SequenceBuffer {
 public:
  SequenceBuffer(int capacity, int seq_len, int state_dim, int action_dim)
      : capacity_(capacity), seq_len_(seq_len), state_dim_(state_dim),
        action_dim_(action_dim) {}

  static std::vector<double> make_input(const std::vector<double>& state,
                                        int prev_action, int action_dim);

  void push(CspObservation obs);
  void end_match() { ++match_id_; }
  size_t size() const { return entries_.size(); }

  // Every retained pair anchors one window ending at it.
  size_t window_count() const { return entries_.size(); }
  CspWindow window_at(size_t index) const;

  // The most recent up-to-(seq_len-1) encoder inputs of the current match,
  // oldest first; the caller appends the input for the state to predict on.
  std::vector<std::vector<double>> recent_inputs() const;

  // The opponent's latest action within the current match, -1 if none.
  int last_action_in_match() const;

  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  struct Entry {
    CspObservation obs;
    int64_t match;
  };
  int capacity_;
  int seq_len_;
  int state_dim_;
  int action_dim_;
  int64_t match_id_ = 0;
  std::deque<Entry> entries_;
};

struct CspPrediction {
  std::vector<double> distribution;  // zeros on masked-out actions
  std::vector<double> embedding;     // entangled representation (16)
  int top_action = -1;
  double top_prob = 0.0;
};

struct CspTrainStats {
  double contrastive = 0.0;
  double action_xent = 0.0;
};

struct ContrastiveBatch {
  std::vector<CspWindow> genuine;
  std::vector<CspWindow> scrambled;
};

// Windows from this opponent against time-scrambled windows from the
// others (or from itself when it is the only opponent). Balanced halves.
std::optional<ContrastiveBatch> build_batch(
    const SequenceBuffer& own, const std::vector<const SequenceBuffer*>& others,
    int n, int seq_len, RngStream& rng, int recent_limit = 0);

class CspNetwork {
 public:
  CspNetwork(CspConfig cfg, uint64_t init_seed);

  const CspConfig& config() const { return cfg_; }

  CspPrediction predict(const std::vector<std::vector<double>>& window,
                        const std::vector<uint8_t>& mask) const;

  // One Adam step on contrastive(embeddings) + action cross-entropy over
  // the genuine windows' next actions.
  CspTrainStats train_step(const ContrastiveBatch& batch);

  uint64_t param_hash() const;
  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& doc);

 private:
  void init_network(uint64_t init_seed);
  // Shared forward pass: returns the entangled embedding node.
  Graph::NodeId encode(Tape& t, const std::vector<std::vector<double>>& states) const;
  std::vector<std::pair<std::string, Tensor*>> named_params();

  CspConfig cfg_;
  GruCell gru1_, gru2_;
  DenseLayer entangled_;
  DenseLayer action_head_;
  Adam adam_;
  std::vector<Tensor*> param_list_;
};

}  // namespace winne

#endif  // WINNE_CSP_HPP_
