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

#ifndef WINNE_AGENT_HPP_
#define WINNE_AGENT_HPP_

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "winne/env.hpp"
#include "winne/rng.hpp"

namespace winne {

struct Transition {
  std::vector<double> obs;
  std::vector<uint8_t> mask;
  int action = -1;
  double logprob = 0.0;
  double reward = 0.0;
  std::vector<double> next_obs;
  std::vector<uint8_t> next_mask;
  bool done = false;
};

// Diagnostics filled by act(). Only the composite agent populates the
// prediction fields.
struct ActDiag {
  double logprob = 0.0;
  int initial_action = -1;
  int predicted_opponent_action = -1;
  double p_hat = 0.0;       // CSP probability of the predicted response
  double p_hat_exec = 0.0;  // same, for the action actually executed
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string algorithm() const = 0;

  // Picks a legal action. Sampling draws from the agent's masked
  // distribution; greedy takes the masked argmax.
  virtual int act(const GameEnv& env, int player, RngStream& rng,
                  bool greedy = false, ActDiag* diag = nullptr) = 0;

  virtual bool is_learning() const { return false; }
  virtual void set_learning(bool) {}

  // Match lifecycle. begin_match announces seat assignments; the card game
  // calls begin/end_episode once per match, the duel once per game.
  virtual void begin_match(const GameEnv&, int /*self_player*/,
                           const std::map<int, std::string>& /*opponent_ids*/) {}
  virtual void begin_episode() {}
  virtual void observe_transition(const Transition&) {}
  // Fired before an opponent's action resolves; state_before is the state
  // the opponent acted on.
  virtual void observe_opponent(const GameEnv& /*state_before*/, int /*opponent_player*/,
                                const std::string& /*opponent_id*/, int /*action*/) {}
  virtual void end_episode(RngStream&) {}

  virtual uint64_t param_hash() const { return 0; }

  virtual nlohmann::json to_json() const { return nlohmann::json::object(); }
  virtual void from_json(const nlohmann::json&) {}
};

}  // namespace winne

#endif  // WINNE_AGENT_HPP_
