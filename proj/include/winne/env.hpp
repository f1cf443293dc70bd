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

#ifndef WINNE_ENV_HPP_
#define WINNE_ENV_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace winne {

enum class EnvKind { kDuel, kCards };

const char* env_kind_name(EnvKind k);
EnvKind env_kind_from_name(const std::string& name);

struct StepInfo {
  double damage = 0.0;       // duel: damage dealt during the turn
  int cards_discarded = 0;   // cards: pieces placed on the board
  int finish_position = 0;   // cards: 1-based position if the actor finished
  bool match_finished = false;
};

struct StepOutcome {
  std::vector<double> rewards;  // one entry per player
  bool terminal = false;
  StepInfo info;
};

// Common surface over the two engines. States are deterministic value
// objects: step mutates this instance, project never does.
class GameEnv {
 public:
  virtual ~GameEnv() = default;

  virtual EnvKind kind() const = 0;
  virtual int num_players() const = 0;
  virtual int action_count() const = 0;
  virtual int full_obs_size() const = 0;
  virtual int public_obs_size() const = 0;

  virtual void reset(uint64_t seed) = 0;
  virtual bool terminal() const = 0;
  virtual int winner() const = 0;  // -1 while the game is running
  virtual int turn() const = 0;

  // Players expected to submit an action this turn. Both duel players act
  // simultaneously; the card game is strictly sequential.
  virtual std::vector<int> to_act() const = 0;

  virtual std::vector<uint8_t> legal_mask(int player) const = 0;

  // Superset of legal_mask(modeled) derivable from public information only.
  // The duel mask is exactly the legal mask; the card mask ignores hand
  // contents and constrains by the board alone.
  virtual std::vector<uint8_t> public_legal_mask(int modeled) const = 0;

  // Applies one action per entry of to_act(), in that order.
  virtual StepOutcome step(const std::vector<int>& actions) = 0;

  virtual std::unique_ptr<GameEnv> clone() const = 0;

  // Pure forward model: applies `action` for `player` on a copy, resolving
  // nothing stochastic and emitting no rewards.
  virtual std::unique_ptr<GameEnv> project(int player, int action) const = 0;

  virtual std::vector<double> encode_full(int player) const = 0;
  virtual std::vector<double> encode_public(int observer, int modeled) const = 0;

  virtual uint64_t state_hash() const = 0;
};

std::unique_ptr<GameEnv> make_env(EnvKind kind);

}  // namespace winne

#endif  // WINNE_ENV_HPP_
