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

#ifndef WINNE_DUEL_ENV_HPP_
#define WINNE_DUEL_ENV_HPP_

#include <array>

#include "winne/env.hpp"
#include "winne/rng.hpp"

namespace winne {

// Two-player elemental duel. Teams of three creatures, four moves each, six
// actions (move 0-3, switch to lower/higher benched slot as 4/5). Both
// players pick simultaneously; switches resolve before moves, then by
// descending active speed with seeded coin ties.
//
// Damage is power times an element multiplier from a cyclic four-type chart:
// each element hits the next one for x2 and the previous one for x0.5.
class DuelEnv : public GameEnv {
 public:
  static constexpr int kTeamSize = 3;
  static constexpr int kMoves = 4;
  static constexpr int kActions = 6;
  static constexpr int kElements = 4;
  static constexpr int kMaxHp = 100;
  static constexpr int kFullObs = 22;
  static constexpr int kPublicObs = 10;

  struct Move {
    int power = 0;  // 10..100
    int element = 0;
  };

  struct Creature {
    int element = 0;
    int hp = kMaxHp;
    int speed = 0;  // 20..140
    std::array<Move, kMoves> moves;
    bool alive() const { return hp > 0; }
  };

  struct Side {
    std::array<Creature, kTeamSize> team;
    int active = 0;
    const Creature& active_creature() const { return team[static_cast<size_t>(active)]; }
    int alive_count() const;
  };

  static double type_multiplier(int attack_element, int defend_element);

  EnvKind kind() const override { return EnvKind::kDuel; }
  int num_players() const override { return 2; }
  int action_count() const override { return kActions; }
  int full_obs_size() const override { return kFullObs; }
  int public_obs_size() const override { return kPublicObs; }

  void reset(uint64_t seed) override;
  bool terminal() const override { return terminal_; }
  int winner() const override { return winner_; }
  int turn() const override { return turn_; }
  std::vector<int> to_act() const override;
  std::vector<uint8_t> legal_mask(int player) const override;
  std::vector<uint8_t> public_legal_mask(int modeled) const override;
  StepOutcome step(const std::vector<int>& actions) override;
  std::unique_ptr<GameEnv> clone() const override;
  std::unique_ptr<GameEnv> project(int player, int action) const override;
  std::vector<double> encode_full(int player) const override;
  std::vector<double> encode_public(int observer, int modeled) const override;
  uint64_t state_hash() const override;

  const Side& side(int player) const { return sides_[static_cast<size_t>(player)]; }

  // Remaining hit points summed over a side, used for cap adjudication.
  int total_hp(int player) const;

 private:
  // Applies one player's action. Returns damage dealt; accumulates rewards.
  double apply_action(int player, int action, std::vector<double>* rewards);
  void check_terminal(std::vector<double>* rewards);
  int bench_slot(int player, int which) const;  // which in {0,1}

  std::array<Side, 2> sides_;
  int turn_ = 0;
  bool terminal_ = false;
  int winner_ = -1;
  RngStream rng_{0};
};

}  // namespace winne

#endif  // WINNE_DUEL_ENV_HPP_
