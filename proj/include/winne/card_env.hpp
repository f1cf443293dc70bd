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

#ifndef WINNE_CARD_ENV_HPP_
#define WINNE_CARD_ENV_HPP_

#include <array>

#include "winne/env.hpp"
#include "winne/rng.hpp"

namespace winne {

// Four-player shedding card game. The deck holds v copies of each value
// v = 1..11 plus two jokers (68 cards, 17 per hand). A turn is a discard or
// a pass; a discard (v, q, j) places q copies of value v plus j jokers and
// must strictly undercut the board value with at least the board quantity.
// When everyone else passes, the board clears ("pizza") and the last
// discarder leads. Emptying the hand first wins the match (3/2/1/0 points by
// finish order); a game runs matches until somebody reaches 15 points.
//
// Action ids (200): 0..197 discards ordered by value, then quantity, then
// jokers; 198 pass; 199 discards all remaining jokers (legal only when the
// hand holds nothing else, on a clean board).
class CardEnv : public GameEnv {
 public:
  static constexpr int kPlayers = 4;
  static constexpr int kValues = 11;
  static constexpr int kJoker = 12;
  static constexpr int kDeckSize = 68;
  static constexpr int kHandSize = 17;
  static constexpr int kActions = 200;
  static constexpr int kPassAction = 198;
  static constexpr int kJokerOnlyAction = 199;
  static constexpr int kBoardSlots = 11;
  static constexpr int kFullObs = 28;
  static constexpr int kPublicObs = 11;
  static constexpr int kTargetScore = 15;

  struct Board {
    int value = 0;   // 0 when clean; kJoker for a joker-only discard
    int cards = 0;   // copies of `value`
    int jokers = 0;  // jokers played alongside
    bool clean() const { return value == 0; }
    int pieces() const { return cards + jokers; }
  };

  struct Discard {
    int value = 0;
    int quantity = 0;
    int jokers = 0;
  };

  static int discard_action_id(int value, int quantity, int jokers);
  static Discard decode_discard(int action_id);

  EnvKind kind() const override { return EnvKind::kCards; }
  int num_players() const override { return kPlayers; }
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

  int current_player() const { return current_; }
  int hand_total(int player) const;
  const std::array<int, 13>& hand(int player) const {
    return hands_[static_cast<size_t>(player)];
  }
  const Board& board() const { return board_; }
  int match_index() const { return match_index_; }
  int match_turn() const { return match_turn_; }
  // True only on projected states whose action closed out a match.
  bool between_matches() const { return between_matches_; }
  const std::array<int, kPlayers>& game_scores() const { return game_scores_; }
  const std::array<int, kPlayers>& match_points() const { return match_points_; }
  const std::vector<int>& finish_order() const { return finish_order_; }

  // Count of every card value across hands, board, and discard pile. Value v
  // must always hold v copies (v = 1..11) and two jokers at index 12.
  std::array<int, 13> card_census() const;

  // Final standing, 1 = best. Valid once terminal.
  std::vector<int> ranks() const;

 private:
  void new_match();
  int next_active_after(int player) const;
  int active_count() const;
  StepOutcome apply(int action, bool projecting);
  void finish_player(int player, StepOutcome* out);
  void end_match(bool projecting);

  std::array<std::array<int, 13>, kPlayers> hands_{};
  std::array<int, 13> pile_{};
  Board board_;
  std::array<bool, kPlayers> passed_{};
  std::array<int, kPlayers> match_points_{};
  std::array<int, kPlayers> game_scores_{};
  std::vector<int> finish_order_;
  int current_ = 0;
  int last_discarder_ = -1;
  int leader_ = 0;
  int match_index_ = 1;
  int turn_ = 0;
  int match_turn_ = 0;
  bool between_matches_ = false;  // set only inside projections
  bool terminal_ = false;
  int winner_ = -1;
  RngStream rng_{0};
};

}  // namespace winne

#endif  // WINNE_CARD_ENV_HPP_
