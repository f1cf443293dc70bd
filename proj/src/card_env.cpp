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

#include "winne/card_env.hpp"

#include <algorithm>
#include <string>

#include "winne/error.hpp"
#include "winne/tensor.hpp"

namespace winne {

int CardEnv::discard_action_id(int value, int quantity, int jokers) {
  require(value >= 1 && value <= kValues && quantity >= 1 && quantity <= value &&
              jokers >= 0 && jokers <= 2,
          ErrorKind::kContract, "cards: bad discard triple");
  return 3 * (value * (value - 1) / 2) + 3 * (quantity - 1) + jokers;
}

CardEnv::Discard CardEnv::decode_discard(int action_id) {
  require(action_id >= 0 && action_id < kPassAction, ErrorKind::kContract,
          "cards: not a discard action");
  int v = 1;
  while (3 * (v * (v + 1) / 2) <= action_id) ++v;
  int rem = action_id - 3 * (v * (v - 1) / 2);
  Discard d;
  d.value = v;
  d.quantity = rem / 3 + 1;
  d.jokers = rem % 3;
  return d;
}

void CardEnv::reset(uint64_t seed) {
  rng_ = RngStream(seed);
  game_scores_.fill(0);
  leader_ = 0;
  match_index_ = 1;
  turn_ = 0;
  terminal_ = false;
  between_matches_ = false;
  winner_ = -1;
  new_match();
}

void CardEnv::new_match() {
  std::vector<int> deck;
  deck.reserve(kDeckSize);
  for (int v = 1; v <= kValues; ++v) {
    for (int c = 0; c < v; ++c) deck.push_back(v);
  }
  deck.push_back(kJoker);
  deck.push_back(kJoker);
  rng_.shuffle(deck);
  for (auto& hand : hands_) hand.fill(0);
  for (size_t i = 0; i < deck.size(); ++i) {
    hands_[i % kPlayers][static_cast<size_t>(deck[i])] += 1;
  }
  pile_.fill(0);
  board_ = Board{};
  passed_.fill(false);
  match_points_.fill(0);
  finish_order_.clear();
  last_discarder_ = -1;
  current_ = leader_;
  match_turn_ = 0;
}

int CardEnv::hand_total(int player) const {
  int sum = 0;
  for (int v = 1; v <= kJoker; ++v) sum += hands_[static_cast<size_t>(player)][static_cast<size_t>(v)];
  return sum;
}

int CardEnv::active_count() const {
  int n = 0;
  for (int p = 0; p < kPlayers; ++p) n += hand_total(p) > 0 ? 1 : 0;
  return n;
}

int CardEnv::next_active_after(int player) const {
  for (int k = 1; k <= kPlayers; ++k) {
    int q = (player + k) % kPlayers;
    if (hand_total(q) > 0) return q;
  }
  return -1;
}

std::vector<int> CardEnv::to_act() const {
  require(!terminal_, ErrorKind::kTerminalState, "cards: game is over");
  return {current_};
}

std::vector<uint8_t> CardEnv::legal_mask(int player) const {
  require(!terminal_, ErrorKind::kTerminalState, "cards: game is over");
  require(player >= 0 && player < kPlayers, ErrorKind::kContract, "cards: bad player");
  std::vector<uint8_t> mask(kActions, 0);
  const auto& hand = hands_[static_cast<size_t>(player)];
  const int total = hand_total(player);
  if (total == 0) return mask;  // finished players never act

  const bool clean = board_.clean();
  for (int v = 1; v <= kValues; ++v) {
    if (hand[static_cast<size_t>(v)] == 0) continue;
    for (int q = 1; q <= std::min(v, hand[static_cast<size_t>(v)]); ++q) {
      for (int j = 0; j <= std::min(2, hand[kJoker]); ++j) {
        bool ok = clean || (v < board_.value && q + j >= board_.pieces());
        if (ok) mask[static_cast<size_t>(discard_action_id(v, q, j))] = 1;
      }
    }
  }
  // Jokers-only hands discard their jokers when leading a clean board.
  if (clean && total == hand[kJoker] && hand[kJoker] > 0)
    mask[kJokerOnlyAction] = 1;
  // A clean-board turn with a nonempty hand must discard.
  if (!clean) mask[kPassAction] = 1;
  return mask;
}

std::vector<uint8_t> CardEnv::public_legal_mask(int modeled) const {
  require(!terminal_, ErrorKind::kTerminalState, "cards: game is over");
  require(modeled >= 0 && modeled < kPlayers, ErrorKind::kContract, "cards: bad player");
  // Board-side constraints only; a superset of the true mask for any hand.
  std::vector<uint8_t> mask(kActions, 0);
  const bool clean = board_.clean();
  for (int v = 1; v <= kValues; ++v) {
    for (int q = 1; q <= v; ++q) {
      for (int j = 0; j <= 2; ++j) {
        bool ok = clean || (v < board_.value && q + j >= board_.pieces());
        if (ok) mask[static_cast<size_t>(discard_action_id(v, q, j))] = 1;
      }
    }
  }
  if (clean) mask[kJokerOnlyAction] = 1;
  if (!clean) mask[kPassAction] = 1;
  return mask;
}

void CardEnv::finish_player(int player, StepOutcome* out) {
  finish_order_.push_back(player);
  const int position = static_cast<int>(finish_order_.size());
  static constexpr int kPoints[] = {0, 3, 2, 1, 0};
  match_points_[static_cast<size_t>(player)] = kPoints[position];
  if (out) {
    out->info.finish_position = position;
    if (position == 1) out->rewards[static_cast<size_t>(player)] += 1.0;
  }
}

void CardEnv::end_match(bool projecting) {
  // The one remaining active player takes the last slot.
  for (int p = 0; p < kPlayers; ++p) {
    if (hand_total(p) > 0) {
      finish_order_.push_back(p);
      break;
    }
  }
  for (int p = 0; p < kPlayers; ++p)
    game_scores_[static_cast<size_t>(p)] += match_points_[static_cast<size_t>(p)];

  int best = 0;
  for (int p = 1; p < kPlayers; ++p) {
    if (game_scores_[static_cast<size_t>(p)] > game_scores_[static_cast<size_t>(best)])
      best = p;
  }
  if (game_scores_[static_cast<size_t>(best)] >= kTargetScore) {
    terminal_ = true;
    // Ties on total score break toward the better finish this match.
    winner_ = best;
    for (int p = 0; p < kPlayers; ++p) {
      if (p == best || game_scores_[static_cast<size_t>(p)] !=
                           game_scores_[static_cast<size_t>(best)])
        continue;
      auto pos = [&](int q) {
        return std::find(finish_order_.begin(), finish_order_.end(), q) -
               finish_order_.begin();
      };
      if (pos(p) < pos(winner_)) winner_ = p;
    }
    return;
  }
  if (projecting) {
    between_matches_ = true;  // stop here: redealing would consume randomness
    return;
  }
  leader_ = finish_order_.front();
  ++match_index_;
  new_match();
}

StepOutcome CardEnv::apply(int action, bool projecting) {
  StepOutcome out;
  out.rewards.assign(kPlayers, 0.0);
  const int p = current_;
  const auto mask = legal_mask(p);
  require(action >= 0 && action < kActions && mask[static_cast<size_t>(action)],
          ErrorKind::kIllegalAction,
          "cards: illegal action " + std::to_string(action) + " for player " +
              std::to_string(p));
  auto& hand = hands_[static_cast<size_t>(p)];

  if (action == kPassAction) {
    passed_[static_cast<size_t>(p)] = true;
    bool pizza = true;
    for (int q = 0; q < kPlayers; ++q) {
      if (hand_total(q) == 0 || q == last_discarder_) continue;
      if (!passed_[static_cast<size_t>(q)]) pizza = false;
    }
    if (pizza) {
      if (!board_.clean()) {
        if (board_.value == kJoker) {
          pile_[kJoker] += board_.cards + board_.jokers;
        } else {
          pile_[static_cast<size_t>(board_.value)] += board_.cards;
          pile_[kJoker] += board_.jokers;
        }
      }
      board_ = Board{};
      passed_.fill(false);
      current_ = (last_discarder_ >= 0 && hand_total(last_discarder_) > 0)
                     ? last_discarder_
                     : next_active_after(last_discarder_ >= 0 ? last_discarder_ : p);
      last_discarder_ = -1;
    } else {
      current_ = next_active_after(p);
    }
  } else {
    // Cover the previous board: its cards move to the pile.
    if (!board_.clean()) {
      if (board_.value == kJoker) {
        pile_[kJoker] += board_.cards + board_.jokers;
      } else {
        pile_[static_cast<size_t>(board_.value)] += board_.cards;
        pile_[kJoker] += board_.jokers;
      }
    }
    if (action == kJokerOnlyAction) {
      const int j = hand[kJoker];
      hand[kJoker] = 0;
      board_ = Board{kJoker, j, 0};
      out.info.cards_discarded = j;
    } else {
      const Discard d = decode_discard(action);
      hand[static_cast<size_t>(d.value)] -= d.quantity;
      hand[kJoker] -= d.jokers;
      board_ = Board{d.value, d.quantity, d.jokers};
      out.info.cards_discarded = d.quantity + d.jokers;
    }
    passed_.fill(false);
    last_discarder_ = p;

    if (hand_total(p) == 0) finish_player(p, &out);
    if (active_count() <= 1) {
      out.info.match_finished = true;
      ++turn_;
      ++match_turn_;
      end_match(projecting);  // redeals unless the game is over or projecting
      out.terminal = terminal_;
      return out;
    }
    current_ = next_active_after(p);
  }
  ++turn_;
  ++match_turn_;
  out.terminal = terminal_;
  return out;
}

StepOutcome CardEnv::step(const std::vector<int>& actions) {
  require(!terminal_, ErrorKind::kTerminalState, "cards: game is over");
  require(!between_matches_, ErrorKind::kContract,
          "cards: projected state cannot be stepped across a match boundary");
  require(actions.size() == 1, ErrorKind::kContract, "cards: one action per turn");
  return apply(actions[0], false);
}

std::unique_ptr<GameEnv> CardEnv::clone() const {
  return std::make_unique<CardEnv>(*this);
}

std::unique_ptr<GameEnv> CardEnv::project(int player, int action) const {
  require(player == current_, ErrorKind::kContract,
          "cards: projection must be for the player to act");
  auto copy = std::make_unique<CardEnv>(*this);
  copy->apply(action, true);
  return copy;
}

std::vector<double> CardEnv::encode_full(int player) const {
  // Layout (28): 17 hand slots (value / 12, jokers as 12, sorted descending,
  // zero padded) then the 11 board slots.
  std::vector<double> v;
  v.reserve(kFullObs);
  std::vector<int> cards;
  const auto& hand = hands_[static_cast<size_t>(player)];
  for (int value = kJoker; value >= 1; --value) {
    for (int c = 0; c < hand[static_cast<size_t>(value)]; ++c) cards.push_back(value);
  }
  for (int i = 0; i < kHandSize; ++i) {
    v.push_back(i < static_cast<int>(cards.size())
                    ? cards[static_cast<size_t>(i)] / 12.0
                    : 0.0);
  }
  const auto pub = encode_public(player, (player + 1) % kPlayers);
  v.insert(v.end(), pub.begin(), pub.end());
  return v;
}

std::vector<double> CardEnv::encode_public(int observer, int modeled) const {
  require(observer != modeled, ErrorKind::kContract,
          "cards: observer must differ from modeled player");
  // The 11 board slots: q+j copies of value/12 (jokers stand in for the
  // value they accompany), joker-only discards render as 1.0.
  std::vector<double> v(kPublicObs, 0.0);
  if (!board_.clean()) {
    const int pieces = std::min(board_.pieces(), kBoardSlots);
    for (int i = 0; i < pieces; ++i) v[static_cast<size_t>(i)] = board_.value / 12.0;
  }
  return v;
}

std::array<int, 13> CardEnv::card_census() const {
  std::array<int, 13> counts{};
  for (int p = 0; p < kPlayers; ++p) {
    for (int v = 1; v <= kJoker; ++v)
      counts[static_cast<size_t>(v)] += hands_[static_cast<size_t>(p)][static_cast<size_t>(v)];
  }
  for (int v = 1; v <= kJoker; ++v) counts[static_cast<size_t>(v)] += pile_[static_cast<size_t>(v)];
  if (!board_.clean()) {
    if (board_.value == kJoker) {
      counts[kJoker] += board_.cards + board_.jokers;
    } else {
      counts[static_cast<size_t>(board_.value)] += board_.cards;
      counts[kJoker] += board_.jokers;
    }
  }
  return counts;
}

std::vector<int> CardEnv::ranks() const {
  std::vector<int> order(kPlayers);
  for (int p = 0; p < kPlayers; ++p) order[static_cast<size_t>(p)] = p;
  std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
    if (a == winner_) return true;
    if (b == winner_) return false;
    return game_scores_[static_cast<size_t>(a)] > game_scores_[static_cast<size_t>(b)];
  });
  std::vector<int> rank(kPlayers, 0);
  for (int i = 0; i < kPlayers; ++i) rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i + 1;
  return rank;
}

uint64_t CardEnv::state_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](int x) { h = fnv1a64(&x, sizeof(x), h); };
  for (const auto& hand : hands_) {
    for (int v = 1; v <= kJoker; ++v) mix(hand[static_cast<size_t>(v)]);
  }
  for (int v = 1; v <= kJoker; ++v) mix(pile_[static_cast<size_t>(v)]);
  mix(board_.value);
  mix(board_.cards);
  mix(board_.jokers);
  for (bool b : passed_) mix(b ? 1 : 0);
  for (int s : match_points_) mix(s);
  for (int s : game_scores_) mix(s);
  for (int f : finish_order_) mix(f);
  mix(current_);
  mix(last_discarder_);
  mix(match_index_);
  mix(turn_);
  mix(terminal_ ? 1 : 0);
  mix(winner_);
  return h;
}

}  // namespace winne
