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

#include "winne/duel_env.hpp"

#include <algorithm>
#include <string>

#include "winne/error.hpp"
#include "winne/tensor.hpp"

namespace winne {

int DuelEnv::Side::alive_count() const {
  int n = 0;
  for (const Creature& c : team) n += c.alive() ? 1 : 0;
  return n;
}

double DuelEnv::type_multiplier(int attack_element, int defend_element) {
  if (defend_element == (attack_element + 1) % kElements) return 2.0;
  if (defend_element == (attack_element + kElements - 1) % kElements) return 0.5;
  return 1.0;
}

void DuelEnv::reset(uint64_t seed) {
  rng_ = RngStream(seed);
  for (Side& side : sides_) {
    for (Creature& c : side.team) {
      c.element = rng_.uniform_int(0, kElements - 1);
      c.hp = kMaxHp;
      c.speed = rng_.uniform_int(20, 140);
      for (Move& m : c.moves) {
        // Even powers keep damage integral under the x0.5 multiplier.
        m.power = 2 * rng_.uniform_int(5, 50);
        m.element = rng_.uniform_int(0, kElements - 1);
      }
    }
    side.active = 0;
  }
  turn_ = 0;
  terminal_ = false;
  winner_ = -1;
}

std::vector<int> DuelEnv::to_act() const {
  require(!terminal_, ErrorKind::kTerminalState, "duel: game is over");
  return {0, 1};
}

int DuelEnv::bench_slot(int player, int which) const {
  const Side& s = side(player);
  int seen = 0;
  for (int i = 0; i < kTeamSize; ++i) {
    if (i == s.active) continue;
    if (seen == which) return i;
    ++seen;
  }
  return -1;
}

std::vector<uint8_t> DuelEnv::legal_mask(int player) const {
  require(!terminal_, ErrorKind::kTerminalState, "duel: game is over");
  require(player == 0 || player == 1, ErrorKind::kContract, "duel: bad player");
  const Side& s = side(player);
  std::vector<uint8_t> mask(kActions, 0);
  const bool active_alive = s.active_creature().alive();
  if (active_alive) {
    for (int m = 0; m < kMoves; ++m) mask[static_cast<size_t>(m)] = 1;
  }
  for (int w = 0; w < 2; ++w) {
    int slot = bench_slot(player, w);
    if (slot >= 0 && s.team[static_cast<size_t>(slot)].alive())
      mask[static_cast<size_t>(kMoves + w)] = 1;
  }
  return mask;
}

std::vector<uint8_t> DuelEnv::public_legal_mask(int modeled) const {
  // Creature hit points are visible to both players, so the duel legal mask
  // is derivable from public information alone.
  return legal_mask(modeled);
}

double DuelEnv::apply_action(int player, int action, std::vector<double>* rewards) {
  Side& actor = sides_[static_cast<size_t>(player)];
  Side& defender = sides_[static_cast<size_t>(1 - player)];
  if (!actor.active_creature().alive() && action < kMoves) return 0.0;  // lost turn
  if (action >= kMoves) {
    int slot = bench_slot(player, action - kMoves);
    actor.active = slot;
    return 0.0;
  }
  const Creature& attacker = actor.active_creature();
  Creature& target = defender.team[static_cast<size_t>(defender.active)];
  const Move& move = attacker.moves[static_cast<size_t>(action)];
  const double mult = type_multiplier(move.element, target.element);
  const int raw = static_cast<int>(move.power * mult);
  const int damage = std::min(raw, target.hp);
  const bool was_alive = target.alive();
  target.hp -= damage;
  if (rewards) {
    (*rewards)[static_cast<size_t>(player)] += 0.001 * damage;
    if (was_alive && !target.alive())
      (*rewards)[static_cast<size_t>(player)] += 0.1;
  }
  return damage;
}

void DuelEnv::check_terminal(std::vector<double>* rewards) {
  for (int p = 0; p < 2; ++p) {
    if (sides_[static_cast<size_t>(p)].alive_count() == 0) {
      terminal_ = true;
      winner_ = 1 - p;
      if (rewards) {
        (*rewards)[static_cast<size_t>(winner_)] += 1.0;
        (*rewards)[static_cast<size_t>(p)] -= 1.0;
      }
      return;
    }
  }
}

StepOutcome DuelEnv::step(const std::vector<int>& actions) {
  require(!terminal_, ErrorKind::kTerminalState, "duel: game is over");
  require(actions.size() == 2, ErrorKind::kContract, "duel: two actions per turn");
  for (int p = 0; p < 2; ++p) {
    const auto mask = legal_mask(p);
    const int a = actions[static_cast<size_t>(p)];
    require(a >= 0 && a < kActions && mask[static_cast<size_t>(a)],
            ErrorKind::kIllegalAction,
            "duel: illegal action " + std::to_string(a) + " for player " +
                std::to_string(p));
  }

  StepOutcome out;
  out.rewards.assign(2, 0.0);

  // Switches resolve before moves; within a category the faster active
  // creature goes first, speed ties by coin.
  int first = sides_[0].active_creature().speed > sides_[1].active_creature().speed ? 0
              : sides_[0].active_creature().speed < sides_[1].active_creature().speed
                  ? 1
                  : (rng_.coin() ? 0 : 1);
  std::vector<int> order;
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < 2; ++k) {
      int p = k == 0 ? first : 1 - first;
      bool is_switch = actions[static_cast<size_t>(p)] >= kMoves;
      if ((pass == 0) == is_switch) order.push_back(p);
    }
  }
  for (int p : order) {
    if (terminal_) break;
    out.info.damage += apply_action(p, actions[static_cast<size_t>(p)], &out.rewards);
    check_terminal(&out.rewards);
  }
  ++turn_;
  out.terminal = terminal_;
  out.info.match_finished = terminal_;
  return out;
}

std::unique_ptr<GameEnv> DuelEnv::clone() const {
  return std::make_unique<DuelEnv>(*this);
}

std::unique_ptr<GameEnv> DuelEnv::project(int player, int action) const {
  const auto mask = legal_mask(player);
  require(action >= 0 && action < kActions && mask[static_cast<size_t>(action)],
          ErrorKind::kIllegalAction,
          "duel: illegal projection " + std::to_string(action) + " for player " +
              std::to_string(player));
  auto copy = std::make_unique<DuelEnv>(*this);
  copy->apply_action(player, action, nullptr);
  copy->check_terminal(nullptr);
  return copy;
}

std::vector<double> DuelEnv::encode_full(int player) const {
  // Layout (22): 4 move powers /100, 4 move multipliers vs the opposing
  // active /2, own 3 hp fractions, opp 3 hp fractions, own 3 alive flags,
  // opp 3 alive flags, own alive fraction, opp alive fraction.
  const Side& own = side(player);
  const Side& opp = side(1 - player);
  std::vector<double> v;
  v.reserve(kFullObs);
  const Creature& active = own.active_creature();
  for (const Move& m : active.moves) v.push_back(m.power / 100.0);
  for (const Move& m : active.moves)
    v.push_back(type_multiplier(m.element, opp.active_creature().element) / 2.0);
  for (const Creature& c : own.team) v.push_back(c.hp / 100.0);
  for (const Creature& c : opp.team) v.push_back(c.hp / 100.0);
  for (const Creature& c : own.team) v.push_back(c.alive() ? 1.0 : 0.0);
  for (const Creature& c : opp.team) v.push_back(c.alive() ? 1.0 : 0.0);
  v.push_back(own.alive_count() / static_cast<double>(kTeamSize));
  v.push_back(opp.alive_count() / static_cast<double>(kTeamSize));
  return v;
}

std::vector<double> DuelEnv::encode_public(int observer, int modeled) const {
  require(observer != modeled, ErrorKind::kContract,
          "duel: observer must differ from modeled player");
  // Layout (10): modeled 3 hp fractions, observer 3 hp fractions, modeled
  // alive /3, observer alive /3, modeled active index /3, observer active /3.
  const Side& m = side(modeled);
  const Side& o = side(observer);
  std::vector<double> v;
  v.reserve(kPublicObs);
  for (const Creature& c : m.team) v.push_back(c.hp / 100.0);
  for (const Creature& c : o.team) v.push_back(c.hp / 100.0);
  v.push_back(m.alive_count() / static_cast<double>(kTeamSize));
  v.push_back(o.alive_count() / static_cast<double>(kTeamSize));
  v.push_back(m.active / static_cast<double>(kTeamSize));
  v.push_back(o.active / static_cast<double>(kTeamSize));
  return v;
}

int DuelEnv::total_hp(int player) const {
  int sum = 0;
  for (const Creature& c : side(player).team) sum += c.hp;
  return sum;
}

uint64_t DuelEnv::state_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](int x) { h = fnv1a64(&x, sizeof(x), h); };
  for (const Side& s : sides_) {
    mix(s.active);
    for (const Creature& c : s.team) {
      mix(c.element);
      mix(c.hp);
      mix(c.speed);
      for (const Move& m : c.moves) {
        mix(m.power);
        mix(m.element);
      }
    }
  }
  mix(turn_);
  mix(terminal_ ? 1 : 0);
  mix(winner_);
  return h;
}

}  // namespace winne
