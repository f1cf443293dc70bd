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

#ifndef WINNE_MATCH_HPP_
#define WINNE_MATCH_HPP_

#include <string>
#include <vector>

#include "winne/agent.hpp"
#include "winne/env.hpp"
#include "winne/transcript.hpp"

namespace winne {

struct AgentSlot {
  Agent* agent = nullptr;
  std::string id;
  bool learn = false;
  bool greedy = false;  // deterministic action selection for this seat
};

struct GameResult {
  int winner = -1;
  std::vector<int> ranks;        // 1-based standing per seat
  std::vector<double> returns;   // accumulated environment reward per seat
  int turns = 0;
  int matches = 1;               // card game: matches played to 15 points
  bool capped = false;           // duel adjudicated at the 500-turn cap
};

inline constexpr int kDuelTurnCap = 500;

// Plays one full game (a duel, or a card game to 15 points). Resets the
// environment from game_seed, derives one action stream per seat, routes
// transitions to learning agents, and notifies every agent of opponent
// actions before they resolve. Episodes end per duel and per card match.
GameResult play_game(GameEnv& env, std::vector<AgentSlot>& slots, uint64_t game_seed,
                     TranscriptWriter* transcript = nullptr);

}  // namespace winne

#endif  // WINNE_MATCH_HPP_
