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

#ifndef WINNE_TRAINING_HPP_
#define WINNE_TRAINING_HPP_

#include <memory>

#include "winne/baselines.hpp"
#include "winne/match.hpp"

namespace winne {

struct TrainCurve {
  std::vector<int> wins;        // per game
  std::vector<double> returns;  // per game, learner's seat
};

// Deep copy through the agent's serialized state. Naive agents are
// stateless and share nothing.
std::shared_ptr<Agent> clone_agent(const Agent& a);

// Trains by playing `games` against the simple-strategy naive agent
// (three of them in the card game), updating online.
TrainCurve train_vs_naive(Agent& agent, EnvKind kind, int games, uint64_t seed);

// Win rate of `agent` (seat 0) against copies of `opponent`, with learning
// suspended on both sides for the duration.
double eval_win_rate(Agent& agent, Agent& opponent, EnvKind kind, int games,
                     uint64_t seed);

// Self-play opponent population: two frozen snapshots per generation plus
// the two naive agents and one fresh untrained agent.
struct OpponentPool {
  std::vector<std::shared_ptr<Agent>> members;
  size_t size() const { return members.size(); }
};

struct SelfPlayResult {
  std::shared_ptr<Agent> best;  // top snapshot of the final generation
  OpponentPool pool;
  TrainCurve curve;
};

// Generations of `games_per_gen` games against opponents drawn uniformly
// from the pool. After each generation the best and second-best quarter
// snapshots (by in-quarter victories) join the pool, so the pool holds
// 2g + 3 members after g generations.
SelfPlayResult train_self_play(const std::string& algo, EnvKind kind,
                               const PolicySpec& spec, int generations,
                               int games_per_gen, uint64_t seed);

}  // namespace winne

#endif  // WINNE_TRAINING_HPP_
