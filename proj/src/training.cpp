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

#include "winne/training.hpp"

#include <algorithm>

#include "winne/error.hpp"

namespace winne {

std::shared_ptr<Agent> clone_agent(const Agent& a) {
  const std::string algo = a.algorithm();
  if (algo == "naive_random") return std::make_shared<RandomAgent>();
  if (algo == "naive_greedy") return std::make_shared<GreedyAgent>();
  std::shared_ptr<Agent> copy;
  if (algo == "ppo") {
    copy = std::make_shared<PpoAgent>(EnvKind::kDuel, ppo_desk_spec(EnvKind::kDuel), 0);
  } else if (algo == "dql") {
    copy = std::make_shared<DqlAgent>(EnvKind::kDuel, dql_desk_spec(EnvKind::kDuel), 0);
  } else {
    fail(ErrorKind::kContract, "clone_agent: unsupported algorithm " + algo);
  }
  copy->from_json(a.to_json());
  return copy;
}

namespace {

std::vector<AgentSlot> seat_agents(Agent& learner, const std::string& learner_id,
                                   bool learner_learns,
                                   const std::vector<std::shared_ptr<Agent>>& opponents,
                                   const std::vector<std::string>& opponent_ids,
                                   bool opponents_learn) {
  std::vector<AgentSlot> slots;
  slots.push_back({&learner, learner_id, learner_learns});
  for (size_t i = 0; i < opponents.size(); ++i) {
    slots.push_back({opponents[i].get(), opponent_ids[i], opponents_learn});
  }
  return slots;
}

}  // namespace

TrainCurve train_vs_naive(Agent& agent, EnvKind kind, int games, uint64_t seed) {
  TrainCurve curve;
  auto env = make_env(kind);
  const int opponents = env->num_players() - 1;
  std::vector<std::shared_ptr<Agent>> naive;
  std::vector<std::string> ids;
  for (int i = 0; i < opponents; ++i) {
    naive.push_back(std::make_shared<GreedyAgent>());
    ids.push_back("ns#" + std::to_string(i));
  }
  RngStream stream(seed);
  auto slots = seat_agents(agent, "learner", true, naive, ids, false);
  for (int g = 0; g < games; ++g) {
    GameResult r = play_game(*env, slots, stream.next());
    curve.wins.push_back(r.winner == 0 ? 1 : 0);
    curve.returns.push_back(r.returns[0]);
  }
  return curve;
}

double eval_win_rate(Agent& agent, Agent& opponent, EnvKind kind, int games,
                     uint64_t seed) {
  const bool a_learning = agent.is_learning();
  const bool b_learning = opponent.is_learning();
  agent.set_learning(false);
  opponent.set_learning(false);

  // Deterministic policy evaluation: the candidate plays its masked argmax,
  // opponents keep their own behavior.
  auto env = make_env(kind);
  RngStream stream(seed);
  int wins = 0;
  for (int g = 0; g < games; ++g) {
    env->reset(stream.next());
    RngStream arng(stream.next());
    int turns = 0;
    while (!env->terminal() && turns++ < kDuelTurnCap * 40) {
      std::vector<int> actors = env->to_act();
      std::vector<int> actions;
      actions.reserve(actors.size());
      for (int p : actors) {
        actions.push_back(p == 0 ? agent.act(*env, p, arng, true, nullptr)
                                 : opponent.act(*env, p, arng, false, nullptr));
      }
      env->step(actions);
      if (kind == EnvKind::kDuel && turns >= kDuelTurnCap) break;
    }
    if (env->terminal() && env->winner() == 0) ++wins;
  }
  agent.set_learning(a_learning);
  opponent.set_learning(b_learning);
  return static_cast<double>(wins) / std::max(1, games);
}

SelfPlayResult train_self_play(const std::string& algo, EnvKind kind,
                               const PolicySpec& spec, int generations,
                               int games_per_gen, uint64_t seed) {
  RngStream stream(seed);
  std::shared_ptr<Agent> learner = make_learner(algo, kind, spec, stream.next());

  SelfPlayResult result;
  result.pool.members.push_back(make_naive("ns"));
  result.pool.members.push_back(make_naive("nr"));
  {
    auto fresh = make_learner(algo, kind, spec, stream.next());
    fresh->set_learning(false);
    result.pool.members.push_back(std::move(fresh));
  }
  if (generations == 0) {
    result.best = learner;
    return result;
  }

  auto env = make_env(kind);
  const int opponents_per_game = env->num_players() - 1;
  std::shared_ptr<Agent> final_best;

  for (int gen = 0; gen < generations; ++gen) {
    const int quarters = 4;
    const int per_quarter = std::max(1, games_per_gen / quarters);
    std::vector<std::shared_ptr<Agent>> snapshots;
    std::vector<int> quarter_wins;

    for (int quarter = 0; quarter < quarters; ++quarter) {
      int wins = 0;
      for (int g = 0; g < per_quarter; ++g) {
        std::vector<std::shared_ptr<Agent>> opps;
        std::vector<std::string> ids;
        for (int i = 0; i < opponents_per_game; ++i) {
          int pick = stream.uniform_int(0, static_cast<int>(result.pool.size()) - 1);
          opps.push_back(result.pool.members[static_cast<size_t>(pick)]);
          ids.push_back("pool#" + std::to_string(pick) + "/" + std::to_string(i));
        }
        auto slots = seat_agents(*learner, "learner", true, opps, ids, false);
        GameResult r = play_game(*env, slots, stream.next());
        wins += r.winner == 0 ? 1 : 0;
        result.curve.wins.push_back(r.winner == 0 ? 1 : 0);
        result.curve.returns.push_back(r.returns[0]);
      }
      auto snap = clone_agent(*learner);
      snap->set_learning(false);
      snapshots.push_back(std::move(snap));
      quarter_wins.push_back(wins);
    }

    // Rank the quarter snapshots by their in-quarter victories; the top two
    // join the pool.
    std::vector<int> order = {0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return quarter_wins[static_cast<size_t>(a)] > quarter_wins[static_cast<size_t>(b)];
    });
    result.pool.members.push_back(snapshots[static_cast<size_t>(order[0])]);
    result.pool.members.push_back(snapshots[static_cast<size_t>(order[1])]);
    if (gen == generations - 1) final_best = snapshots[static_cast<size_t>(order[0])];
  }
  result.best = final_best;
  return result;
}

}  // namespace winne
