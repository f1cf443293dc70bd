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

#include "winne/match.hpp"

#include <optional>

#include "winne/card_env.hpp"
#include "winne/duel_env.hpp"
#include "winne/error.hpp"

namespace winne {

namespace {

struct Pending {
  std::vector<double> obs;
  std::vector<uint8_t> mask;
  int action = -1;
  double logprob = 0.0;
  double accrued = 0.0;
};

}  // namespace

GameResult play_game(GameEnv& env, std::vector<AgentSlot>& slots, uint64_t game_seed,
                     TranscriptWriter* transcript) {
  const int players = env.num_players();
  require(static_cast<int>(slots.size()) == players, ErrorKind::kContract,
          "play_game: one slot per player");
  env.reset(game_seed);

  RngStream master(game_seed);
  std::vector<RngStream> act_rng;
  act_rng.reserve(static_cast<size_t>(players));
  for (int p = 0; p < players; ++p) {
    act_rng.push_back(master.derive({0x5eedULL, static_cast<uint64_t>(p)}));
  }

  GameResult result;
  result.returns.assign(static_cast<size_t>(players), 0.0);

  std::map<int, std::string> ids;
  for (int p = 0; p < players; ++p) ids[p] = slots[static_cast<size_t>(p)].id;
  for (int p = 0; p < players; ++p) {
    slots[static_cast<size_t>(p)].agent->begin_match(env, p, ids);
    slots[static_cast<size_t>(p)].agent->begin_episode();
  }

  std::vector<std::optional<Pending>> pending(static_cast<size_t>(players));

  auto close_pending = [&](int p, bool done) {
    auto& slot = slots[static_cast<size_t>(p)];
    if (!pending[static_cast<size_t>(p)]) return;
    if (slot.learn) {
      Transition t;
      Pending& pd = *pending[static_cast<size_t>(p)];
      t.obs = std::move(pd.obs);
      t.mask = std::move(pd.mask);
      t.action = pd.action;
      t.logprob = pd.logprob;
      t.reward = pd.accrued;
      t.done = done;
      if (done) {
        t.next_obs = t.obs;
        t.next_mask = t.mask;
      } else {
        t.next_obs = env.encode_full(p);
        t.next_mask = env.legal_mask(p);
      }
      slot.agent->observe_transition(t);
    }
    pending[static_cast<size_t>(p)].reset();
  };

  auto episode_boundary = [&](bool game_over) {
    for (int p = 0; p < players; ++p) close_pending(p, true);
    for (int p = 0; p < players; ++p)
      slots[static_cast<size_t>(p)].agent->end_episode(act_rng[static_cast<size_t>(p)]);
    if (!game_over) {
      for (int p = 0; p < players; ++p) slots[static_cast<size_t>(p)].agent->begin_episode();
    }
  };

  int duel_turns = 0;
  while (!env.terminal()) {
    const std::vector<int> actors = env.to_act();

    // Collect decisions from the pre-step state, then let every other agent
    // observe each action before it resolves.
    std::vector<int> actions(actors.size());
    std::vector<ActDiag> diags(actors.size());
    for (size_t i = 0; i < actors.size(); ++i) {
      const int p = actors[i];
      close_pending(p, false);
      Pending pd;
      pd.obs = env.encode_full(p);
      pd.mask = env.legal_mask(p);
      actions[i] = slots[static_cast<size_t>(p)].agent->act(
          env, p, act_rng[static_cast<size_t>(p)],
          slots[static_cast<size_t>(p)].greedy, &diags[i]);
      pd.action = actions[i];
      pd.logprob = diags[i].logprob;
      pending[static_cast<size_t>(p)] = std::move(pd);
    }
    for (size_t i = 0; i < actors.size(); ++i) {
      for (int q = 0; q < players; ++q) {
        if (q == actors[i]) continue;
        slots[static_cast<size_t>(q)].agent->observe_opponent(
            env, actors[i], ids[actors[i]], actions[i]);
      }
    }

    StepOutcome out = env.step(actions);
    result.turns += 1;
    for (int p = 0; p < players; ++p) {
      result.returns[static_cast<size_t>(p)] += out.rewards[static_cast<size_t>(p)];
      if (pending[static_cast<size_t>(p)])
        pending[static_cast<size_t>(p)]->accrued += out.rewards[static_cast<size_t>(p)];
    }
    if (transcript) {
      for (size_t i = 0; i < actors.size(); ++i) {
        transcript->event(env.turn() - 1, actors[i], actions[i],
                          out.rewards[static_cast<size_t>(actors[i])], env.state_hash());
      }
    }

    if (env.kind() == EnvKind::kDuel) {
      ++duel_turns;
      if (!out.terminal && duel_turns >= kDuelTurnCap) {
        // Adjudicate a stalled duel by remaining hit points, coin on ties.
        auto& duel = dynamic_cast<DuelEnv&>(env);
        int hp0 = duel.total_hp(0), hp1 = duel.total_hp(1);
        result.winner = hp0 > hp1 ? 0 : hp1 > hp0 ? 1 : (master.coin() ? 0 : 1);
        result.capped = true;
        episode_boundary(true);
        result.ranks = {result.winner == 0 ? 1 : 2, result.winner == 1 ? 1 : 2};
        return result;
      }
      if (out.terminal) episode_boundary(true);
    } else {
      if (out.info.match_finished) episode_boundary(env.terminal());
      require(result.turns < 200000, ErrorKind::kContract,
              "play_game: runaway card game");
    }
  }

  result.winner = env.winner();
  if (env.kind() == EnvKind::kDuel) {
    result.ranks = {result.winner == 0 ? 1 : 2, result.winner == 1 ? 1 : 2};
    result.matches = 1;
  } else {
    auto& cards = dynamic_cast<CardEnv&>(env);
    result.ranks = cards.ranks();
    result.matches = cards.match_index();
  }
  return result;
}

}  // namespace winne
