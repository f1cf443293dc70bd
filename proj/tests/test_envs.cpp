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

#include <doctest.h>

#include <algorithm>
#include <set>

#include "winne/card_env.hpp"
#include "winne/duel_env.hpp"
#include "winne/error.hpp"
#include "winne/rng.hpp"
#include "winne/transcript.hpp"

using namespace winne;

namespace {

int random_legal(const std::vector<uint8_t>& mask, RngStream& rng) {
  std::vector<int> legal;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) legal.push_back(static_cast<int>(i));
  }
  REQUIRE(!legal.empty());
  return legal[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(legal.size()) - 1))];
}

// Independent re-derivation of card-game legality for one action id, used as
// the exhaustive oracle against legal_mask.
bool card_action_legal_oracle(const CardEnv& env, int player, int action) {
  const auto& hand = env.hand(player);
  int total = 0;
  for (int v = 1; v <= 12; ++v) total += hand[static_cast<size_t>(v)];
  if (total == 0) return false;
  const CardEnv::Board& b = env.board();
  if (action == CardEnv::kPassAction) return !b.clean();
  if (action == CardEnv::kJokerOnlyAction)
    return b.clean() && total == hand[12] && hand[12] > 0;
  const CardEnv::Discard d = CardEnv::decode_discard(action);
  if (hand[static_cast<size_t>(d.value)] < d.quantity || hand[12] < d.jokers) return false;
  if (b.clean()) return true;
  return d.value < b.value && d.quantity + d.jokers >= b.cards + b.jokers;
}

}  // namespace

TEST_CASE("duel reset gives full teams and is seed deterministic") {
  DuelEnv a, b;
  a.reset(7);
  b.reset(7);
  CHECK(a.state_hash() == b.state_hash());
  for (int p = 0; p < 2; ++p) {
    CHECK(a.side(p).alive_count() == 3);
    for (const auto& c : a.side(p).team) CHECK(c.hp == 100);
  }
  b.reset(8);
  CHECK(a.state_hash() != b.state_hash());
}

TEST_CASE("duel damage follows power times multiplier") {
  // Element chart is cyclic: e hits e+1 for x2, e-1 for x0.5.
  CHECK(DuelEnv::type_multiplier(0, 1) == 2.0);
  CHECK(DuelEnv::type_multiplier(0, 3) == 0.5);
  CHECK(DuelEnv::type_multiplier(0, 0) == 1.0);
  CHECK(DuelEnv::type_multiplier(0, 2) == 1.0);

  // Find a seed/move combination with power 40 into a x2 defender.
  RngStream seeds(11);
  for (int attempt = 0; attempt < 20000; ++attempt) {
    DuelEnv env;
    uint64_t seed = seeds.next();
    env.reset(seed);
    const auto& attacker = env.side(0).active_creature();
    const auto& defender = env.side(1).active_creature();
    for (int m = 0; m < 4; ++m) {
      if (attacker.moves[static_cast<size_t>(m)].power == 40 &&
          DuelEnv::type_multiplier(attacker.moves[static_cast<size_t>(m)].element,
                                   defender.element) == 2.0 &&
          attacker.speed > defender.speed) {
        auto out = env.step({m, 0});
        CHECK(env.side(1).active_creature().hp == 20);
        CHECK(out.rewards[0] >= 0.001 * 80 - 1e-12);
        return;
      }
    }
  }
  FAIL("no qualifying seed found");
}

TEST_CASE("duel forced switch leaves exactly the live bench switches") {
  RngStream seeds(5);
  int checked = 0;
  for (int attempt = 0; attempt < 400 && checked < 20; ++attempt) {
    DuelEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal()) {
      auto m0 = env.legal_mask(0);
      auto m1 = env.legal_mask(1);
      for (int p = 0; p < 2; ++p) {
        const auto& side = env.side(p);
        if (!side.active_creature().alive()) {
          const auto& mask = p == 0 ? m0 : m1;
          int legal = 0;
          for (int a = 0; a < 6; ++a) legal += mask[static_cast<size_t>(a)];
          int live_bench = side.alive_count();
          CHECK(legal == live_bench);
          for (int a = 0; a < 4; ++a) CHECK(!mask[static_cast<size_t>(a)]);
          ++checked;
        }
      }
      env.step({random_legal(m0, rng), random_legal(m1, rng)});
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("duel random play: hp bounds, termination, zero-sum terminal") {
  RngStream seeds(99);
  for (int game = 0; game < 300; ++game) {
    DuelEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    double total_terminal = 0.0;
    int turns = 0;
    while (!env.terminal()) {
      REQUIRE(turns < 500);
      auto out = env.step(
          {random_legal(env.legal_mask(0), rng), random_legal(env.legal_mask(1), rng)});
      ++turns;
      for (int p = 0; p < 2; ++p) {
        for (const auto& c : env.side(p).team) {
          REQUIRE(c.hp >= 0);
          REQUIRE(c.hp <= 100);
        }
      }
      if (out.terminal) {
        // Terminal rewards are +1/-1 plus nonnegative same-turn shaping,
        // bounded by one faint and one max-power hit.
        double w = out.rewards[static_cast<size_t>(env.winner())];
        double l = out.rewards[static_cast<size_t>(1 - env.winner())];
        CHECK(w >= 1.0);
        CHECK(w <= 1.0 + 0.1 + 0.001 * 200 + 1e-12);
        CHECK(l >= -1.0);
        CHECK(l <= -1.0 + 0.1 + 0.001 * 200 + 1e-12);
        total_terminal = (w - (w - 1.0)) + (l - (l + 1.0));
      }
    }
    CHECK(total_terminal == 0.0);
  }
}

TEST_CASE("duel project is pure and agrees with a faster actor's half-step") {
  RngStream seeds(123);
  int compared = 0;
  for (int game = 0; game < 60; ++game) {
    DuelEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal() && compared < 500) {
      uint64_t before = env.state_hash();
      auto mask0 = env.legal_mask(0);
      int a0 = random_legal(mask0, rng);
      auto p1 = env.project(0, a0);
      auto p2 = env.project(0, a0);
      CHECK(env.state_hash() == before);
      CHECK(p1->state_hash() == p2->state_hash());

      // When player 0 moves strictly first and both picked moves, the full
      // step decomposes through the projection.
      int a1 = random_legal(env.legal_mask(1), rng);
      bool p0_first = env.side(0).active_creature().speed >
                      env.side(1).active_creature().speed;
      if (p0_first && a0 < 4 && a1 < 4) {
        auto chained = dynamic_cast<DuelEnv*>(p1.get());
        std::unique_ptr<GameEnv> full_after;
        if (!chained->terminal() && chained->side(1).active_creature().alive()) {
          full_after = chained->project(1, a1);
        } else {
          full_after = chained->clone();
        }
        env.step({a0, a1});
        auto* full = dynamic_cast<DuelEnv*>(full_after.get());
        for (int p = 0; p < 2; ++p) {
          CHECK(full->side(p).active == env.side(p).active);
          for (int c = 0; c < 3; ++c)
            CHECK(full->side(p).team[static_cast<size_t>(c)].hp ==
                  env.side(p).team[static_cast<size_t>(c)].hp);
        }
        ++compared;
      } else {
        env.step({a0, a1});
      }
    }
  }
  CHECK(compared >= 100);
}

TEST_CASE("duel encodings have pinned layout and range") {
  DuelEnv env;
  env.reset(3);
  auto full = env.encode_full(0);
  REQUIRE(full.size() == 22);
  // Fresh game: hp fractions, alive flags and remaining fractions all 1.
  for (int i = 8; i < 22; ++i) CHECK(full[static_cast<size_t>(i)] == 1.0);
  for (double v : full) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  auto pub = env.encode_public(0, 1);
  REQUIRE(pub.size() == 10);
  // Symmetric start: modeled and observer components identical.
  for (int i = 0; i < 3; ++i) CHECK(pub[static_cast<size_t>(i)] == pub[static_cast<size_t>(i + 3)]);
  CHECK(pub[6] == pub[7]);
  CHECK(pub[8] == pub[9]);
}

TEST_CASE("duel illegal action raises naming player and action") {
  DuelEnv env;
  env.reset(1);
  try {
    env.step({0, 7});
    FAIL("expected illegal-action error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIllegalAction);
    CHECK(std::string(e.what()).find("player 1") != std::string::npos);
  }
}

TEST_CASE("card action table is a bijection over 198 discards") {
  std::set<int> seen;
  for (int v = 1; v <= 11; ++v) {
    for (int q = 1; q <= v; ++q) {
      for (int j = 0; j <= 2; ++j) {
        int id = CardEnv::discard_action_id(v, q, j);
        CHECK(id >= 0);
        CHECK(id < 198);
        seen.insert(id);
        auto d = CardEnv::decode_discard(id);
        CHECK(d.value == v);
        CHECK(d.quantity == q);
        CHECK(d.jokers == j);
      }
    }
  }
  CHECK(seen.size() == 198);
}

TEST_CASE("card reset deals 17 cards each from the 68-card deck") {
  CardEnv env;
  env.reset(21);
  int sum = 0;
  for (int p = 0; p < 4; ++p) {
    CHECK(env.hand_total(p) == 17);
    sum += env.hand_total(p);
  }
  CHECK(sum == 68);
  auto census = env.card_census();
  for (int v = 1; v <= 11; ++v) CHECK(census[static_cast<size_t>(v)] == v);
  CHECK(census[12] == 2);

  CardEnv again;
  again.reset(21);
  CHECK(again.state_hash() == env.state_hash());
}

TEST_CASE("card board value 1 leaves only pass") {
  // Drive a random game until the board shows value 1, then check the mask.
  RngStream seeds(17);
  int checked = 0;
  for (int game = 0; game < 200 && checked < 5; ++game) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    int guard = 0;
    while (!env.terminal() && ++guard < 4000) {
      if (env.board().value == 1) {
        auto mask = env.legal_mask(env.current_player());
        for (int a = 0; a < 198; ++a) CHECK(!mask[static_cast<size_t>(a)]);
        CHECK(mask[CardEnv::kPassAction]);
        CHECK(!mask[CardEnv::kJokerOnlyAction]);
        ++checked;
        break;
      }
      env.step({random_legal(env.legal_mask(env.current_player()), rng)});
    }
  }
  CHECK(checked >= 5);
}

TEST_CASE("card legal mask equals the exhaustive oracle on sampled states") {
  RngStream seeds(31);
  int states = 0;
  while (states < 10000) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal() && states < 10000) {
      int p = env.current_player();
      auto mask = env.legal_mask(p);
      bool any = false;
      for (int a = 0; a < 200; ++a) {
        bool expect = card_action_legal_oracle(env, p, a);
        if (mask[static_cast<size_t>(a)] != (expect ? 1 : 0)) {
          CAPTURE(a);
          CHECK(mask[static_cast<size_t>(a)] == (expect ? 1 : 0));
        }
        any = any || expect;
      }
      CHECK(any);  // the player to act always has a move
      ++states;
      env.step({random_legal(mask, rng)});
    }
  }
}

TEST_CASE("card random play conserves the deck and terminates") {
  RngStream seeds(47);
  int matches_seen = 0;
  int games = 0;
  while (matches_seen < 1000) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    ++games;
    int last_match = env.match_index();
    while (!env.terminal()) {
      REQUIRE(env.match_turn() <= 2000);
      auto out = env.step({random_legal(env.legal_mask(env.current_player()), rng)});
      auto census = env.card_census();
      for (int v = 1; v <= 11; ++v) REQUIRE(census[static_cast<size_t>(v)] == v);
      REQUIRE(census[12] == 2);
      if (out.info.match_finished) ++matches_seen;
      if (env.match_index() != last_match) last_match = env.match_index();
    }
    // Match scoring: winner 3, then 2, 1, 0.
    int total = 0;
    for (int p = 0; p < 4; ++p) total += env.match_points()[static_cast<size_t>(p)];
    CHECK(total == 6);
    CHECK(env.game_scores()[static_cast<size_t>(env.winner())] >= 15);
  }
  CHECK(games >= 1);
}

TEST_CASE("card finishing discard pays +1 and finish position 1") {
  RngStream seeds(61);
  int seen = 0;
  for (int game = 0; game < 50 && seen < 10; ++game) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal()) {
      int p = env.current_player();
      bool fresh_match = env.finish_order().empty();
      auto out = env.step({random_legal(env.legal_mask(p), rng)});
      if (out.info.finish_position == 1) {
        CHECK(fresh_match);
        CHECK(out.rewards[static_cast<size_t>(p)] == 1.0);
        for (int q = 0; q < 4; ++q) {
          if (q != p) CHECK(out.rewards[static_cast<size_t>(q)] == 0.0);
        }
        ++seen;
      } else {
        for (int q = 0; q < 4; ++q) CHECK(out.rewards[static_cast<size_t>(q)] == 0.0);
      }
    }
  }
  CHECK(seen >= 10);
}

TEST_CASE("card project matches step exactly within a match") {
  RngStream seeds(77);
  int compared = 0;
  for (int game = 0; game < 10; ++game) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal() && compared < 2000) {
      int p = env.current_player();
      int a = random_legal(env.legal_mask(p), rng);
      uint64_t before = env.state_hash();
      auto proj = env.project(p, a);
      CHECK(env.state_hash() == before);
      auto out = env.step({a});
      if (!out.info.match_finished) {
        CHECK(proj->state_hash() == env.state_hash());
        ++compared;
      } else {
        bool boundary =
            dynamic_cast<CardEnv*>(proj.get())->between_matches() || proj->terminal();
        CHECK(boundary);
      }
    }
  }
  CHECK(compared >= 500);
}

TEST_CASE("card projecting a discard removes exactly q+j cards") {
  RngStream seeds(83);
  int compared = 0;
  for (int game = 0; game < 5; ++game) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal() && compared < 300) {
      int p = env.current_player();
      auto mask = env.legal_mask(p);
      std::vector<int> discards;
      for (int a = 0; a < 198; ++a) {
        if (mask[static_cast<size_t>(a)]) discards.push_back(a);
      }
      if (!discards.empty()) {
        int a = discards[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(discards.size()) - 1))];
        auto d = CardEnv::decode_discard(a);
        auto proj = env.project(p, a);
        auto* c = dynamic_cast<CardEnv*>(proj.get());
        CHECK(env.hand_total(p) - c->hand_total(p) == d.quantity + d.jokers);
        ++compared;
      }
      env.step({random_legal(mask, rng)});
    }
  }
  CHECK(compared >= 300);
}

TEST_CASE("card encodings: lengths, clean board zeros, privacy") {
  CardEnv env;
  env.reset(5);
  auto full = env.encode_full(0);
  REQUIRE(full.size() == 28);
  for (int i = 17; i < 28; ++i) CHECK(full[static_cast<size_t>(i)] == 0.0);
  for (double v : full) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // Hand slots sorted descending.
  for (int i = 0; i < 16; ++i)
    CHECK(full[static_cast<size_t>(i)] >= full[static_cast<size_t>(i + 1)]);

  auto pub = env.encode_public(0, 1);
  REQUIRE(pub.size() == 11);

  // Privacy: two deals with identical boards encode identically regardless
  // of hidden hands.
  CardEnv other;
  other.reset(6);
  CHECK(other.encode_public(0, 1) == pub);  // both boards clean
}

TEST_CASE("card public legal mask is a superset of the true mask") {
  RngStream seeds(903);
  int states = 0;
  while (states < 3000) {
    CardEnv env;
    env.reset(seeds.next());
    RngStream rng(seeds.next());
    while (!env.terminal() && states < 3000) {
      int p = env.current_player();
      auto mask = env.legal_mask(p);
      auto pub = env.public_legal_mask(p);
      for (int a = 0; a < 200; ++a) {
        if (mask[static_cast<size_t>(a)]) CHECK(pub[static_cast<size_t>(a)]);
      }
      ++states;
      env.step({random_legal(mask, rng)});
    }
  }
}

TEST_CASE("transcripts replay clean and detect tampering") {
  DuelEnv env;
  uint64_t seed = 2026;
  env.reset(seed);
  RngStream rng(4);
  TranscriptWriter w(EnvKind::kDuel, seed, 2);
  while (!env.terminal()) {
    int a0 = random_legal(env.legal_mask(0), rng);
    int a1 = random_legal(env.legal_mask(1), rng);
    auto out = env.step({a0, a1});
    w.event(env.turn() - 1, 0, a0, out.rewards[0], env.state_hash());
    w.event(env.turn() - 1, 1, a1, out.rewards[1], env.state_hash());
  }
  auto ok = replay_verify_text(w.text());
  CHECK(ok.ok);

  // Tamper with one action id: replay must fail naming a turn.
  std::string tampered = w.text();
  auto pos = tampered.find("\"action_id\":");
  REQUIRE(pos != std::string::npos);
  tampered[pos + 12] = tampered[pos + 12] == '0' ? '1' : '0';
  auto bad = replay_verify_text(tampered);
  CHECK(!bad.ok);
  CHECK(bad.first_bad_turn >= 0);
}
