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

#include "winne/transcript.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include <json.hpp>

#include "winne/card_env.hpp"
#include "winne/checkpoint.hpp"
#include "winne/duel_env.hpp"
#include "winne/error.hpp"

namespace winne {

const char* env_kind_name(EnvKind k) {
  return k == EnvKind::kDuel ? "duel" : "cards";
}

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "duel") return EnvKind::kDuel;
  if (name == "cards") return EnvKind::kCards;
  fail(ErrorKind::kConfig, "unknown env kind: " + name);
}

std::unique_ptr<GameEnv> make_env(EnvKind kind) {
  if (kind == EnvKind::kDuel) return std::make_unique<DuelEnv>();
  return std::make_unique<CardEnv>();
}

namespace {

std::string hash_hex(uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace

TranscriptWriter::TranscriptWriter(EnvKind kind, uint64_t seed, int players) {
  nlohmann::json header;
  header["env"] = env_kind_name(kind);
  header["seed"] = seed;
  header["players"] = players;
  buffer_ = header.dump() + "\n";
}

void TranscriptWriter::event(int turn, int player, int action_id, double reward,
                             uint64_t state_hash) {
  nlohmann::json e;
  e["turn"] = turn;
  e["player"] = player;
  e["action_id"] = action_id;
  e["reward"] = reward;
  e["state_hash"] = hash_hex(state_hash);
  buffer_ += e.dump() + "\n";
}

void TranscriptWriter::write(const std::string& path) const {
  write_file_atomic(path, buffer_);
}

ReplayResult replay_verify(const std::string& path) {
  return replay_verify_text(read_file(path));
}

ReplayResult replay_verify_text(const std::string& text) {
  ReplayResult result;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    result.message = "empty transcript";
    return result;
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    result.message = std::string("bad header: ") + e.what();
    return result;
  }

  std::unique_ptr<GameEnv> env;
  uint64_t seed = 0;
  try {
    env = make_env(env_kind_from_name(header.at("env").get<std::string>()));
    seed = header.at("seed").get<uint64_t>();
  } catch (const std::exception& e) {
    result.message = std::string("bad header: ") + e.what();
    return result;
  }
  env->reset(seed);

  struct Event {
    int player;
    int action;
    std::string hash;
  };
  std::map<int, std::vector<Event>> by_turn;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
      by_turn[e.at("turn").get<int>()].push_back(
          {e.at("player").get<int>(), e.at("action_id").get<int>(),
           e.at("state_hash").get<std::string>()});
    } catch (const std::exception& ex) {
      result.message = "bad event at line " + std::to_string(line_no) + ": " + ex.what();
      return result;
    }
  }

  for (const auto& [turn, events] : by_turn) {
    if (env->terminal()) {
      result.first_bad_turn = turn;
      result.message = "turn " + std::to_string(turn) + ": game already over";
      return result;
    }
    const std::vector<int> actors = env->to_act();
    if (events.size() != actors.size()) {
      result.first_bad_turn = turn;
      result.message = "turn " + std::to_string(turn) + ": wrong number of events";
      return result;
    }
    std::vector<int> actions(actors.size(), -1);
    for (const Event& e : events) {
      bool placed = false;
      for (size_t i = 0; i < actors.size(); ++i) {
        if (actors[i] == e.player) {
          actions[i] = e.action;
          placed = true;
        }
      }
      if (!placed) {
        result.first_bad_turn = turn;
        result.message =
            "turn " + std::to_string(turn) + ": player " +
            std::to_string(e.player) + " was not due to act";
        return result;
      }
    }
    try {
      env->step(actions);
    } catch (const Error& err) {
      result.first_bad_turn = turn;
      result.message = "turn " + std::to_string(turn) + ": " + err.what();
      return result;
    }
    const std::string actual = hash_hex(env->state_hash());
    for (const Event& e : events) {
      if (e.hash != actual) {
        result.first_bad_turn = turn;
        result.message = "turn " + std::to_string(turn) + ": state hash mismatch";
        return result;
      }
    }
  }
  result.ok = true;
  return result;
}

}  // namespace winne
