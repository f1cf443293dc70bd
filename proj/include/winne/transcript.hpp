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

#ifndef WINNE_TRANSCRIPT_HPP_
#define WINNE_TRANSCRIPT_HPP_

#include <string>
#include <vector>

#include "winne/env.hpp"

namespace winne {

// Line-delimited JSON match transcript: a header line with the environment
// kind and seed, then one event per player action with the post-turn state
// hash. Replayable by re-simulating from the seed.
class TranscriptWriter {
 public:
  TranscriptWriter(EnvKind kind, uint64_t seed, int players);

  void event(int turn, int player, int action_id, double reward, uint64_t state_hash);
  void write(const std::string& path) const;
  const std::string& text() const { return buffer_; }

 private:
  std::string buffer_;
};

struct ReplayResult {
  bool ok = false;
  int first_bad_turn = -1;
  std::string message;
};

// Re-simulates a transcript and compares state hashes turn by turn.
ReplayResult replay_verify(const std::string& path);
ReplayResult replay_verify_text(const std::string& text);

}  // namespace winne

#endif  // WINNE_TRANSCRIPT_HPP_
