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

#ifndef WINNE_CHECKPOINT_HPP_
#define WINNE_CHECKPOINT_HPP_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "winne/tensor.hpp"

namespace winne {

inline constexpr int kCheckpointVersion = 1;

// Versioned JSON checkpoint. Doubles are serialized as 16-character hex bit
// patterns so load/save round-trips are bit-exact.
nlohmann::json checkpoint_to_json(
    const std::string& module, const nlohmann::json& layer_specs,
    const std::vector<std::pair<std::string, const Tensor*>>& params);

// Restores parameters in place. Throws kVersion on format mismatch and
// kContract when a named tensor is missing or shaped differently.
void checkpoint_from_json(
    const nlohmann::json& doc, const std::string& expected_module,
    const std::vector<std::pair<std::string, Tensor*>>& params);

std::string encode_doubles_hex(const std::vector<double>& values);
std::vector<double> decode_doubles_hex(const std::string& hex);

// Write-temp-then-rename so partially written files never appear.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace winne

#endif  // WINNE_CHECKPOINT_HPP_
