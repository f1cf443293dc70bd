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

#include "winne/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "winne/error.hpp"

namespace winne {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";
}

std::string encode_doubles_hex(const std::vector<double>& values) {
  std::string out;
  out.reserve(values.size() * 16);
  for (double d : values) {
    uint64_t bits = std::bit_cast<uint64_t>(d);
    for (int shift = 60; shift >= 0; shift -= 4) {
      out.push_back(kHexDigits[(bits >> shift) & 0xF]);
    }
  }
  return out;
}

std::vector<double> decode_doubles_hex(const std::string& hex) {
  require(hex.size() % 16 == 0, ErrorKind::kContract,
          "checkpoint: hex payload length not a multiple of 16");
  std::vector<double> out;
  out.reserve(hex.size() / 16);
  for (size_t i = 0; i < hex.size(); i += 16) {
    uint64_t bits = 0;
    for (size_t k = 0; k < 16; ++k) {
      char c = hex[i + k];
      uint64_t nibble;
      if (c >= '0' && c <= '9') nibble = static_cast<uint64_t>(c - '0');
      else if (c >= 'a' && c <= 'f') nibble = static_cast<uint64_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') nibble = static_cast<uint64_t>(c - 'A' + 10);
      else fail(ErrorKind::kContract, "checkpoint: invalid hex digit");
      bits = (bits << 4) | nibble;
    }
    out.push_back(std::bit_cast<double>(bits));
  }
  return out;
}

nlohmann::json checkpoint_to_json(
    const std::string& module, const nlohmann::json& layer_specs,
    const std::vector<std::pair<std::string, const Tensor*>>& params) {
  nlohmann::json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["module"] = module;
  doc["layers"] = layer_specs;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [name, tensor] : params) {
    nlohmann::json p;
    p["name"] = name;
    p["shape"] = tensor->shape;
    p["hex"] = encode_doubles_hex(tensor->data);
    arr.push_back(std::move(p));
  }
  doc["params"] = std::move(arr);
  return doc;
}

void checkpoint_from_json(
    const nlohmann::json& doc, const std::string& expected_module,
    const std::vector<std::pair<std::string, Tensor*>>& params) {
  require(doc.contains("format_version"), ErrorKind::kVersion,
          "checkpoint: missing format_version");
  int version = doc["format_version"].get<int>();
  require(version == kCheckpointVersion, ErrorKind::kVersion,
          "checkpoint: unsupported format_version " + std::to_string(version));
  require(doc.value("module", "") == expected_module, ErrorKind::kContract,
          "checkpoint: module mismatch, expected " + expected_module);

  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& p : doc.at("params")) {
    by_name[p.at("name").get<std::string>()] = &p;
  }
  for (const auto& [name, tensor] : params) {
    auto it = by_name.find(name);
    require(it != by_name.end(), ErrorKind::kContract,
            "checkpoint: missing parameter " + name);
    const nlohmann::json& p = *it->second;
    std::vector<int> shape = p.at("shape").get<std::vector<int>>();
    require(shape == tensor->shape, ErrorKind::kContract,
            "checkpoint: shape mismatch for " + name);
    std::vector<double> data = decode_doubles_hex(p.at("hex").get<std::string>());
    require(data.size() == tensor->size(), ErrorKind::kContract,
            "checkpoint: size mismatch for " + name);
    tensor->data = std::move(data);
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::kIo, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    require(out.good(), ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require(!ec, ErrorKind::kIo, "rename failed: " + target.string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  return contents;
}

}  // namespace winne
