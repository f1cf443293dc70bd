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

#ifndef WINNE_ERROR_HPP_
#define WINNE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace winne {

// Error taxonomy shared by the whole library. The C API maps kinds onto
// numeric status codes; C++ callers catch Error directly.
enum class ErrorKind {
  kContract,       // precondition violated by the caller
  kNumeric,        // NaN/Inf produced during computation
  kEmptySupport,   // masked distribution with no legal entry
  kIllegalAction,  // action not legal in the given state
  kInvalidBatch,   // training batch violates its structural requirements
  kTerminalState,  // operation on a finished game
  kConfig,         // bad run configuration
  kIo,             // file system failure
  kVersion,        // checkpoint format mismatch
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace winne

#endif  // WINNE_ERROR_HPP_
