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

#ifndef WINNE_GRAD_CHECK_HPP_
#define WINNE_GRAD_CHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "winne/graph.hpp"

namespace winne {

struct GradCheckResult {
  std::string name;
  int cases = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences (h = 1e-5) against the analytic gradients of
// one scalar-valued build. `build` must construct the same function from the
// current parameter values on every call.
double finite_difference_max_err(const std::function<Graph::NodeId(Tape&)>& build,
                                 const std::vector<Tensor*>& params);

// The full layer/loss sweep behind the `gradcheck` CLI command. Each entry
// runs `cases` random parameterizations and reports the worst relative error
// against the 1e-4 bar.
std::vector<GradCheckResult> run_grad_checks(uint64_t seed, int cases = 50);

std::string grad_check_report(const std::vector<GradCheckResult>& results);

}  // namespace winne

#endif  // WINNE_GRAD_CHECK_HPP_
