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

#ifndef WINNE_TENSOR_HPP_
#define WINNE_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "winne/error.hpp"
#include "winne/rng.hpp"

namespace winne {

/// Dense row-major tensor of doubles. Rank 1 (vectors) and rank 2
/// (matrices) are the only shapes the graph ops use.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static Tensor zeros(std::vector<int> shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor vector(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
  }

  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static Tensor uniform_fan_in(std::vector<int> shape, int fan_in, RngStream& rng) {
    Tensor t = zeros(std::move(shape));
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : t.data) x = rng.uniform_real(-bound, bound);
    return t;
  }

  size_t size() const { return data.size(); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool is_scalar() const { return data.size() == 1; }

  double& at(int i) { return data[static_cast<size_t>(i)]; }
  double at(int i) const { return data[static_cast<size_t>(i)]; }
  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// FNV-1a over the raw bit patterns, used for parameter freeze checks and
// state hashing.
inline uint64_t fnv1a64(const void* bytes, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t hash_tensor(const Tensor& t, uint64_t h = 0xcbf29ce484222325ULL) {
  h = fnv1a64(t.shape.data(), t.shape.size() * sizeof(int), h);
  return fnv1a64(t.data.data(), t.data.size() * sizeof(double), h);
}

}  // namespace winne

#endif  // WINNE_TENSOR_HPP_
