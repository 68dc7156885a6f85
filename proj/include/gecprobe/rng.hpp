// Copyright 2026 The gecprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gecprobe {

/// Seeded random source whose draws are identical on every platform.
///
/// std::mt19937_64's raw output is fixed by the standard, but the standard
/// distributions are not, so bounded integers, reals and normals are derived
/// here directly from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(Mix(seed)) {}

  uint64_t Next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  uint64_t Below(uint64_t bound) {
    // Rejection keeps the draw unbiased.
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    uint64_t x = Next();
    while (x >= limit) x = Next();
    return x % bound;
  }

  /// Uniform real in [0, 1).
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = Uniform();
    while (u <= 0.0) u = Uniform();
    const double v = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 6.283185307179586 * v;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  template <class T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Derives an independent child seed, e.g. one per training stage.
  static uint64_t Derive(uint64_t seed, uint64_t stream) {
    return Mix(seed ^ Mix(stream + 0x9e3779b97f4a7c15ULL));
  }

 private:
  static uint64_t Mix(uint64_t z) {
    // splitmix64 finalizer spreads small consecutive seeds apart.
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Draws distinct integers from [0, size) in random order without
/// materializing the permutation (sparse Fisher-Yates).
class SparsePermutation {
 public:
  SparsePermutation(uint64_t size, Rng& rng) : size_(size), rng_(rng) {}

  bool Exhausted() const { return drawn_ == size_; }
  uint64_t drawn() const { return drawn_; }

  uint64_t Draw() {
    const uint64_t j = drawn_ + rng_.Below(size_ - drawn_);
    const uint64_t at_j = Lookup(j);
    displaced_[j] = Lookup(drawn_);
    displaced_.erase(drawn_);
    ++drawn_;
    return at_j;
  }

 private:
  uint64_t Lookup(uint64_t i) const {
    auto it = displaced_.find(i);
    return it == displaced_.end() ? i : it->second;
  }

  uint64_t size_;
  Rng& rng_;
  uint64_t drawn_ = 0;
  std::unordered_map<uint64_t, uint64_t> displaced_;
};

}  // namespace gecprobe
