/* Copyright 2026 The eieseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// SplitMix64 generator with explicit stream splitting.
//
// All randomness in the project comes from this generator so that scenes and
// test fixtures are reproducible bit-for-bit across platforms and languages:
//
//   next():    state += 0x9E3779B97F4A7C15
//              z = state
//              z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              return z ^ (z >> 31)
//   uniform(): (next() >> 11) * 2^-53            in [0, 1)
//   below(n):  next() % n                        (bias is negligible for small n)
//   fork(id):  SplitMix64(mix(seed ^ (id + 1) * 0xD1B54A32D192ED03))
//              where seed is the construction seed and mix() is the
//              finalizer above applied to a single value.

#pragma once

#include <cstdint>

namespace eieseg {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Integer in [lo, hi].
  long between(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

  // Independent child stream; depends only on the construction seed and id.
  SplitMix64 fork(std::uint64_t id) const { return SplitMix64(mix(seed_ ^ ((id + 1) * 0xD1B54A32D192ED03ull))); }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace eieseg
