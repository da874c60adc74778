// Copyright 2026 The gap-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GAPFORGE_RNG_HPP_
#define GAPFORGE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace gapforge {

// Counter-based deterministic generator. The output stream is a pure
// function of (seed, counter), so identical seeds reproduce identical
// streams on every platform and substreams can be derived without
// touching the parent's state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return mix(seed_, counter_++); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard Gaussian via Box-Muller; consumes exactly two counter steps.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Independent substream keyed by `stream`; derivation is one-way so
  // substreams never collide with the parent sequence.
  CounterRng derive(std::uint64_t stream) const {
    return CounterRng(mix(seed_ ^ 0x6a09e667f3bcc909ULL, stream));
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

inline std::vector<double> gaussian_vector(CounterRng& rng, std::size_t dim) {
  std::vector<double> out(dim);
  for (auto& v : out) v = rng.gaussian();
  return out;
}

}  // namespace gapforge

#endif  // GAPFORGE_RNG_HPP_
