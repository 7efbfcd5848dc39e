// Copyright 2026 The epurify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EPURIFY_RNG_HPP_
#define EPURIFY_RNG_HPP_

#include <cstdint>
#include <vector>

namespace epurify {

/// SplitMix64 generator. Every random draw in the library goes through this
/// type and the helpers below, never through <random> distributions, whose
/// output differs between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller (one value per call).
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Seed for run `index` of an experiment seeded with `seed`. Independent of
/// how runs are scheduled across threads.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Uniformly random permutation of [0, n) by Fisher-Yates.
std::vector<std::uint64_t> random_permutation(std::uint64_t n, Rng& rng);

}  // namespace epurify

#endif  // EPURIFY_RNG_HPP_
