//
// Copyright 2026 The Envre Authors
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
//

// Seed derivation and bounded draws that are bit-identical across standard
// library implementations (std:: distributions are not).

#ifndef ENVRE_RANDOM_H_
#define ENVRE_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace envre {

// SplitMix64 finalizer; a bijection on 64-bit values.
std::uint64_t Mix64(std::uint64_t value);
std::uint64_t HashCombine(std::uint64_t seed, std::uint64_t value);
std::uint64_t Fnv1a64(std::string_view text);

// `count` pairwise-distinct seeds derived from `root`.
std::vector<std::uint64_t> DeriveSeeds(std::uint64_t root, std::size_t count);

class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, n); n must be positive.
  std::uint64_t Uniform(std::uint64_t n);
  // Uniform in [lo, hi].
  int UniformInt(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace envre

#endif  // ENVRE_RANDOM_H_
