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

#include "envre/random.h"

#include <limits>

#include "envre/error.h"

namespace envre {

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t HashCombine(std::uint64_t seed, std::uint64_t value) {
  return Mix64(seed ^ Mix64(value + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t Fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint64_t> DeriveSeeds(std::uint64_t root, std::size_t count) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(count);
  std::uint64_t state = root;
  for (std::size_t i = 0; i < count; ++i) {
    state += 0x9e3779b97f4a7c15ULL;
    seeds.push_back(Mix64(state));
  }
  return seeds;
}

std::uint64_t SeededStream::Uniform(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInternal, "Uniform(0)");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  std::uint64_t x = engine_();
  while (x > limit) x = engine_();
  return x % n;
}

int SeededStream::UniformInt(int lo, int hi) {
  if (hi < lo) throw Error(ErrorCode::kInternal, "UniformInt with hi < lo");
  return lo + static_cast<int>(Uniform(static_cast<std::uint64_t>(hi - lo) + 1));
}

}  // namespace envre
