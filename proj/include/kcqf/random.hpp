// Copyright 2026 The KCQF Authors.
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

#ifndef KCQF_RANDOM_HPP
#define KCQF_RANDOM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace kcqf {

/// Random stream used throughout the library. Every operation takes one explicitly.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

/// 64-bit FNV-1a, used to turn stable string labels into stream ids.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

/// Derives an independent stream seed from (master seed, run index, stream id).
/**
 * seed = splitmix64(splitmix64(splitmix64(master) ^ run) ^ stream). Each argument passes through
 * the finalizer before the next is folded in, so neighbouring run indices or stream ids give
 * unrelated seeds, and adding a new stream id never changes the seeds of existing ones.
 */
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ run) ^ stream);
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = normal(rng);
  }
  return out;
}

}  // namespace kcqf

#endif  // KCQF_RANDOM_HPP
