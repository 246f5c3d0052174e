// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "coat/common.hpp"

namespace coat {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixes any number of 64-bit keys into one; used for per-cell / per-batch seeds.
template <typename... Keys>
constexpr std::uint64_t hash_seed(std::uint64_t seed, Keys... keys) {
  std::uint64_t h = splitmix64(seed);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(keys))), ...);
  return h;
}

/// PCG32 (XSH-RR) with an explicit stream selector.
///
/// Identical (seed, stream) pairs give identical sequences on every platform;
/// `split` derives independent child generators for parallel work items so
/// that results never depend on the number of workers.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "pcg32-xsh-rr";

  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform in [0, 1) with 32 bits of resolution.
  double uniform() { return next_u32() * 0x1p-32; }

  Vec2d uniform2() {
    const double a = uniform();
    return {a, uniform()};
  }

  [[nodiscard]] Rng split(std::uint64_t index) const {
    return Rng(hash_seed(seed_, stream_, index), hash_seed(stream_, index));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

}  // namespace coat
