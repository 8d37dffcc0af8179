// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace rtube {

// 64-bit finalizer (SplitMix64 / Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key of stream `index` under `master`. Streams never share state, so the
// draws of stream i do not depend on how many other streams exist or on the
// order in which workers consume them.
constexpr std::uint64_t split_key(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) + mix64(index + 0x9E3779B97F4A7C15ULL));
}

// Counter-based generator: draw n of stream `key` is mix64(key + n * golden).
// Any draw is addressable without replaying the ones before it.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr CounterRng stream(std::uint64_t master, std::uint64_t index) {
    return CounterRng(split_key(master, index));
  }

  constexpr std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }
  constexpr std::uint64_t at(std::uint64_t counter) const { return mix64(key_ + counter * kGolden); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace rtube
