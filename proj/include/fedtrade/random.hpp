// Copyright 2026 The fedtrade Authors
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

#pragma once

// Counter-based random stream: draw n of stream s under seed k is
// splitmix64(k ^ mix(s) + n), so replays never depend on call order.

#include <cstdint>

namespace fedtrade {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { kAuction = 1, kPrices = 2, kArrivals = 3, kInstances = 4 };

inline std::uint64_t draw_bits(std::uint64_t seed, Stream stream, std::uint64_t counter) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)) ^
                    splitmix64(counter * 0xD1B54A32D192ED03ull + 1));
}

/// Uniform in [0, 1) with 53 random bits.
inline double draw_uniform(std::uint64_t seed, Stream stream, std::uint64_t counter) {
  return static_cast<double>(draw_bits(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Minimal UniformRandomBitGenerator over one stream, for <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, Stream stream) : seed_(seed), stream_(stream) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return draw_bits(seed_, stream_, counter_++); }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace fedtrade
