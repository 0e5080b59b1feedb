// Copyright 2026 The kickflow Authors
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

#ifndef KICKFLOW_RNG_HPP
#define KICKFLOW_RNG_HPP

#include <cmath>
#include <cstdint>

namespace kickflow::rng {

// Seeds are derived with the splitmix64 finalizer, and every random stream is
// a plain splitmix64 counter. Both are pure integer arithmetic, so a given
// (master seed, slice, tag, cell) produces the same numbers on every platform
// and standard library.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream tags.
inline constexpr std::uint64_t kTagCosine = 0x636f73696e65ull;   // "cosine"
inline constexpr std::uint64_t kTagShot = 0x73686f74ull;         // "shot"
inline constexpr std::uint64_t kTagMoment = 0x6d6f6d656e74ull;   // "moment"
inline constexpr std::uint64_t kTagRealization = 0x7265616cull;  // "real"
inline constexpr std::uint64_t kTagSampler = 0x73616d70ull;      // "samp"

constexpr std::uint64_t derive_seed(std::uint64_t master, std::int64_t slice,
                                    std::uint64_t tag,
                                    std::int64_t cell = 0) noexcept {
  std::uint64_t h = mix64(master + kGolden);
  h = mix64(h ^ (static_cast<std::uint64_t>(slice) + kGolden));
  h = mix64(h ^ (tag + 2 * kGolden));
  h = mix64(h ^ (static_cast<std::uint64_t>(cell) + 3 * kGolden));
  return h;
}

class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }
  constexpr std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~0ull; }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Knuth's multiplication method; intended for small means only.
  int poisson(double mean) noexcept {
    const double limit = std::exp(-mean);
    int count = 0;
    double product = uniform();
    while (product > limit) {
      ++count;
      product *= uniform();
    }
    return count;
  }

 private:
  std::uint64_t state_;
};

}  // namespace kickflow::rng

#endif  // KICKFLOW_RNG_HPP
