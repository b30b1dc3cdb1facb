/*
 *   Copyright 2026 The hprg Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>

namespace hprg {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-mode expansion of a single 64-bit master seed. The i-th word is
/// mix64(master + (i + 1) * golden), so any prefix of the stream is a pure
/// function of the master seed.
class SeedStream {
 public:
  explicit constexpr SeedStream(std::uint64_t master) noexcept : state_(master) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, bound) by rejection; bound must be nonzero.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
      const std::uint64_t w = next();
      if (w < limit) return w % bound;
    }
  }

  /// Uniform double in the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Standard normal draw by the Marsaglia polar method; consumes an even
/// number of words from `seeds` and discards the second variate.
inline double standard_normal(SeedStream& seeds) noexcept {
  for (;;) {
    const double u = 2.0 * seeds.uniform_open() - 1.0;
    const double v = 2.0 * seeds.uniform_open() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Child seed for (master, index); used for per-trial and per-draw seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) + mix64(index + 0x3c6ef372fe94f82bULL));
}

}  // namespace hprg
