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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hprg/seed.hpp"

namespace hprg {

using u128 = unsigned __int128;

/// Thrown for out-of-range construction parameters across the library.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-thread evaluation tallies. Update-time claims are checked by
/// counting evaluations rather than timing them.
struct EvalCounters {
  std::uint64_t pairwise = 0;
  std::uint64_t kwise = 0;
  std::uint64_t total() const noexcept { return pairwise + kwise; }
};

inline thread_local EvalCounters tls_eval_counters;

inline EvalCounters& eval_counters() noexcept { return tls_eval_counters; }
inline void reset_eval_counters() noexcept { tls_eval_counters = {}; }

/// Multiply-add-shift hash on n-bit words: h(x) = high n bits of (a*x + b)
/// computed modulo 2^{2n}, with a, b drawn from [0, 2^{2n}).
class PairwiseHash {
 public:
  PairwiseHash(int word_bits, u128 multiplier, u128 offset);

  /// Random member of the family, drawn from `seeds`.
  static PairwiseHash random(int word_bits, SeedStream& seeds);
  static PairwiseHash random(int word_bits, std::uint64_t seed) {
    SeedStream s(seed);
    return random(word_bits, s);
  }
  /// a = 2^n, b = 0 evaluates to the identity on [0, 2^n).
  static PairwiseHash identity(int word_bits);

  std::uint64_t operator()(std::uint64_t x) const noexcept {
    ++tls_eval_counters.pairwise;
    return static_cast<std::uint64_t>(((a_ * x + b_) & mask_) >> bits_);
  }

  int bits() const noexcept { return bits_; }
  u128 multiplier() const noexcept { return a_; }
  u128 offset() const noexcept { return b_; }

  friend bool operator==(const PairwiseHash&, const PairwiseHash&) = default;

 private:
  int bits_;
  u128 mask_;
  u128 a_;
  u128 b_;
};

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

/// Degree-(k-1) polynomial over a prime field, reduced mod the range v.
/// Coefficients are stored lowest degree first.
class KWiseHash {
 public:
  /// k random coefficients over GF(2^61 - 1).
  KWiseHash(int independence, std::uint64_t domain, std::uint64_t range, std::uint64_t seed);

  static KWiseHash from_coefficients(std::vector<std::uint64_t> coefficients, std::uint64_t range,
                                     std::uint64_t prime = kMersenne61);

  std::uint64_t operator()(std::uint64_t x) const noexcept {
    ++tls_eval_counters.kwise;
    return field_value(x) % range_;
  }

  /// Sign view of a range-2 hash: 0 -> +1, 1 -> -1.
  int sign(std::uint64_t x) const noexcept { return ((*this)(x) & 1) ? -1 : 1; }

  int independence() const noexcept { return static_cast<int>(coeffs_.size()); }
  std::uint64_t range() const noexcept { return range_; }
  std::uint64_t prime() const noexcept { return prime_; }
  std::span<const std::uint64_t> coefficients() const noexcept { return coeffs_; }

 private:
  KWiseHash() = default;
  std::uint64_t field_value(std::uint64_t x) const noexcept;

  std::vector<std::uint64_t> coeffs_;
  std::uint64_t range_ = 1;
  std::uint64_t prime_ = kMersenne61;
};

/// Free-function spellings of the evaluation operations.
inline std::uint64_t pairwise_eval(const PairwiseHash& h, std::uint64_t x) { return h(x); }
inline std::uint64_t kwise_eval(const KWiseHash& h, std::uint64_t x) { return h(x); }
int sign_eval(const KWiseHash& h, std::uint64_t x);

/// ceil(log2(x)) for x >= 1.
int ceil_log2(std::uint64_t x) noexcept;
/// Smallest power of two >= x (x >= 1).
std::uint64_t next_pow2(std::uint64_t x) noexcept;
/// Largest power of two <= x (x >= 1).
std::uint64_t prev_pow2(std::uint64_t x) noexcept;

}  // namespace hprg
