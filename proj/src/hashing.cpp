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

#include "hprg/hashing.hpp"

#include <bit>
#include <string>

namespace hprg {

namespace {

u128 low_mask(int bits) {
  return bits >= 128 ? ~u128{0} : (u128{1} << bits) - 1;
}

u128 random_word(int bits, SeedStream& seeds) {
  const u128 hi = seeds.next();
  const u128 lo = seeds.next();
  return ((hi << 64) | lo) & low_mask(bits);
}

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) noexcept {
  const u128 p = static_cast<u128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(p & kMersenne61) + static_cast<std::uint64_t>(p >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

}  // namespace

PairwiseHash::PairwiseHash(int word_bits, u128 multiplier, u128 offset)
    : bits_(word_bits), mask_(low_mask(2 * word_bits)), a_(multiplier), b_(offset) {
  if (word_bits < 1 || word_bits > 64)
    throw ParameterError("PairwiseHash: word_bits must be in [1, 64], got " + std::to_string(word_bits));
  a_ &= mask_;
  b_ &= mask_;
}

PairwiseHash PairwiseHash::random(int word_bits, SeedStream& seeds) {
  if (word_bits < 1 || word_bits > 64)
    throw ParameterError("PairwiseHash: word_bits must be in [1, 64], got " + std::to_string(word_bits));
  const u128 a = random_word(2 * word_bits, seeds);
  const u128 b = random_word(2 * word_bits, seeds);
  return PairwiseHash(word_bits, a, b);
}

PairwiseHash PairwiseHash::identity(int word_bits) {
  if (word_bits < 1 || word_bits > 64)
    throw ParameterError("PairwiseHash: word_bits must be in [1, 64], got " + std::to_string(word_bits));
  return PairwiseHash(word_bits, u128{1} << word_bits, 0);
}

KWiseHash::KWiseHash(int independence, std::uint64_t domain, std::uint64_t range, std::uint64_t seed)
    : range_(range) {
  if (independence < 1) throw ParameterError("KWiseHash: independence must be >= 1");
  if (range < 1) throw ParameterError("KWiseHash: range must be >= 1");
  if (domain > kMersenne61 || range > kMersenne61)
    throw ParameterError("KWiseHash: domain and range must fit in the field GF(2^61 - 1)");
  SeedStream seeds(seed);
  coeffs_.resize(static_cast<std::size_t>(independence));
  for (auto& c : coeffs_) c = seeds.below(kMersenne61);
}

KWiseHash KWiseHash::from_coefficients(std::vector<std::uint64_t> coefficients, std::uint64_t range,
                                       std::uint64_t prime) {
  if (coefficients.empty()) throw ParameterError("KWiseHash: need at least one coefficient");
  if (range < 1) throw ParameterError("KWiseHash: range must be >= 1");
  if (prime < 2) throw ParameterError("KWiseHash: prime must be >= 2");
  KWiseHash h;
  for (auto& c : coefficients) c %= prime;
  h.coeffs_ = std::move(coefficients);
  h.range_ = range;
  h.prime_ = prime;
  return h;
}

std::uint64_t KWiseHash::field_value(std::uint64_t x) const noexcept {
  std::uint64_t acc = 0;
  if (prime_ == kMersenne61) {
    x %= kMersenne61;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = mulmod61(acc, x) + *it;
      if (acc >= kMersenne61) acc -= kMersenne61;
    }
    return acc;
  }
  x %= prime_;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = static_cast<std::uint64_t>((static_cast<u128>(acc) * x + *it) % prime_);
  return acc;
}

int sign_eval(const KWiseHash& h, std::uint64_t x) { return h.sign(x); }

int ceil_log2(std::uint64_t x) noexcept {
  return x <= 1 ? 0 : 64 - std::countl_zero(x - 1);
}

std::uint64_t next_pow2(std::uint64_t x) noexcept { return x <= 1 ? 1 : std::bit_ceil(x); }

std::uint64_t prev_pow2(std::uint64_t x) noexcept { return x <= 1 ? 1 : std::bit_floor(x); }

}  // namespace hprg
