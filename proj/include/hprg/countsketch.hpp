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

#include <algorithm>
#include <bit>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hprg/hashing.hpp"
#include "hprg/hashprg.hpp"
#include "hprg/seed.hpp"

namespace hprg {

/// Anything that hands out indexed n-bit blocks.
template <class S>
concept BlockSource = requires(const S& s, std::uint64_t j) {
  { s.block(j) } -> std::convertible_to<std::uint64_t>;
  { s.block_bits() } -> std::convertible_to<int>;
  { s.size() } -> std::convertible_to<std::uint64_t>;
};

/// Independent uniform blocks keyed by (seed, index). Used as the
/// fresh-entropy baseline against generator-driven sketches.
class FullyRandomSource {
 public:
  FullyRandomSource(int block_bits, std::uint64_t blocks, std::uint64_t seed)
      : bits_(block_bits), size_(blocks), key_(mix64(seed ^ 0xa0761d6478bd642fULL)) {
    if (block_bits < 1 || block_bits > 64) throw ParameterError("FullyRandomSource: block_bits must be in [1, 64]");
  }

  int block_bits() const noexcept { return bits_; }
  std::uint64_t size() const noexcept { return size_; }

  std::uint64_t block(std::uint64_t j) const {
    if (j >= size_) throw std::out_of_range("FullyRandomSource::block: index out of range");
    const std::uint64_t w = mix64(key_ + (j + 1) * 0x9e3779b97f4a7c15ULL);
    return bits_ == 64 ? w : w >> (64 - bits_);
  }

  friend bool operator==(const FullyRandomSource&, const FullyRandomSource&) = default;

 private:
  int bits_;
  std::uint64_t size_;
  std::uint64_t key_;
};

/// Thrown when an operation is invoked in the wrong lifecycle state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct CsCell {
  std::uint64_t bucket;
  int sign;
  friend bool operator==(const CsCell&, const CsCell&) = default;
};

/// Median of an odd-length buffer; reorders it.
template <class T>
T median_inplace(std::span<T> values) {
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

/// CountSketch whose bucket and sign for (repetition i, coordinate l) are
/// read from block i*d + l of a block source. Sign is the block's top bit
/// (0 -> +1), bucket its low log2(t) bits.
template <BlockSource Source>
class BasicCountSketch {
 public:
  /// max_magnitude bounds |x_l|; 0 picks the largest value the overflow
  /// guard d * M < 2^(w-1) admits.
  BasicCountSketch(std::uint64_t dimension, std::uint64_t table_size, int repetitions, Source source,
                   std::int64_t max_magnitude = 0)
      : d_(dimension), t_(table_size), r_(repetitions), source_(std::move(source)) {
    if (d_ < 1) throw ParameterError("CountSketch: dimension must be >= 1");
    if (t_ < 1 || !std::has_single_bit(t_)) throw ParameterError("CountSketch: table size must be a power of two");
    if (r_ < 1 || r_ % 2 == 0) throw ParameterError("CountSketch: repetitions must be odd");
    const int w = source_.block_bits();
    if (std::countr_zero(t_) > w - 1) throw ParameterError("CountSketch: block too narrow for sign and bucket bits");
    if (static_cast<u128>(r_) * d_ > source_.size())
      throw ParameterError("CountSketch: block source shorter than r*d");
    const u128 limit = (u128{1} << (w - 1));  // d*M must stay below this
    if (max_magnitude < 0) throw ParameterError("CountSketch: max_magnitude must be >= 0");
    if (max_magnitude == 0) {
      const u128 m = (limit - 1) / d_;
      if (m == 0) throw ParameterError("CountSketch: dimension too large for the counter guard");
      max_magnitude_ = static_cast<std::int64_t>(std::min<u128>(m, INT64_MAX));
    } else {
      if (static_cast<u128>(max_magnitude) * d_ >= limit)
        throw ParameterError("CountSketch: d*M must be below 2^(w-1)");
      max_magnitude_ = max_magnitude;
    }
    sign_shift_ = w - 1;
    table_.assign(static_cast<std::size_t>(r_) * t_, 0);
  }

  std::uint64_t dimension() const noexcept { return d_; }
  std::uint64_t table_size() const noexcept { return t_; }
  int repetitions() const noexcept { return r_; }
  std::int64_t max_magnitude() const noexcept { return max_magnitude_; }
  const Source& source() const noexcept { return source_; }
  std::span<const std::int64_t> table() const noexcept { return table_; }
  std::span<const std::int64_t> row(int rep) const {
    return std::span<const std::int64_t>(table_).subspan(static_cast<std::size_t>(rep) * t_, t_);
  }
  std::size_t counter_count() const noexcept { return table_.size(); }

  CsCell decode(int rep, std::uint64_t coord) const {
    if (rep < 0 || rep >= r_ || coord >= d_) throw std::out_of_range("CountSketch::decode: index out of range");
    const std::uint64_t blk = source_.block(static_cast<std::uint64_t>(rep) * d_ + coord);
    return {blk & (t_ - 1), ((blk >> sign_shift_) & 1) ? -1 : 1};
  }

  void update(std::uint64_t coord, std::int64_t delta) {
    if (coord >= d_) throw std::out_of_range("CountSketch::update: coordinate out of range");
    if (delta > max_magnitude_ || delta < -max_magnitude_)
      throw std::overflow_error("CountSketch::update: |delta| exceeds the configured bound M");
    if (delta == 0) return;
    for (int i = 0; i < r_; ++i) {
      const CsCell c = decode(i, coord);
      table_[static_cast<std::size_t>(i) * t_ + c.bucket] += c.sign * delta;
    }
  }

  std::int64_t estimate(std::uint64_t coord) const {
    if (coord >= d_) throw std::out_of_range("CountSketch::estimate: coordinate out of range");
    std::vector<std::int64_t> votes(static_cast<std::size_t>(r_));
    for (int i = 0; i < r_; ++i) {
      const CsCell c = decode(i, coord);
      votes[static_cast<std::size_t>(i)] = c.sign * table_[static_cast<std::size_t>(i) * t_ + c.bucket];
    }
    return median_inplace(std::span<std::int64_t>(votes));
  }

  bool compatible(const BasicCountSketch& other) const {
    return d_ == other.d_ && t_ == other.t_ && r_ == other.r_ && source_ == other.source_;
  }

  /// Cellwise sum; sketches must share dimension, geometry and source.
  void merge(const BasicCountSketch& other) {
    if (!compatible(other)) throw ParameterError("CountSketch::merge: parameter or seed mismatch");
    for (std::size_t c = 0; c < table_.size(); ++c) table_[c] += other.table_[c];
  }

  friend bool operator==(const BasicCountSketch& a, const BasicCountSketch& b) {
    return a.compatible(b) && a.table_ == b.table_;
  }

 private:
  std::uint64_t d_;
  std::uint64_t t_;
  int r_;
  Source source_;
  std::int64_t max_magnitude_ = 0;
  int sign_shift_ = 63;
  std::vector<std::int64_t> table_;
};

using CountSketch = BasicCountSketch<HashPrg>;
using BaselineCountSketch = BasicCountSketch<FullyRandomSource>;

template <BlockSource Source>
BasicCountSketch<Source> cs_merge(BasicCountSketch<Source> a, const BasicCountSketch<Source>& b) {
  a.merge(b);
  return a;
}

/// Power of two nearest below sqrt(blocks), at least 2.
std::uint64_t default_branching(std::uint64_t blocks);

/// CountSketch over a fresh generator of depth ceil(log_b(r*d)).
CountSketch make_countsketch(std::uint64_t dimension, std::uint64_t table_size, int repetitions, int block_bits,
                             std::uint64_t branching, std::uint64_t master_seed, std::int64_t max_magnitude = 0);

BaselineCountSketch make_baseline_countsketch(std::uint64_t dimension, std::uint64_t table_size, int repetitions,
                                              int block_bits, std::uint64_t seed, std::int64_t max_magnitude = 0);

/// ||tail_t(x)||_2 / sqrt(t): the t largest magnitudes are dropped.
double tail_delta(std::span<const double> x, std::uint64_t t);
double tail_delta(std::span<const std::int64_t> x, std::uint64_t t);

/// CountSketch plus i.i.d. Gaussian cell noise, added once at finalize.
template <BlockSource Source>
class BasicPrivateCountSketch {
 public:
  explicit BasicPrivateCountSketch(BasicCountSketch<Source> base) : base_(std::move(base)) {}

  void finalize(double sigma, std::uint64_t noise_seed) {
    if (finalized_) throw StateError("PrivateCountSketch: already finalized");
    if (!(sigma >= 0.0)) throw ParameterError("PrivateCountSketch: sigma must be >= 0");
    const auto table = base_.table();
    noisy_.assign(table.begin(), table.end());
    if (sigma > 0.0) {
      SeedStream seeds(noise_seed);
      for (double& cell : noisy_) cell += sigma * standard_normal(seeds);
    }
    sigma_ = sigma;
    finalized_ = true;
  }

  bool finalized() const noexcept { return finalized_; }
  double sigma() const noexcept { return sigma_; }
  const BasicCountSketch<Source>& base() const noexcept { return base_; }
  std::span<const double> noisy_table() const noexcept { return noisy_; }

  double estimate(std::uint64_t coord) const {
    if (!finalized_) throw StateError("PrivateCountSketch: estimate before finalize");
    const int r = base_.repetitions();
    const std::uint64_t t = base_.table_size();
    std::vector<double> votes(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
      const CsCell c = base_.decode(i, coord);
      votes[static_cast<std::size_t>(i)] = c.sign * noisy_[static_cast<std::size_t>(i) * t + c.bucket];
    }
    return median_inplace(std::span<double>(votes));
  }

 private:
  BasicCountSketch<Source> base_;
  std::vector<double> noisy_;
  double sigma_ = 0.0;
  bool finalized_ = false;
};

using PrivateCountSketch = BasicPrivateCountSketch<HashPrg>;

template <BlockSource Source>
BasicPrivateCountSketch<Source> pcs_finalize(BasicCountSketch<Source> cs, double sigma, std::uint64_t noise_seed) {
  BasicPrivateCountSketch<Source> out(std::move(cs));
  out.finalize(sigma, noise_seed);
  return out;
}

template <BlockSource Source>
double pcs_estimate(const BasicPrivateCountSketch<Source>& pcs, std::uint64_t coord) {
  return pcs.estimate(coord);
}

}  // namespace hprg
