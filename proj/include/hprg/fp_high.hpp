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

// Moment estimation for p > 2 by discrete exponential scaling, and the
// relaxed lp sampler.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hprg/hashing.hpp"
#include "hprg/hashprg.hpp"
#include "hprg/stream.hpp"

namespace hprg {

/// Power of two 2^j with j = leading zeros among the first M bits of a
/// block (reading from the top bit); j = M when those bits are all zero.
struct DiscreteExponential {
  int cap_exponent = 0;
  int exponent = 0;
  std::uint64_t value() const noexcept { return std::uint64_t{1} << exponent; }
};

DiscreteExponential discrete_exp(std::uint64_t block, int block_bits, int cap_exponent);

/// Largest power of two <= d^(1/4), at least 2.
std::uint64_t fp_high_branching(std::uint64_t dimension);

struct FpHighConfig {
  double p = 3.0;
  std::uint64_t dimension = 1;
  int copies = 1;
  std::uint64_t seed = 0;
  /// Declared bound on |x_i|; fixes M = ceil(log2(d * bound)).
  std::int64_t max_abs = 1 << 20;
  /// 0 picks next_pow2(d^(1 - 2/p) * log2 d).
  std::uint64_t buckets = 0;
  /// 0 picks fp_high_branching(d).
  std::uint64_t branching = 0;
};

class FpHighSketch {
 public:
  explicit FpHighSketch(const FpHighConfig& config);

  void update(std::uint64_t index, std::int64_t delta);
  /// Max bucket magnitude, median over copies.
  double estimate() const;
  void merge(const FpHighSketch& other);

  double p() const noexcept { return p_; }
  std::uint64_t dimension() const noexcept { return d_; }
  std::uint64_t buckets() const noexcept { return buckets_; }
  int copies() const noexcept { return static_cast<int>(rows_.size()); }
  int cap_exponent() const noexcept { return cap_; }
  const HashPrg& prg() const noexcept { return prg_; }
  std::span<const std::int64_t> counters(int copy) const { return rows_.at(static_cast<std::size_t>(copy)); }

  /// Discrete exponential attached to coordinate i (pure in i).
  DiscreteExponential exponential(std::uint64_t index) const;
  /// round(E_i^(1/p)).
  std::int64_t scale(std::uint64_t index) const;

  friend bool operator==(const FpHighSketch& a, const FpHighSketch& b);

 private:
  double p_;
  std::uint64_t d_;
  std::uint64_t buckets_;
  int cap_;
  HashPrg prg_;
  std::vector<std::int64_t> rounded_root_;  // round(2^(j/p)), j = 0..M
  std::vector<KWiseHash> bucket_hash_;
  std::vector<KWiseHash> sign_hash_;
  std::vector<std::vector<std::int64_t>> rows_;
};

/// Statistics of z_i = x_i * E_i^(1/p) against the ranges a well-behaved
/// exponential draw should satisfy.
struct ZVectorReport {
  double norm_p = 0;
  double max_scaled = 0;  // max_i |x_i| E_i^(1/p)
  bool max_in_range = false;  // within [norm/16^(1/p), 50^(1/p) norm]
  double threshold_t = 0;
  std::uint64_t count_above = 0;  // #{i : |x_i| E_i^(1/p) >= norm / T^(1/p)}
  bool count_in_range = false;  // count_above <= 20 T
  double energy = 0;  // sum_i round(E_i^(1/p))^2 x_i^2
  double energy_scale = 0;  // d^(1-2/p) * norm_p^2
  double energy_ratio = 0;
};

ZVectorReport zvector_properties_check(std::span<const std::int64_t> x, const HashPrg& prg, double p,
                                       int cap_exponent, double threshold_t = 10.0);

class SamplerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpSamplerConfig {
  double p = 3.0;
  std::uint64_t dimension = 1;
  double eps = 0.5;
  int copies = 3;
  std::uint64_t seed = 0;
};

/// Scales x_i by e_i^(-1/p), e_i a continuous exponential read from
/// generator block i, sketches the result with independent CountSketch
/// rows and recovers the coordinate that owns the heaviest bucket.
class LpSampler {
 public:
  explicit LpSampler(const LpSamplerConfig& config);

  void update(std::uint64_t index, std::int64_t delta);
  /// Throws SamplerFailure when no coordinate matches every copy.
  std::uint64_t sample() const;
  void merge(const LpSampler& other);

  std::uint64_t buckets() const noexcept { return buckets_; }
  const HashPrg& prg() const noexcept { return prg_; }
  /// e_i^(-1/p).
  double weight(std::uint64_t index) const;
  std::span<const double> counters(int copy) const { return rows_.at(static_cast<std::size_t>(copy)); }

 private:
  double p_;
  std::uint64_t d_;
  std::uint64_t buckets_;
  HashPrg prg_;
  std::vector<KWiseHash> bucket_hash_;
  std::vector<KWiseHash> sign_hash_;
  std::vector<std::vector<double>> rows_;
};

std::uint64_t lp_sample(const TurnstileStream& stream, double p, double eps, std::uint64_t seed);

}  // namespace hprg
