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

// (1 +- eps) moment estimation for 0 < p < 2: stable projections, the
// geometric-mean estimator, bucketed light-mass estimation and heavy
// coordinate extraction.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hprg/countsketch.hpp"
#include "hprg/hashing.hpp"
#include "hprg/hashprg.hpp"
#include "hprg/stream.hpp"

namespace hprg {

/// Symmetric p-stable draw with characteristic function exp(-|t|^p),
/// decoded from one 64-bit block (high 32 bits: angle, low 32: radius).
double pstable_sample(std::uint64_t block, double p);

/// E|X|^(p/K) raised to the K-th power for a standard p-stable X; the
/// normalizer of a K-fold geometric mean.
double geometric_mean_normalizer(double p, int factors);
/// K = 3 case.
double li_theta(double p);
/// (|d1 d2 d3|)^(p/3) / theta_p.
double li_estimate(double dot1, double dot2, double dot3, double p);

/// Rounds to the given number of significant bits.
double round_significant(double value, int bits);

/// Counter precision used at finalize for dimension d.
int counter_precision_bits(std::uint64_t dimension);

class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LightConfig {
  double p = 1.0;
  std::uint64_t dimension = 1;
  double alpha = 1.0 / 64;
  /// 0 picks max(64, next_pow2(ceil(1/alpha))).
  std::uint64_t buckets = 0;
  std::uint64_t seed = 0;
};

/// Buckets [d] -> [s] by a k-wise hash and keeps three stable dot products
/// per bucket. Coordinate i's stables come from blocks 3i, 3i+1, 3i+2.
template <BlockSource Source>
class BasicLightEstimator {
 public:
  BasicLightEstimator(const LightConfig& config, Source source)
      : p_(config.p), d_(config.dimension), alpha_(config.alpha), source_(std::move(source)) {
    if (!(p_ > 0.0 && p_ < 2.0)) throw ParameterError("LightEstimator: p must be in (0, 2)");
    if (d_ < 1) throw ParameterError("LightEstimator: dimension must be >= 1");
    if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw ParameterError("LightEstimator: alpha must be in (0, 1]");
    if (source_.size() / 3 < d_) throw ParameterError("LightEstimator: block source shorter than 3d");
    s_ = config.buckets != 0 ? config.buckets
                             : std::max<std::uint64_t>(64, next_pow2(static_cast<std::uint64_t>(std::ceil(1.0 / alpha_))));
    const int k = static_cast<int>(std::min(64.0, std::ceil(2.0 / alpha_) + 2.0));
    bucket_hash_ = KWiseHash(k, d_, s_, config.seed);
    counters_.assign(s_ * 3, 0.0);
  }

  void update(std::uint64_t index, std::int64_t delta) {
    if (index >= d_) throw std::out_of_range("LightEstimator::update: coordinate out of range");
    if (delta == 0) return;
    const std::uint64_t bucket = bucket_hash_(index);
    for (std::uint64_t j = 0; j < 3; ++j)
      counters_[bucket * 3 + j] += pstable_sample(source_.block(3 * index + j), p_) * static_cast<double>(delta);
  }

  /// Rescaled sum of geometric-mean estimates over buckets not hit by L.
  double finalize(std::span<const std::uint64_t> heavy = {}) const {
    std::vector<char> excluded(s_, 0);
    std::uint64_t hit = 0;
    for (auto i : heavy) {
      if (i >= d_) throw std::out_of_range("LightEstimator::finalize: heavy index out of range");
      auto& e = excluded[bucket_hash_(i)];
      if (!e) ++hit;
      e = 1;
    }
    if (s_ < 10 * heavy.size()) throw DegenerateError("LightEstimator: need s >= 10 |L|");
    if (hit == s_) throw DegenerateError("LightEstimator: heavy set covers every bucket");
    const int bits = counter_precision_bits(d_);
    double sum = 0;
    for (std::uint64_t b = 0; b < s_; ++b) {
      if (excluded[b]) continue;
      sum += li_estimate(round_significant(counters_[b * 3], bits), round_significant(counters_[b * 3 + 1], bits),
                         round_significant(counters_[b * 3 + 2], bits), p_);
    }
    return static_cast<double>(s_) / static_cast<double>(s_ - hit) * sum;
  }

  void merge(const BasicLightEstimator& other) {
    if (p_ != other.p_ || d_ != other.d_ || s_ != other.s_ || !(source_ == other.source_) ||
        !std::ranges::equal(bucket_hash_.coefficients(), other.bucket_hash_.coefficients()))
      throw ParameterError("LightEstimator::merge: parameter or seed mismatch");
    for (std::size_t c = 0; c < counters_.size(); ++c) counters_[c] += other.counters_[c];
  }

  double p() const noexcept { return p_; }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t buckets() const noexcept { return s_; }
  std::uint64_t dimension() const noexcept { return d_; }
  const KWiseHash& bucket_hash() const noexcept { return bucket_hash_; }
  std::span<const double> counters() const noexcept { return counters_; }

 private:
  double p_;
  std::uint64_t d_;
  double alpha_;
  std::uint64_t s_ = 0;
  Source source_;
  KWiseHash bucket_hash_ = KWiseHash(1, 1, 1, 0);
  std::vector<double> counters_;
};

using LightEstimator = BasicLightEstimator<HashPrg>;
using BaselineLightEstimator = BasicLightEstimator<FullyRandomSource>;

/// Generator-driven light estimator; the generator gets 3d blocks.
LightEstimator make_light_estimator(const LightConfig& config);
/// Same layout with independent uniform blocks.
BaselineLightEstimator make_baseline_light_estimator(const LightConfig& config);

/// Constant-factor estimate of ||x||_p^p from a single bucket of
/// 3*triples stable dot products, combined as one geometric mean and
/// median-boosted over `groups` independent groups.
class NormEstimator {
 public:
  NormEstimator(double p, std::uint64_t dimension, std::uint64_t seed, int triples = 48, int groups = 1);

  void update(std::uint64_t index, std::int64_t delta);
  /// Estimate of ||x||_p^p.
  double estimate() const;
  void merge(const NormEstimator& other);

  int factors() const noexcept { return factors_; }
  std::span<const double> dots() const noexcept { return dots_; }

 private:
  double p_;
  std::uint64_t d_;
  int factors_;
  int groups_;
  HashPrg prg_;
  std::vector<double> dots_;  // groups x factors
};

double norm_estimate_const(const TurnstileStream& stream, double p, std::uint64_t seed, int triples = 48,
                           int groups = 1);

struct HeavyEntry {
  std::uint64_t index;
  double estimate;
  int sign;
};

struct HeavyHitterReport {
  double phi = 0;
  double norm_proxy = 0;  // estimate of ||x||_p
  std::vector<HeavyEntry> entries;
  std::vector<std::uint64_t> indices() const;
};

/// CountSketch with t = next_pow2((phi/10)^-p) and r = O(log d), plus a
/// NormEstimator for the threshold.
class HeavyHitterSketch {
 public:
  HeavyHitterSketch(double p, std::uint64_t dimension, double phi, std::uint64_t seed);

  void update(std::uint64_t index, std::int64_t delta);
  /// All i with |estimate_i| >= 0.8 * phi * ||x||_p proxy.
  HeavyHitterReport report() const;
  void merge(const HeavyHitterSketch& other);

  const CountSketch& sketch() const noexcept { return sketch_; }
  const NormEstimator& norm() const noexcept { return norm_; }

 private:
  double p_;
  std::uint64_t d_;
  double phi_;
  CountSketch sketch_;
  NormEstimator norm_;
};

HeavyHitterReport heavy_hitters(const TurnstileStream& stream, double p, double phi, std::uint64_t seed);

struct FpLowResult {
  double estimate = 0;
  double heavy_part = 0;
  double light_part = 0;
  std::size_t heavy_count = 0;
  double alpha = 0;
  std::uint64_t buckets = 0;
  int light_copies = 0;
};

struct FpLowParams {
  double alpha = 0;
  double phi = 0;
  std::uint64_t buckets = 0;
  int light_copies = 0;
};

/// alpha = min(eps^2 log2 d, 1/4), phi = (alpha/2)^(1/p),
/// s = max(64, next_pow2(20/alpha)), ceil(log2(1/eps)) light copies.
FpLowParams fp_low_params(std::uint64_t dimension, double p, double eps);

class FpLowSketch {
 public:
  FpLowSketch(double p, std::uint64_t dimension, double eps, std::uint64_t seed);

  void update(std::uint64_t index, std::int64_t delta);
  FpLowResult estimate() const;
  void merge(const FpLowSketch& other);

  const FpLowParams& params() const noexcept { return params_; }

 private:
  double p_;
  std::uint64_t d_;
  FpLowParams params_;
  HeavyHitterSketch heavy_;
  std::vector<LightEstimator> light_;
};

FpLowResult fp_low_estimate(const TurnstileStream& stream, double p, double eps, std::uint64_t seed);

}  // namespace hprg
