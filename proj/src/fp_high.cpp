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

#include "hprg/fp_high.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "hprg/countsketch.hpp"

namespace hprg {

namespace {

int hash_independence(std::uint64_t d) { return std::clamp(ceil_log2(d), 2, 64); }

HashPrg sketch_prg(std::uint64_t d, std::uint64_t branching, std::uint64_t seed) {
  const std::uint64_t b = branching == 0 ? fp_high_branching(d) : branching;
  return prg_new(64, b, depth_for(b, d), seed);
}

}  // namespace

DiscreteExponential discrete_exp(std::uint64_t block, int block_bits, int cap_exponent) {
  if (block_bits < 1 || block_bits > 64) throw ParameterError("discrete_exp: block_bits must be in [1, 64]");
  if (cap_exponent < 0 || cap_exponent > block_bits) throw ParameterError("discrete_exp: need 0 <= M <= n");
  if (cap_exponent > 63) throw ParameterError("discrete_exp: M must be <= 63");
  DiscreteExponential e{cap_exponent, cap_exponent};
  if (cap_exponent == 0) return e;
  // First M bits, moved to the top of a 64-bit word.
  std::uint64_t prefix = block << (64 - block_bits);
  prefix &= ~std::uint64_t{0} << (64 - cap_exponent);
  if (prefix != 0) e.exponent = std::countl_zero(prefix);
  return e;
}

std::uint64_t fp_high_branching(std::uint64_t dimension) {
  auto b = prev_pow2(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::pow(double(dimension), 0.25))));
  // Guard against pow rounding just below an exact power.
  while ((b * 2) * (b * 2) * (b * 2) * (b * 2) <= dimension) b *= 2;
  return std::max<std::uint64_t>(b, 2);
}

FpHighSketch::FpHighSketch(const FpHighConfig& config)
    : p_(config.p),
      d_(config.dimension),
      buckets_(config.buckets),
      cap_(0),
      prg_(sketch_prg(std::max<std::uint64_t>(config.dimension, 1), config.branching, mix64(config.seed))) {
  if (!(p_ > 2.0)) throw ParameterError("FpHighSketch: p must be > 2");
  if (d_ < 1) throw ParameterError("FpHighSketch: dimension must be >= 1");
  if (config.copies < 1) throw ParameterError("FpHighSketch: copies must be >= 1");
  if (config.max_abs < 1) throw ParameterError("FpHighSketch: max_abs must be >= 1");
  if (buckets_ == 0) {
    const double width = std::pow(double(d_), 1.0 - 2.0 / p_) * std::max(1.0, std::log2(double(d_)));
    buckets_ = next_pow2(static_cast<std::uint64_t>(std::ceil(width)));
  }
  cap_ = std::min(63, ceil_log2(static_cast<std::uint64_t>(
                          std::min<u128>(static_cast<u128>(d_) * static_cast<std::uint64_t>(config.max_abs),
                                         std::numeric_limits<std::uint64_t>::max()))));
  cap_ = std::max(cap_, 1);
  rounded_root_.resize(static_cast<std::size_t>(cap_) + 1);
  for (int j = 0; j <= cap_; ++j) rounded_root_[static_cast<std::size_t>(j)] = std::llround(std::exp2(j / p_));

  SeedStream seeds(config.seed);
  const int k = hash_independence(d_);
  for (int c = 0; c < config.copies; ++c) {
    bucket_hash_.emplace_back(k, d_, buckets_, seeds.next());
    sign_hash_.emplace_back(k, d_, 2, seeds.next());
  }
  rows_.assign(static_cast<std::size_t>(config.copies), std::vector<std::int64_t>(buckets_, 0));
}

DiscreteExponential FpHighSketch::exponential(std::uint64_t index) const {
  if (index >= d_) throw std::out_of_range("FpHighSketch: coordinate out of range");
  return discrete_exp(prg_.block_unchecked(index), 64, cap_);
}

std::int64_t FpHighSketch::scale(std::uint64_t index) const {
  return rounded_root_[static_cast<std::size_t>(exponential(index).exponent)];
}

void FpHighSketch::update(std::uint64_t index, std::int64_t delta) {
  const std::int64_t weighted = scale(index) * delta;
  for (std::size_t c = 0; c < rows_.size(); ++c)
    rows_[c][bucket_hash_[c](index)] += sign_hash_[c].sign(index) * weighted;
}

double FpHighSketch::estimate() const {
  std::vector<std::int64_t> maxima;
  maxima.reserve(rows_.size());
  for (const auto& row : rows_) {
    std::int64_t m = 0;
    for (auto v : row) m = std::max(m, v < 0 ? -v : v);
    maxima.push_back(m);
  }
  return static_cast<double>(median_inplace(std::span<std::int64_t>(maxima)));
}

void FpHighSketch::merge(const FpHighSketch& other) {
  if (p_ != other.p_ || d_ != other.d_ || buckets_ != other.buckets_ || cap_ != other.cap_ ||
      rows_.size() != other.rows_.size() || !(prg_ == other.prg_))
    throw ParameterError("FpHighSketch::merge: parameter or seed mismatch");
  for (std::size_t c = 0; c < rows_.size(); ++c)
    for (std::size_t j = 0; j < buckets_; ++j) rows_[c][j] += other.rows_[c][j];
}

bool operator==(const FpHighSketch& a, const FpHighSketch& b) {
  return a.p_ == b.p_ && a.d_ == b.d_ && a.buckets_ == b.buckets_ && a.cap_ == b.cap_ && a.prg_ == b.prg_ &&
         a.rows_ == b.rows_;
}

ZVectorReport zvector_properties_check(std::span<const std::int64_t> x, const HashPrg& prg, double p,
                                       int cap_exponent, double threshold_t) {
  if (!(p > 2.0)) throw ParameterError("zvector_properties_check: p must be > 2");
  if (prg.size() < x.size()) throw ParameterError("zvector_properties_check: generator shorter than d");
  ZVectorReport r;
  r.threshold_t = threshold_t;
  double moment = 0;
  for (auto v : x) moment += std::pow(std::abs(double(v)), p);
  r.norm_p = std::pow(moment, 1.0 / p);
  if (x.empty() || r.norm_p == 0) {
    r.max_in_range = r.count_in_range = true;
    return r;
  }
  const double cutoff = r.norm_p / std::pow(threshold_t, 1.0 / p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto e = discrete_exp(prg.block_unchecked(i), prg.block_bits(), cap_exponent);
    const double root = std::exp2(e.exponent / p);
    const double z = std::abs(double(x[i])) * root;
    r.max_scaled = std::max(r.max_scaled, z);
    if (z >= cutoff) ++r.count_above;
    const double rounded = double(std::llround(root));
    r.energy += rounded * rounded * double(x[i]) * double(x[i]);
  }
  r.max_in_range = r.max_scaled >= r.norm_p / std::pow(16.0, 1.0 / p) && r.max_scaled <= std::pow(50.0, 1.0 / p) * r.norm_p;
  r.count_in_range = double(r.count_above) <= 20.0 * threshold_t;
  r.energy_scale = std::pow(double(x.size()), 1.0 - 2.0 / p) * r.norm_p * r.norm_p;
  r.energy_ratio = r.energy / r.energy_scale;
  return r;
}

LpSampler::LpSampler(const LpSamplerConfig& config)
    : p_(config.p),
      d_(config.dimension),
      buckets_(0),
      prg_(sketch_prg(std::max<std::uint64_t>(config.dimension, 1), 0, mix64(config.seed))) {
  if (!(p_ > 2.0)) throw ParameterError("LpSampler: p must be > 2");
  if (d_ < 1) throw ParameterError("LpSampler: dimension must be >= 1");
  if (!(config.eps > 0.0 && config.eps <= 1.0)) throw ParameterError("LpSampler: eps must be in (0, 1]");
  if (config.copies < 1) throw ParameterError("LpSampler: copies must be >= 1");
  const double width =
      std::pow(double(d_), 1.0 - 2.0 / p_) * std::max(1.0, std::log2(double(d_))) / (config.eps * config.eps);
  buckets_ = std::max<std::uint64_t>(64, next_pow2(static_cast<std::uint64_t>(std::ceil(width))));
  SeedStream seeds(config.seed);
  const int k = hash_independence(d_);
  for (int c = 0; c < config.copies; ++c) {
    bucket_hash_.emplace_back(k, d_, buckets_, seeds.next());
    sign_hash_.emplace_back(k, d_, 2, seeds.next());
  }
  rows_.assign(static_cast<std::size_t>(config.copies), std::vector<double>(buckets_, 0.0));
}

double LpSampler::weight(std::uint64_t index) const {
  if (index >= d_) throw std::out_of_range("LpSampler: coordinate out of range");
  const std::uint64_t blk = prg_.block_unchecked(index);
  const double u = (static_cast<double>(blk >> 11) + 0.5) * 0x1.0p-53;
  return std::pow(-std::log(u), -1.0 / p_);
}

void LpSampler::update(std::uint64_t index, std::int64_t delta) {
  const double z = weight(index) * static_cast<double>(delta);
  for (std::size_t c = 0; c < rows_.size(); ++c) rows_[c][bucket_hash_[c](index)] += sign_hash_[c].sign(index) * z;
}

std::uint64_t LpSampler::sample() const {
  const std::size_t copies = rows_.size();
  std::vector<std::uint64_t> top(copies);
  std::vector<int> top_sign(copies);
  for (std::size_t c = 0; c < copies; ++c) {
    const auto& row = rows_[c];
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (std::abs(row[j]) > std::abs(row[best])) best = j;
    if (row[best] == 0.0) throw SamplerFailure("lp_sample: sketch is empty");
    top[c] = best;
    top_sign[c] = row[best] > 0 ? 1 : -1;
  }
  bool found = false;
  std::uint64_t chosen = 0;
  double chosen_mag = -1;
  std::vector<double> votes(copies);
  for (std::uint64_t i = 0; i < d_; ++i) {
    int pattern = 0;
    bool match = true;
    for (std::size_t c = 0; c < copies && match; ++c) {
      if (bucket_hash_[c](i) != top[c]) {
        match = false;
        break;
      }
      const int s = sign_hash_[c].sign(i) * top_sign[c];
      if (c == 0) pattern = s;
      else if (s != pattern) match = false;
      votes[c] = sign_hash_[c].sign(i) * rows_[c][top[c]];
    }
    if (!match) continue;
    std::vector<double> scratch = votes;
    const double mag = std::abs(median_inplace(std::span<double>(scratch)));
    if (mag > chosen_mag) {
      chosen = i;
      chosen_mag = mag;
      found = true;
    }
  }
  if (!found) throw SamplerFailure("lp_sample: no coordinate matches the heaviest bucket in every copy");
  return chosen;
}

void LpSampler::merge(const LpSampler& other) {
  if (p_ != other.p_ || d_ != other.d_ || buckets_ != other.buckets_ || rows_.size() != other.rows_.size() ||
      !(prg_ == other.prg_))
    throw ParameterError("LpSampler::merge: parameter or seed mismatch");
  for (std::size_t c = 0; c < rows_.size(); ++c)
    for (std::size_t j = 0; j < buckets_; ++j) rows_[c][j] += other.rows_[c][j];
}

std::uint64_t lp_sample(const TurnstileStream& stream, double p, double eps, std::uint64_t seed) {
  LpSampler sampler({.p = p, .dimension = stream.dimension, .eps = eps, .copies = 3, .seed = seed});
  for (const auto& u : stream.updates) sampler.update(u.index, u.delta);
  return sampler.sample();
}

}  // namespace hprg
