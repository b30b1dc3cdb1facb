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

#include "hprg/fp_low.hpp"

#include <algorithm>
#include <numbers>

namespace hprg {

double pstable_sample(std::uint64_t block, double p) {
  if (!(p > 0.0 && p <= 2.0)) throw ParameterError("pstable_sample: p must be in (0, 2]");
  const double u = (static_cast<double>(block >> 32) + 0.5) * 0x1.0p-32;
  const double r = (static_cast<double>(block & 0xffffffffULL) + 0.5) * 0x1.0p-32;
  const double theta = std::numbers::pi * (u - 0.5);
  if (p == 1.0) return std::tan(theta);
  const double w = -std::log(r);
  return std::sin(p * theta) / std::pow(std::cos(theta), 1.0 / p) *
         std::pow(std::cos(theta * (1.0 - p)) / w, (1.0 - p) / p);
}

double geometric_mean_normalizer(double p, int factors) {
  if (!(p > 0.0 && p < 2.0)) throw ParameterError("geometric_mean_normalizer: p must be in (0, 2)");
  if (factors < 2) throw ParameterError("geometric_mean_normalizer: need at least two factors");
  const double k = factors;
  const double log_moment = std::log(2.0 / std::numbers::pi) + std::lgamma(1.0 - 1.0 / k) + std::lgamma(p / k) +
                            std::log(std::sin(std::numbers::pi * p / (2.0 * k)));
  return std::exp(k * log_moment);
}

double li_theta(double p) {
  if (!(p > 0.0 && p < 2.0)) throw ParameterError("li_theta: p must be in (0, 2)");
  const double base = 2.0 / std::numbers::pi * std::tgamma(p / 3.0) * std::tgamma(2.0 / 3.0) *
                      std::sin(std::numbers::pi * p / 6.0);
  return base * base * base;
}

double li_estimate(double dot1, double dot2, double dot3, double p) {
  const double product = std::abs(dot1) * std::abs(dot2) * std::abs(dot3);
  if (product == 0.0) return 0.0;
  return std::pow(product, p / 3.0) / li_theta(p);
}

double round_significant(double value, int bits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  return std::ldexp(std::round(std::ldexp(mantissa, bits)), exponent - bits);
}

int counter_precision_bits(std::uint64_t dimension) { return std::clamp(4 * ceil_log2(dimension), 24, 52); }

LightEstimator make_light_estimator(const LightConfig& config) {
  const std::uint64_t blocks = 3 * std::max<std::uint64_t>(config.dimension, 1);
  const std::uint64_t b = default_branching(blocks);
  return LightEstimator(config, prg_new(64, b, depth_for(b, blocks), mix64(config.seed ^ 0x3c6ef372fe94f82bULL)));
}

BaselineLightEstimator make_baseline_light_estimator(const LightConfig& config) {
  const std::uint64_t blocks = 3 * std::max<std::uint64_t>(config.dimension, 1);
  return BaselineLightEstimator(config, FullyRandomSource(64, blocks, mix64(config.seed ^ 0x3c6ef372fe94f82bULL)));
}

namespace {

HashPrg norm_prg(std::uint64_t dimension, int total_factors, std::uint64_t seed) {
  const std::uint64_t blocks = static_cast<std::uint64_t>(total_factors) * std::max<std::uint64_t>(dimension, 1);
  const std::uint64_t b = default_branching(blocks);
  return prg_new(64, b, depth_for(b, blocks), seed);
}

}  // namespace

NormEstimator::NormEstimator(double p, std::uint64_t dimension, std::uint64_t seed, int triples, int groups)
    : p_(p),
      d_(dimension),
      factors_(3 * triples),
      groups_(groups),
      prg_(norm_prg(dimension, 3 * std::max(triples, 1) * std::max(groups, 1), seed)) {
  if (!(p_ > 0.0 && p_ < 2.0)) throw ParameterError("NormEstimator: p must be in (0, 2)");
  if (d_ < 1) throw ParameterError("NormEstimator: dimension must be >= 1");
  if (triples < 1 || groups < 1) throw ParameterError("NormEstimator: triples and groups must be >= 1");
  dots_.assign(static_cast<std::size_t>(factors_) * groups_, 0.0);
}

void NormEstimator::update(std::uint64_t index, std::int64_t delta) {
  if (index >= d_) throw std::out_of_range("NormEstimator::update: coordinate out of range");
  if (delta == 0) return;
  for (std::size_t j = 0; j < dots_.size(); ++j)
    dots_[j] += pstable_sample(prg_.block_unchecked(j * d_ + index), p_) * static_cast<double>(delta);
}

double NormEstimator::estimate() const {
  const double log_theta = std::log(geometric_mean_normalizer(p_, factors_));
  std::vector<double> per_group;
  per_group.reserve(static_cast<std::size_t>(groups_));
  for (int g = 0; g < groups_; ++g) {
    double log_sum = 0;
    bool zero = false;
    for (int j = 0; j < factors_; ++j) {
      const double v = std::abs(dots_[static_cast<std::size_t>(g) * factors_ + j]);
      if (v == 0.0) {
        zero = true;
        break;
      }
      log_sum += std::log(v);
    }
    per_group.push_back(zero ? 0.0 : std::exp(p_ / factors_ * log_sum - log_theta));
  }
  return median_inplace(std::span<double>(per_group));
}

void NormEstimator::merge(const NormEstimator& other) {
  if (p_ != other.p_ || d_ != other.d_ || factors_ != other.factors_ || groups_ != other.groups_ ||
      !(prg_ == other.prg_))
    throw ParameterError("NormEstimator::merge: parameter or seed mismatch");
  for (std::size_t j = 0; j < dots_.size(); ++j) dots_[j] += other.dots_[j];
}

double norm_estimate_const(const TurnstileStream& stream, double p, std::uint64_t seed, int triples, int groups) {
  NormEstimator est(p, stream.dimension, seed, triples, groups);
  for (const auto& u : stream.updates) est.update(u.index, u.delta);
  return est.estimate();
}

std::vector<std::uint64_t> HeavyHitterReport::indices() const {
  std::vector<std::uint64_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.index);
  return out;
}

namespace {

std::uint64_t heavy_table_size(double p, double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw ParameterError("heavy_hitters: phi must be in (0, 1)");
  return next_pow2(static_cast<std::uint64_t>(std::ceil(std::pow(phi / 10.0, -p))));
}

int heavy_repetitions(std::uint64_t d) { return std::max(3, ceil_log2(d)) | 1; }

CountSketch heavy_sketch(double p, std::uint64_t d, double phi, std::uint64_t seed) {
  const int r = heavy_repetitions(d);
  const std::uint64_t blocks = static_cast<std::uint64_t>(r) * d;
  return make_countsketch(d, heavy_table_size(p, phi), r, 64, default_branching(blocks), seed);
}

}  // namespace

HeavyHitterSketch::HeavyHitterSketch(double p, std::uint64_t dimension, double phi, std::uint64_t seed)
    : p_(p),
      d_(dimension),
      phi_(phi),
      sketch_(heavy_sketch(p, dimension, phi, derive_seed(seed, 0))),
      norm_(p, dimension, derive_seed(seed, 1)) {}

void HeavyHitterSketch::update(std::uint64_t index, std::int64_t delta) {
  sketch_.update(index, delta);
  norm_.update(index, delta);
}

HeavyHitterReport HeavyHitterSketch::report() const {
  HeavyHitterReport rep;
  rep.phi = phi_;
  rep.norm_proxy = std::pow(norm_.estimate(), 1.0 / p_);
  if (rep.norm_proxy == 0.0) return rep;
  const double threshold = 0.8 * phi_ * rep.norm_proxy;
  for (std::uint64_t i = 0; i < d_; ++i) {
    const auto est = static_cast<double>(sketch_.estimate(i));
    if (est != 0.0 && std::abs(est) >= threshold) rep.entries.push_back({i, est, est > 0 ? 1 : -1});
  }
  return rep;
}

void HeavyHitterSketch::merge(const HeavyHitterSketch& other) {
  if (p_ != other.p_ || phi_ != other.phi_) throw ParameterError("HeavyHitterSketch::merge: parameter mismatch");
  sketch_.merge(other.sketch_);
  norm_.merge(other.norm_);
}

HeavyHitterReport heavy_hitters(const TurnstileStream& stream, double p, double phi, std::uint64_t seed) {
  HeavyHitterSketch hh(p, stream.dimension, phi, seed);
  for (const auto& u : stream.updates) hh.update(u.index, u.delta);
  return hh.report();
}

FpLowParams fp_low_params(std::uint64_t dimension, double p, double eps) {
  if (!(p > 0.0 && p < 2.0)) throw ParameterError("fp_low: p must be in (0, 2)");
  if (!(eps > 0.0 && eps <= 0.25)) throw ParameterError("fp_low: eps must be in (0, 1/4]");
  if (dimension < 1) throw ParameterError("fp_low: dimension must be >= 1");
  FpLowParams out;
  out.alpha = std::min(eps * eps * std::max(1.0, std::log2(static_cast<double>(dimension))), 0.25);
  out.phi = std::pow(out.alpha / 2.0, 1.0 / p);
  out.buckets = std::max<std::uint64_t>(64, next_pow2(static_cast<std::uint64_t>(std::ceil(20.0 / out.alpha))));
  out.light_copies = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / eps))));
  return out;
}

FpLowSketch::FpLowSketch(double p, std::uint64_t dimension, double eps, std::uint64_t seed)
    : p_(p),
      d_(dimension),
      params_(fp_low_params(dimension, p, eps)),
      heavy_(p, dimension, params_.phi, derive_seed(seed, 0)) {
  light_.reserve(static_cast<std::size_t>(params_.light_copies));
  for (int c = 0; c < params_.light_copies; ++c)
    light_.push_back(make_light_estimator({.p = p,
                                           .dimension = dimension,
                                           .alpha = params_.alpha,
                                           .buckets = params_.buckets,
                                           .seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(c))}));
}

void FpLowSketch::update(std::uint64_t index, std::int64_t delta) {
  heavy_.update(index, delta);
  for (auto& l : light_) l.update(index, delta);
}

FpLowResult FpLowSketch::estimate() const {
  FpLowResult out;
  out.alpha = params_.alpha;
  out.buckets = params_.buckets;
  out.light_copies = params_.light_copies;
  const HeavyHitterReport rep = heavy_.report();
  for (const auto& e : rep.entries) out.heavy_part += std::pow(std::abs(e.estimate), p_);
  out.heavy_count = rep.entries.size();
  const auto heavy = rep.indices();
  double light = 0;
  for (const auto& l : light_) light += l.finalize(heavy);
  out.light_part = light / static_cast<double>(light_.size());
  out.estimate = out.heavy_part + out.light_part;
  return out;
}

void FpLowSketch::merge(const FpLowSketch& other) {
  if (light_.size() != other.light_.size()) throw ParameterError("FpLowSketch::merge: parameter mismatch");
  heavy_.merge(other.heavy_);
  for (std::size_t c = 0; c < light_.size(); ++c) light_[c].merge(other.light_[c]);
}

FpLowResult fp_low_estimate(const TurnstileStream& stream, double p, double eps, std::uint64_t seed) {
  FpLowSketch sk(p, stream.dimension, eps, seed);
  for (const auto& u : stream.updates) sk.update(u.index, u.delta);
  return sk.estimate();
}

}  // namespace hprg
