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

#include "hprg/linf.hpp"

#include <algorithm>
#include <cmath>

namespace hprg {

LMap::LMap(std::uint64_t input_dim, std::uint64_t output_dim, std::uint64_t seed)
    : d_(input_dim),
      t_(output_dim),
      seed_(seed),
      bucket_hash_(2, std::max<std::uint64_t>(input_dim, 1), std::max<std::uint64_t>(output_dim, 1),
                   derive_seed(seed, 0)),
      sign_hash_(4, std::max<std::uint64_t>(input_dim, 1), 2, derive_seed(seed, 1)) {
  if (d_ < 1) throw ParameterError("LMap: input dimension must be >= 1");
  if (t_ < 1 || !std::has_single_bit(t_)) throw ParameterError("LMap: output dimension must be a power of two");
}

Routed LMap::route(std::uint64_t index, std::int64_t delta) const {
  if (index >= d_) throw std::out_of_range("LMap::route: coordinate out of range");
  return {bucket_hash_(index), sign_hash_.sign(index) * delta};
}

std::vector<std::int64_t> LMap::apply(std::span<const std::int64_t> x) const {
  if (x.size() != d_) throw ParameterError("LMap::apply: vector length differs from input dimension");
  std::vector<std::int64_t> y(t_, 0);
  for (std::uint64_t i = 0; i < d_; ++i) {
    if (x[i] == 0) continue;
    const Routed r = route(i, x[i]);
    y[r.bucket] += r.delta;
  }
  return y;
}

LinfVariant parse_linf_variant(const std::string& text) {
  if (text == "standard") return LinfVariant::standard;
  if (text == "tight") return LinfVariant::tight;
  throw ParameterError("linf: unknown variant '" + text + "'");
}

std::string to_string(LinfVariant v) { return v == LinfVariant::tight ? "tight" : "standard"; }

LinfGeometry linf_geometry(const LinfConfig& config) {
  if (config.dimension < 1) throw ParameterError("linf: dimension must be >= 1");
  if (!(config.eps > 0.0 && config.eps < 1.0)) throw ParameterError("linf: eps must be in (0, 1)");
  LinfGeometry g{};
  const double wide = std::ceil(std::pow(config.eps, -8.0));
  const std::uint64_t capped =
      wide >= static_cast<double>(config.dimension) ? config.dimension : static_cast<std::uint64_t>(wide);
  g.lmap_size = next_pow2(capped);
  g.table_size = next_pow2(static_cast<std::uint64_t>(std::ceil(2.0 / (config.eps * config.eps))));
  if (config.variant == LinfVariant::tight) {
    g.repetitions = 2 * static_cast<int>(std::ceil(std::log2(1.0 / config.eps))) + 1;
    // Power of two nearest to 1/eps.
    const double inv = 1.0 / config.eps;
    const std::uint64_t lo = prev_pow2(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(inv)));
    g.branching = std::max<std::uint64_t>(2, inv / static_cast<double>(lo) < 1.5 ? lo : 2 * lo);
  } else {
    g.repetitions = 2 * ceil_log2(g.lmap_size) + 1;
    g.branching = default_branching(static_cast<std::uint64_t>(g.repetitions) * g.lmap_size);
  }
  return g;
}

namespace {

CountSketch inner_sketch(const LinfConfig& config) {
  const LinfGeometry g = linf_geometry(config);
  return make_countsketch(g.lmap_size, g.table_size, g.repetitions, 64, g.branching, derive_seed(config.seed, 1));
}

}  // namespace

LinfSketch::LinfSketch(const LinfConfig& config)
    : variant_(config.variant),
      lmap_(config.dimension, linf_geometry(config).lmap_size, derive_seed(config.seed, 0)),
      inner_(inner_sketch(config)) {}

void LinfSketch::update(std::uint64_t index, std::int64_t delta) {
  const Routed r = lmap_.route(index, delta);
  inner_.update(r.bucket, r.delta);
}

double LinfSketch::estimate() const {
  std::int64_t best = 0;
  for (std::uint64_t j = 0; j < lmap_.output_dim(); ++j) {
    const std::int64_t e = inner_.estimate(j);
    best = std::max(best, e < 0 ? -e : e);
  }
  return static_cast<double>(best);
}

void LinfSketch::merge(const LinfSketch& other) {
  if (variant_ != other.variant_ || lmap_.seed() != other.lmap_.seed() ||
      lmap_.input_dim() != other.lmap_.input_dim())
    throw ParameterError("LinfSketch::merge: parameter or seed mismatch");
  inner_.merge(other.inner_);
}

double linf_estimate(const LinfSketch& sketch) { return sketch.estimate(); }

double linf_tight_estimate(const LinfSketch& sketch) {
  if (sketch.variant() != LinfVariant::tight) throw ParameterError("linf_tight_estimate: sketch is not tight");
  return sketch.estimate();
}

}  // namespace hprg
