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

// Additive-error l_inf estimation: a signed hash map [d] -> [t] composed
// with a CountSketch over [t].

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hprg/countsketch.hpp"
#include "hprg/hashing.hpp"

namespace hprg {

struct Routed {
  std::uint64_t bucket;
  std::int64_t delta;
  friend bool operator==(const Routed&, const Routed&) = default;
};

/// (Lx)_j = sum over i with h(i) = j of s(i) x_i; h 2-wise, s 4-wise.
class LMap {
 public:
  LMap(std::uint64_t input_dim, std::uint64_t output_dim, std::uint64_t seed);

  Routed route(std::uint64_t index, std::int64_t delta) const;
  std::vector<std::int64_t> apply(std::span<const std::int64_t> x) const;

  std::uint64_t input_dim() const noexcept { return d_; }
  std::uint64_t output_dim() const noexcept { return t_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t d_;
  std::uint64_t t_;
  std::uint64_t seed_;
  KWiseHash bucket_hash_;
  KWiseHash sign_hash_;
};

enum class LinfVariant { standard, tight };

LinfVariant parse_linf_variant(const std::string& text);
std::string to_string(LinfVariant v);

struct LinfConfig {
  std::uint64_t dimension = 1;
  double eps = 0.1;
  LinfVariant variant = LinfVariant::standard;
  std::uint64_t seed = 0;
};

struct LinfGeometry {
  std::uint64_t lmap_size;   // t = next_pow2(min(d, ceil(eps^-8)))
  std::uint64_t table_size;  // t' = next_pow2(ceil(2 / eps^2))
  int repetitions;           // 2 ceil(log2 t) + 1, or 2 ceil(log2 1/eps) + 1 when tight
  std::uint64_t branching;
};

LinfGeometry linf_geometry(const LinfConfig& config);

class LinfSketch {
 public:
  explicit LinfSketch(const LinfConfig& config);

  void update(std::uint64_t index, std::int64_t delta);
  /// Max over j < t of |median estimate of (Lx)_j|.
  double estimate() const;
  void merge(const LinfSketch& other);

  LinfVariant variant() const noexcept { return variant_; }
  const LMap& lmap() const noexcept { return lmap_; }
  const CountSketch& inner() const noexcept { return inner_; }
  std::size_t counter_count() const noexcept { return inner_.counter_count(); }

  friend bool operator==(const LinfSketch& a, const LinfSketch& b) {
    return a.variant_ == b.variant_ && a.lmap_.seed() == b.lmap_.seed() && a.inner_ == b.inner_;
  }

 private:
  LinfVariant variant_;
  LMap lmap_;
  CountSketch inner_;
};

double linf_estimate(const LinfSketch& sketch);
/// Requires the tight variant.
double linf_tight_estimate(const LinfSketch& sketch);

}  // namespace hprg
