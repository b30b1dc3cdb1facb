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

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "hprg/linf.hpp"
#include "hprg/stream.hpp"

using namespace hprg;

namespace {

double energy(const std::vector<std::int64_t>& v) {
  double e = 0;
  for (auto x : v) e += double(x) * double(x);
  return e;
}

}  // namespace

TEST_CASE("geometry at the reference point") {
  const auto g = linf_geometry({.dimension = 4096, .eps = 0.1});
  CHECK(g.lmap_size == 4096);
  CHECK(g.table_size == 256);
  CHECK(g.repetitions == 25);
  const auto tight = linf_geometry({.dimension = 4096, .eps = 0.1, .variant = LinfVariant::tight});
  CHECK(tight.lmap_size == 4096);
  CHECK(tight.repetitions == 9);
  CHECK(tight.branching == 8);
  CHECK(linf_geometry({.dimension = 1 << 20, .eps = 0.3}).lmap_size == next_pow2(static_cast<std::uint64_t>(std::ceil(std::pow(0.3, -8)))));
  CHECK_THROWS_AS(linf_geometry({.dimension = 100, .eps = 0.0}), ParameterError);
}

TEST_CASE("routing") {
  const LMap lm(1000, 64, 3);
  const auto zero = lm.route(17, 0);
  CHECK(zero.delta == 0);
  CHECK(zero.bucket < 64);
  CHECK(lm.route(17, 5) == lm.route(17, 5));
  CHECK(std::abs(lm.route(17, 5).delta) == 5);
  CHECK_THROWS_AS((void)lm.route(1000, 1), std::out_of_range);
  CHECK_THROWS_AS(LMap(10, 6, 1), ParameterError);
}

TEST_CASE("dimension reduction preserves energy in expectation") {
  SeedStream s(4);
  std::vector<std::int64_t> x(500);
  for (auto& v : x) v = static_cast<std::int64_t>(s.below(41)) - 20;
  x[7] = 300;
  const double truth = energy(x);
  constexpr int seeds = 10000;
  double sum = 0, sq = 0;
  for (int k = 0; k < seeds; ++k) {
    const double e = energy(LMap(500, 32, derive_seed(4, k)).apply(x));
    sum += e;
    sq += e * e;
  }
  const double mean = sum / seeds;
  const double se = std::sqrt((sq / seeds - mean * mean) / seeds);
  CHECK(std::abs(mean - truth) <= 3 * se);
}

TEST_CASE("dimension reduction concentrates at the lemma's width") {
  // alpha = 1/2, delta = 1/10: t >= 1 / (2 alpha^4 delta) = 80.
  const double alpha = 0.5, delta = 0.1;
  SeedStream s(5);
  std::vector<std::int64_t> x(2000);
  for (auto& v : x) v = static_cast<std::int64_t>(s.below(201)) - 100;
  const double truth = energy(x);
  constexpr int seeds = 2000;
  int above = 0;
  for (int k = 0; k < seeds; ++k)
    above += energy(LMap(2000, 128, derive_seed(5, k)).apply(x)) > (1 + 2 * alpha * alpha) * truth;
  CHECK(above / double(seeds) <= delta + 0.03);
}

TEST_CASE("large coordinates land in distinct buckets") {
  // Six coordinates above alpha ||x||_2; t >= 36 / (2 delta) with delta = 0.1.
  std::vector<std::int64_t> x(3000, 1);
  for (int k = 0; k < 6; ++k) x[static_cast<std::size_t>(k) * 400] = 1000;
  const double delta = 0.1;
  const std::uint64_t t = next_pow2(static_cast<std::uint64_t>(std::ceil(36 / (2 * delta))));
  constexpr int seeds = 2000;
  int distinct = 0;
  for (int k = 0; k < seeds; ++k) {
    const LMap lm(3000, t, derive_seed(6, k));
    std::set<std::uint64_t> buckets;
    for (int j = 0; j < 6; ++j) buckets.insert(lm.route(static_cast<std::uint64_t>(j) * 400, 1).bucket);
    distinct += buckets.size() == 6;
  }
  CHECK(distinct / double(seeds) >= 1 - delta - 0.03);
}

TEST_CASE("zero vector and single spike") {
  for (auto variant : {LinfVariant::standard, LinfVariant::tight}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      LinfSketch sk({.dimension = 4096, .eps = 0.1, .variant = variant, .seed = seed});
      CHECK(sk.estimate() == 0.0);
      sk.update(seed * 100, -321);
      CHECK(sk.estimate() == 321.0);
      if (variant == LinfVariant::tight) CHECK(linf_tight_estimate(sk) == 321.0);
    }
  }
  const LinfSketch standard({.dimension = 64, .eps = 0.3});
  CHECK_THROWS_AS((void)linf_tight_estimate(standard), ParameterError);
}

TEST_CASE("estimate is bounded by deterministic envelopes") {
  // Never above ||x||_1, and never above the largest inner cell.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ShapeSpec zipf;
    zipf.shape = Shape::zipf;
    const auto x = synthetic_vector(zipf, 2048, seed);
    LinfSketch sk({.dimension = 2048, .eps = 0.2, .seed = seed});
    for (std::uint64_t i = 0; i < x.size(); ++i) sk.update(i, x[i]);
    const double est = sk.estimate();
    CHECK(est <= dense_oracle(x).l1);
    std::int64_t cell = 0;
    for (auto c : sk.inner().table()) cell = std::max(cell, std::abs(c));
    CHECK(est <= double(cell));
  }
}

TEST_CASE("additive accuracy on a spike over noise") {
  int good = 0;
  for (int t = 0; t < 50; ++t) {
    const auto x = spike_with_ratio(4096, 0.3, derive_seed(7, t));
    const auto oracle = dense_oracle(x);
    LinfSketch sk({.dimension = 4096, .eps = 0.1, .seed = derive_seed(8, t)});
    for (std::uint64_t i = 0; i < x.size(); ++i) sk.update(i, x[i]);
    good += std::abs(linf_estimate(sk) - oracle.linf) <= 0.1 * oracle.l2;
  }
  CHECK(good >= 43);
}

TEST_CASE("tight variant uses fewer counters") {
  const LinfSketch standard({.dimension = 4096, .eps = 0.1});
  const LinfSketch tight({.dimension = 4096, .eps = 0.1, .variant = LinfVariant::tight});
  CHECK(standard.counter_count() == 25 * 256);
  CHECK(tight.counter_count() == 9 * 256);
}

TEST_CASE("composed sketch is linear") {
  SeedStream s(9);
  for (int trial = 0; trial < 10; ++trial) {
    LinfSketch whole({.dimension = 1000, .eps = 0.2, .seed = derive_seed(9, trial)});
    auto left = whole, right = whole;
    for (int u = 0; u < 500; ++u) {
      const auto i = s.below(1000);
      const auto v = static_cast<std::int64_t>(s.below(201)) - 100;
      whole.update(i, v);
      (s.next() & 1 ? left : right).update(i, v);
    }
    left.merge(right);
    CHECK(left == whole);
  }
  LinfSketch a({.dimension = 1000, .eps = 0.2, .seed = 1});
  CHECK_THROWS_AS(a.merge(LinfSketch({.dimension = 1000, .eps = 0.2, .seed = 2})), ParameterError);
}

TEST_CASE("variant names") {
  CHECK(parse_linf_variant("tight") == LinfVariant::tight);
  CHECK(parse_linf_variant("standard") == LinfVariant::standard);
  CHECK(to_string(LinfVariant::tight) == "tight");
  CHECK_THROWS_AS(parse_linf_variant("loose"), ParameterError);
}
