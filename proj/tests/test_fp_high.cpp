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
#include <vector>

#include "doctest.h"
#include "hprg/fp_high.hpp"
#include "hprg/stream.hpp"

using namespace hprg;

TEST_CASE("discrete exponential reads the first one bit") {
  // M = 8 over 8-bit blocks: the first bit is the most significant.
  CHECK(discrete_exp(0x80, 8, 8).exponent == 0);
  CHECK(discrete_exp(0x80, 8, 8).value() == 1);
  CHECK(discrete_exp(0x01, 8, 8).exponent == 7);
  CHECK(discrete_exp(0x00, 8, 8).exponent == 8);
  CHECK(discrete_exp(0x00, 8, 8).value() == 256);
  // Only the first M bits count.
  CHECK(discrete_exp(0x0f, 8, 4).exponent == 4);
  CHECK(discrete_exp(std::uint64_t{1} << 63, 64, 20).exponent == 0);
  CHECK(discrete_exp(std::uint64_t{1} << 44, 64, 20).exponent == 19);
  CHECK_THROWS_AS(discrete_exp(0, 8, 9), ParameterError);
  CHECK_THROWS_AS(discrete_exp(0, 64, 64), ParameterError);
}

TEST_CASE("discrete exponential law by exhaustive enumeration") {
  constexpr int M = 12;
  std::vector<int> count(M + 1, 0);
  for (std::uint64_t prefix = 0; prefix < (1u << M); ++prefix) ++count[static_cast<std::size_t>(discrete_exp(prefix, M, M).exponent)];
  for (int j = 0; j < M; ++j) CHECK(count[static_cast<std::size_t>(j)] == (1 << (M - 1 - j)));
  CHECK(count[M] == 1);
  // min(1, 1/(2t)) <= Pr[E >= t] <= 1/t at every integer t <= 2^M.
  for (std::uint64_t t = 1; t <= (1u << M); ++t) {
    std::uint64_t ge = 0;
    for (int j = 0; j <= M; ++j)
      if ((std::uint64_t{1} << j) >= t) ge += static_cast<std::uint64_t>(count[static_cast<std::size_t>(j)]);
    CHECK(ge * t <= (1u << M));
    CHECK(ge * 2 * t >= (1u << M));
  }
}

TEST_CASE("branching and geometry") {
  CHECK(fp_high_branching(10000) == 8);
  CHECK(fp_high_branching(65536) == 16);
  CHECK(fp_high_branching(10) == 2);
  const FpHighSketch sk({.p = 3, .dimension = 10000, .copies = 1, .seed = 1});
  // d^(1/3) * log2 d = 21.5 * 13.3 ~ 286 -> 512 buckets.
  CHECK(sk.buckets() == 512);
  CHECK(sk.prg().block_bits() == 64);
  CHECK(sk.prg().branching() == 8);
  CHECK(sk.prg().size() >= 10000);
  CHECK(sk.cap_exponent() == ceil_log2(10000ULL << 20));
}

TEST_CASE("zero vector and zero updates") {
  FpHighSketch sk({.p = 3, .dimension = 100, .copies = 3, .seed = 2});
  CHECK(sk.estimate() == 0.0);
  const auto before = sk;
  sk.update(5, 0);
  CHECK(sk == before);
  sk.update(5, 9);
  sk.update(5, -9);
  CHECK(sk == before);
}

TEST_CASE("a coordinate with E = 1 adds its delta unscaled") {
  FpHighSketch sk({.p = 3, .dimension = 1000, .copies = 1, .seed = 3});
  std::uint64_t unit = 1000;
  for (std::uint64_t i = 0; i < 1000 && unit == 1000; ++i)
    if (sk.exponential(i).exponent == 0) unit = i;
  REQUIRE(unit < 1000);
  CHECK(sk.scale(unit) == 1);
  sk.update(unit, 13);
  int nonzero = 0;
  for (auto v : sk.counters(0)) {
    if (v == 0) continue;
    ++nonzero;
    CHECK(std::abs(v) == 13);
  }
  CHECK(nonzero == 1);
  CHECK(sk.estimate() == 13.0);
}

TEST_CASE("scales are rounded roots of the exponential") {
  const FpHighSketch sk({.p = 3, .dimension = 500, .copies = 1, .seed = 4});
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto e = sk.exponential(i);
    CHECK(e.exponent == sk.exponential(i).exponent);
    CHECK(sk.scale(i) == std::llround(std::cbrt(double(e.value()))));
  }
}

TEST_CASE("single spike estimate is |c| times its scale") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FpHighSketch sk({.p = 3, .dimension = 2000, .copies = 3, .seed = seed});
    sk.update(777, -40);
    CHECK(sk.estimate() == 40.0 * static_cast<double>(sk.scale(777)));
  }
}

TEST_CASE("update cost is constant in d") {
  for (std::uint64_t d : {1000ULL, 10000ULL, 100000ULL}) {
    FpHighSketch sk({.p = 3, .dimension = d, .copies = 3, .seed = 5});
    const auto k = static_cast<std::uint64_t>(sk.prg().depth());
    for (std::uint64_t i : {std::uint64_t{0}, d / 2, d - 1}) {
      reset_eval_counters();
      sk.update(i, 1);
      CHECK(eval_counters().pairwise == k);
      CHECK(eval_counters().kwise == 6);
    }
  }
}

TEST_CASE("scale equivariance and order insensitivity") {
  SeedStream s(6);
  FpHighSketch a({.p = 3.5, .dimension = 300, .copies = 3, .seed = 6});
  auto b = a, c = a;
  std::vector<Update> updates;
  for (int u = 0; u < 500; ++u) updates.push_back({s.below(300), static_cast<std::int64_t>(s.below(201)) - 100});
  for (const auto& u : updates) a.update(u.index, u.delta);
  for (const auto& u : updates) b.update(u.index, -3 * u.delta);
  for (auto it = updates.rbegin(); it != updates.rend(); ++it) c.update(it->index, it->delta);
  CHECK(b.estimate() == 3.0 * a.estimate());
  CHECK(c == a);
}

TEST_CASE("merge equals unsplit and rejects mismatches") {
  SeedStream s(7);
  FpHighSketch whole({.p = 3, .dimension = 400, .copies = 3, .seed = 7});
  auto left = whole, right = whole;
  for (int u = 0; u < 600; ++u) {
    const auto i = s.below(400);
    const auto v = static_cast<std::int64_t>(s.below(201)) - 100;
    whole.update(i, v);
    (s.next() & 1 ? left : right).update(i, v);
  }
  left.merge(right);
  CHECK(left == whole);
  CHECK_THROWS_AS(left.merge(FpHighSketch({.p = 3, .dimension = 400, .copies = 3, .seed = 8})), ParameterError);
}

TEST_CASE("configuration checks") {
  CHECK_THROWS_AS(FpHighSketch({.p = 2.0, .dimension = 10}), ParameterError);
  CHECK_THROWS_AS(FpHighSketch({.p = 3.0, .dimension = 10, .copies = 0}), ParameterError);
}

TEST_CASE("z-vector statistics") {
  const auto prg = prg_new(64, 8, 5, 9);
  const std::vector<std::int64_t> zero(100, 0);
  const auto r0 = zvector_properties_check(zero, prg, 3, 20);
  CHECK(r0.max_scaled == 0.0);
  CHECK(r0.count_above == 0);
  CHECK(r0.energy == 0.0);

  std::vector<std::int64_t> one(100, 0);
  one[0] = 25;
  const auto r1 = zvector_properties_check(one, prg, 3, 20);
  CHECK(r1.max_scaled >= 25.0);
  CHECK(r1.norm_p == doctest::Approx(25.0));
}

TEST_CASE("maximum of scaled coordinates lands in its window for most seeds") {
  ShapeSpec shape;
  shape.shape = Shape::gaussian;
  const std::uint64_t d = 10000;
  const auto x = synthetic_vector(shape, d, 10);
  int in_range = 0, count_ok = 0;
  constexpr int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const auto prg = prg_new(64, 8, depth_for(8, d), derive_seed(10, static_cast<std::uint64_t>(s)));
    const auto r = zvector_properties_check(x, prg, 3, 34);
    in_range += r.max_in_range;
    count_ok += r.count_in_range;
  }
  CHECK(in_range >= 900);
  CHECK(count_ok >= 900);
}

TEST_CASE("p = 3 estimate is a constant factor approximation on a gaussian vector") {
  ShapeSpec shape;
  shape.shape = Shape::gaussian;
  int good = 0;
  for (int t = 0; t < 20; ++t) {
    const auto x = synthetic_vector(shape, 5000, derive_seed(11, t));
    const auto truth = dense_oracle(x).norm(3);
    FpHighSketch sk({.p = 3, .dimension = 5000, .copies = 3, .seed = derive_seed(12, t)});
    for (std::uint64_t i = 0; i < x.size(); ++i) sk.update(i, x[i]);
    const double ratio = sk.estimate() / truth;
    good += ratio >= 0.125 && ratio <= 8;
  }
  CHECK(good >= 15);
}

TEST_CASE("lp sampler returns a lone spike") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::vector<std::int64_t> x(512, 0);
    const auto at = seed * 7 % 512;
    x[at] = seed % 2 ? 300 : -300;
    CHECK(lp_sample(stream_from_vector(x, seed), 3, 0.5, seed) == at);
  }
}

TEST_CASE("lp sampler on an empty vector fails cleanly") {
  LpSampler sampler({.p = 3, .dimension = 64, .eps = 0.5, .seed = 1});
  CHECK_THROWS_AS((void)sampler.sample(), SamplerFailure);
}

TEST_CASE("lp sampler splits evenly between two equal spikes") {
  std::vector<std::int64_t> x(1024, 0);
  x[10] = 500;
  x[900] = -500;
  constexpr int runs = 10000;
  int first = 0, second = 0;
  for (int r = 0; r < runs; ++r) {
    try {
      const auto i = lp_sample(stream_from_vector(x, static_cast<std::uint64_t>(r)), 3, 0.5, derive_seed(13, r));
      first += i == 10;
      second += i == 900;
    } catch (const SamplerFailure&) {
    }
  }
  const double n = first + second;
  CHECK(n >= 0.99 * runs);
  CHECK(std::abs(first / n - 0.5) <= 3 * 0.5 / std::sqrt(n));
}

TEST_CASE("lp sampler weights are block-stable and merge is exact enough") {
  LpSampler a({.p = 3, .dimension = 200, .eps = 0.5, .seed = 14});
  CHECK(a.weight(17) == a.weight(17));
  CHECK(a.buckets() >= 64);
  auto b = a, whole = a;
  SeedStream s(14);
  for (int u = 0; u < 300; ++u) {
    const auto i = s.below(200);
    const auto v = static_cast<std::int64_t>(s.below(201)) - 100;
    whole.update(i, v);
    (u % 2 ? a : b).update(i, v);
  }
  a.merge(b);
  for (int c = 0; c < 3; ++c) {
    const auto x = a.counters(c), y = whole.counters(c);
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(x[j] == doctest::Approx(y[j]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(LpSampler({.p = 2, .dimension = 10}), ParameterError);
}
