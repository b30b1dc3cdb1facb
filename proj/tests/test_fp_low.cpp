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

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hprg/fp_low.hpp"
#include "hprg/stream.hpp"

using namespace hprg;

namespace {

// E|X|^q for a standard symmetric p-stable X, from the representation
// X = A(theta) * W^(-(1-p)/p) with theta uniform and W ~ Exp(1).
double stable_abs_moment(double p, double q) {
  auto a_pow = [&](double th) {
    const double a = std::sin(p * th) / std::pow(std::cos(th), 1 / p) * std::pow(std::cos((1 - p) * th), (1 - p) / p);
    return std::pow(std::abs(a), q);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double angle = integrator.integrate(a_pow, -std::numbers::pi / 2, std::numbers::pi / 2) / std::numbers::pi;
  return angle * boost::math::tgamma(1 - q * (1 - p) / p);
}

std::vector<std::int64_t> noise_vector(std::uint64_t d, std::int64_t amplitude, std::uint64_t seed) {
  SeedStream s(seed);
  std::vector<std::int64_t> x(d);
  for (auto& v : x) v = static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(2 * amplitude + 1))) - amplitude;
  return x;
}

}  // namespace

TEST_CASE("p-stable sampler is deterministic and rejects bad p") {
  CHECK(pstable_sample(0x123456789abcdefULL, 1.3) == pstable_sample(0x123456789abcdefULL, 1.3));
  CHECK_THROWS_AS(pstable_sample(1, 0.0), ParameterError);
  CHECK_THROWS_AS(pstable_sample(1, 2.5), ParameterError);
}

TEST_CASE("p = 2 stables are gaussian with variance 2") {
  SeedStream s(1);
  constexpr int draws = 100000;
  double sq = 0;
  for (int i = 0; i < draws; ++i) sq += std::pow(pstable_sample(s.next(), 2.0), 2);
  CHECK(std::abs(sq / draws - 2.0) <= 0.1);
}

TEST_CASE("p = 1 stables are Cauchy with median absolute value 1") {
  SeedStream s(2);
  std::vector<double> v(100000);
  for (auto& x : v) x = std::abs(pstable_sample(s.next(), 1.0));
  std::nth_element(v.begin(), v.begin() + 50000, v.end());
  CHECK(std::abs(v[50000] - 1.0) <= 0.05);
}

TEST_CASE("Li estimator values") {
  CHECK(li_estimate(0, 3, 4, 1.0) == 0.0);
  CHECK(li_theta(1.0) == doctest::Approx(8.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(li_estimate(1, 1, 1, 1.0) == doctest::Approx(0.649519).epsilon(1e-6));
  CHECK(li_estimate(-2, 2, -2, 1.0) == doctest::Approx(2 * 0.649519).epsilon(1e-6));
}

TEST_CASE("normalizer matches numerical integration of the stable law") {
  for (double p : {0.5, 1.0, 1.5}) {
    const double oracle = std::pow(stable_abs_moment(p, p / 3), 3);
    CHECK(li_theta(p) == doctest::Approx(oracle).epsilon(0.01));
    const double oracle8 = std::pow(stable_abs_moment(p, p / 8), 8);
    CHECK(geometric_mean_normalizer(p, 8) == doctest::Approx(oracle8).epsilon(0.01));
  }
}

TEST_CASE("Li estimator is unbiased on a unit vector") {
  SeedStream s(3);
  constexpr int draws = 100000;
  double sum = 0;
  for (int i = 0; i < draws; ++i)
    sum += li_estimate(pstable_sample(s.next(), 1.0), pstable_sample(s.next(), 1.0), pstable_sample(s.next(), 1.0), 1.0);
  CHECK(std::abs(sum / draws - 1.0) <= 0.02);
}

TEST_CASE("precision helpers") {
  CHECK(round_significant(1.0 + std::ldexp(1.0, -30), 24) == 1.0);
  CHECK(round_significant(-3.0, 8) == -3.0);
  CHECK(round_significant(0.0, 8) == 0.0);
  CHECK(round_significant(1.0 + std::ldexp(1.0, -10), 24) == 1.0 + std::ldexp(1.0, -10));
  CHECK(counter_precision_bits(2) == 24);
  CHECK(counter_precision_bits(1 << 10) == 40);
  CHECK(counter_precision_bits(std::uint64_t{1} << 20) == 52);
}

TEST_CASE("light estimator basics") {
  auto est = make_light_estimator({.p = 1.0, .dimension = 100, .alpha = 1.0 / 64, .seed = 4});
  CHECK(est.buckets() == 64);
  CHECK(est.bucket_hash().independence() == 64);
  CHECK(est.finalize() == 0.0);
  const auto before = est;
  est.update(5, 0);
  CHECK(std::ranges::equal(est.counters(), before.counters()));
  auto twice = est, once = est;
  twice.update(7, 1);
  twice.update(7, 1);
  once.update(7, 2);
  CHECK(std::ranges::equal(twice.counters(), once.counters()));
  once.update(7, -2);
  for (double c : once.counters()) CHECK(std::abs(c) <= 1e-12);
  CHECK(make_light_estimator({.p = 1.0, .dimension = 10, .alpha = 0.25, .seed = 1}).bucket_hash().independence() == 10);
}

TEST_CASE("excluding every nonzero coordinate leaves zero light mass") {
  auto est = make_light_estimator({.p = 1.0, .dimension = 1000, .alpha = 1.0 / 64, .buckets = 256, .seed = 5});
  const std::vector<std::uint64_t> heavy{3, 500, 999};
  for (auto i : heavy) est.update(i, 1000);
  CHECK(est.finalize(heavy) == 0.0);
  CHECK(est.finalize() > 0.0);
}

TEST_CASE("finalize rejects degenerate heavy sets") {
  auto est = make_light_estimator({.p = 1.0, .dimension = 1000, .alpha = 1.0 / 64, .buckets = 64, .seed = 6});
  std::vector<std::uint64_t> many(7);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = i;
  CHECK_THROWS_AS((void)est.finalize(many), DegenerateError);
  auto tiny = make_light_estimator({.p = 1.0, .dimension = 1000, .alpha = 1.0, .buckets = 1, .seed = 6});
  const std::vector<std::uint64_t> none;
  CHECK_NOTHROW((void)tiny.finalize(none));
}

TEST_CASE("light estimator mean is close to the light mass") {
  const std::uint64_t d = 256;
  const auto x = noise_vector(d, 50, 7);
  std::vector<std::uint64_t> heavy{0, 1, 2};
  double light = 0;
  for (std::uint64_t i = 3; i < d; ++i) light += std::abs(double(x[i]));
  constexpr int seeds = 4000;
  double sum = 0;
  for (int s = 0; s < seeds; ++s) {
    auto est = make_light_estimator({.p = 1.0, .dimension = d, .alpha = 1.0 / 64, .buckets = 64, .seed = derive_seed(7, s)});
    for (std::uint64_t i = 0; i < d; ++i) est.update(i, x[i]);
    sum += est.finalize(heavy);
  }
  CHECK(std::abs(sum / seeds - light) <= 0.05 * light);
}

TEST_CASE("update order changes finalize by at most rounding noise") {
  SeedStream s(8);
  std::vector<Update> updates;
  for (int u = 0; u < 2000; ++u) updates.push_back({s.below(500), static_cast<std::int64_t>(s.below(2001)) - 1000});
  auto forward = make_light_estimator({.p = 0.7, .dimension = 500, .alpha = 0.05, .seed = 8});
  auto backward = forward;
  for (const auto& u : updates) forward.update(u.index, u.delta);
  for (auto it = updates.rbegin(); it != updates.rend(); ++it) backward.update(it->index, it->delta);
  const double a = forward.finalize(), b = backward.finalize();
  CHECK(std::abs(a - b) <= std::ldexp(std::abs(a), -20));
}

TEST_CASE("light estimator merge") {
  auto a = make_light_estimator({.p = 1.2, .dimension = 300, .alpha = 0.05, .seed = 9});
  auto b = a, whole = a;
  SeedStream s(9);
  for (int u = 0; u < 500; ++u) {
    const auto i = s.below(300);
    const auto v = static_cast<std::int64_t>(s.below(201)) - 100;
    whole.update(i, v);
    (u % 3 ? a : b).update(i, v);
  }
  a.merge(b);
  CHECK(a.finalize() == doctest::Approx(whole.finalize()).epsilon(1e-9));
  CHECK_THROWS_AS(a.merge(make_light_estimator({.p = 1.2, .dimension = 300, .alpha = 0.05, .seed = 10})), ParameterError);
}

TEST_CASE("norm estimator") {
  NormEstimator zero(1.0, 50, 1);
  CHECK(zero.estimate() == 0.0);
  CHECK(zero.factors() == 144);

  int inside = 0;
  constexpr int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    NormEstimator est(1.0, 50, derive_seed(11, t));
    est.update(17, 1);
    const double v = est.estimate();
    inside += v >= 0.75 && v <= 1.35;
  }
  CHECK(inside >= 950);

  NormEstimator once(1.4, 80, 12, 48, 3), doubled(1.4, 80, 12, 48, 3);
  SeedStream s(12);
  for (int u = 0; u < 200; ++u) {
    const auto i = s.below(80);
    const auto v = static_cast<std::int64_t>(s.below(101)) - 50;
    once.update(i, v);
    doubled.update(i, 2 * v);
  }
  CHECK(doubled.estimate() == doctest::Approx(std::pow(2.0, 1.4) * once.estimate()).epsilon(1e-12));
}

TEST_CASE("heavy hitters find a lone spike with its sign") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<std::int64_t> x(1000, 0);
    x[seed * 37 % 1000] = seed % 2 ? 5000 : -5000;
    const auto report = heavy_hitters(stream_from_vector(x, seed), 1.0, 0.2, seed);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].index == seed * 37 % 1000);
    CHECK(report.entries[0].sign == (seed % 2 ? 1 : -1));
    CHECK(report.entries[0].estimate == doctest::Approx(5000.0 * report.entries[0].sign));
  }
}

TEST_CASE("heavy hitters report nothing on a flat vector") {
  ShapeSpec flat;
  flat.shape = Shape::flat;
  const auto x = synthetic_vector(flat, 2000, 13);
  CHECK(heavy_hitters(stream_from_vector(x, 13), 1.0, 0.3, 13).entries.empty());
}

TEST_CASE("planted heavy coordinates are recovered") {
  const double phi = 0.05;
  const std::uint64_t d = 2000;
  int all_found = 0;
  for (int t = 0; t < 100; ++t) {
    auto x = noise_vector(d, 10, derive_seed(14, t));
    double noise = 0;
    for (auto v : x) noise += std::abs(double(v));
    // Each spike h satisfies h = 2 phi (5h + noise).
    const auto h = static_cast<std::int64_t>(std::ceil(2 * phi * noise / (1 - 10 * phi)));
    std::vector<std::pair<std::uint64_t, int>> planted;
    for (int k = 0; k < 5; ++k) {
      const std::uint64_t at = 100 * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(t);
      const int sign = (k + t) % 2 ? 1 : -1;
      x[at] = sign * h;
      planted.push_back({at, sign});
    }
    const auto report = heavy_hitters(stream_from_vector(x, static_cast<std::uint64_t>(t)), 1.0, phi, derive_seed(15, t));
    bool ok = true;
    for (const auto& [at, sign] : planted) {
      const auto it = std::ranges::find_if(report.entries, [&](const HeavyEntry& e) { return e.index == at; });
      ok &= it != report.entries.end() && it->sign == sign;
    }
    all_found += ok;
  }
  CHECK(all_found >= 90);
}

TEST_CASE("fp_low parameters") {
  const auto p = fp_low_params(10000, 1.0, 0.1);
  CHECK(p.alpha == doctest::Approx(0.01 * std::log2(10000.0)));
  CHECK(p.phi == doctest::Approx(p.alpha / 2));
  CHECK(p.buckets == 256);
  CHECK(p.light_copies == 4);
  CHECK(fp_low_params(10000, 1.0, 0.25).alpha == 0.25);
  CHECK_THROWS_AS(fp_low_params(100, 1.0, 0.3), ParameterError);
  CHECK_THROWS_AS(fp_low_params(100, 1.0, 0.0), ParameterError);
}

TEST_CASE("fp_low on zero and single-spike inputs") {
  const TurnstileStream empty{500, 1, {}};
  CHECK(fp_low_estimate(empty, 1.0, 0.1, 1).estimate == 0.0);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::vector<std::int64_t> x(2000, 0);
    x[seed * 11] = 777;
    const auto r = fp_low_estimate(stream_from_vector(x, seed), 1.5, 0.1, seed);
    good += std::abs(r.estimate - std::pow(777.0, 1.5)) <= 0.2 * std::pow(777.0, 1.5);
  }
  CHECK(good >= 21);
}

TEST_CASE("fp_low sketch merge matches the unsplit sketch") {
  FpLowSketch a(1.0, 1000, 0.2, 16);
  auto b = a, whole = a;
  SeedStream s(16);
  for (int u = 0; u < 800; ++u) {
    const auto i = s.below(1000);
    const auto v = static_cast<std::int64_t>(s.below(201)) - 100;
    whole.update(i, v);
    (u % 2 ? a : b).update(i, v);
  }
  a.merge(b);
  const auto merged = a.estimate(), direct = whole.estimate();
  CHECK(merged.heavy_count == direct.heavy_count);
  CHECK(merged.estimate == doctest::Approx(direct.estimate).epsilon(1e-6));
}
