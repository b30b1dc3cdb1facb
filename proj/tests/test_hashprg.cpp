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

#include <functional>
#include <ranges>
#include <vector>

#include "doctest.h"
#include "hprg/hashprg.hpp"

using namespace hprg;

namespace {

using MapPrg = BasicHashPrg<std::function<std::uint64_t(std::uint64_t)>>;

std::function<std::uint64_t(std::uint64_t)> xor_with(std::uint64_t c) {
  return [c](std::uint64_t x) { return x ^ c; };
}

}  // namespace

TEST_CASE("k = 0 outputs the seed word") {
  const auto prg = prg_new(32, 4, 0, 99);
  CHECK(prg.size() == 1);
  CHECK(prg.block(0) == prg.seed_word());
}

TEST_CASE("construction is reproducible from the master seed") {
  CHECK(prg_new(64, 8, 3, 5) == prg_new(64, 8, 3, 5));
  CHECK_FALSE(prg_new(64, 8, 3, 5) == prg_new(64, 8, 3, 6));
}

TEST_CASE("table shape is b*k") {
  const auto prg = prg_new(16, 2, 3, 1);
  CHECK(prg.size() == 8);
  CHECK(prg.table().size() == 6);
}

TEST_CASE("hand-composed blocks with injected hashes") {
  // h^(0)(x) = x, h^(1)(x) = x xor 5, seed 3, n = 4.
  const MapPrg one(4, 2, 1, 3, {xor_with(0), xor_with(5)});
  CHECK(one.block(0) == 3);
  CHECK(one.block(1) == 6);

  const MapPrg two(4, 2, 2, 3, {xor_with(0), xor_with(5), xor_with(0), xor_with(5)});
  CHECK(two.block(2) == 6);
  CHECK(two.block(3) == 3);
}

TEST_CASE("most significant digit selects the first hash applied") {
  // Distinct non-commuting maps per level make the order observable.
  auto add = [](std::uint64_t c) { return std::function<std::uint64_t(std::uint64_t)>([c](std::uint64_t x) { return (x + c) & 0xff; }); };
  auto mul = [](std::uint64_t c) { return std::function<std::uint64_t(std::uint64_t)>([c](std::uint64_t x) { return (x * c) & 0xff; }); };
  // Level 0: {+1, +2}; level 1: {*3, *5}.
  const MapPrg prg(8, 2, 2, 7, {add(1), add(2), mul(3), mul(5)});
  // j = 2 -> digits (j1 = 1, j0 = 0): h_0^(0)(h_1^(1)(7)) = 7 * 5 + 1.
  CHECK(prg.block(2) == 36);
  // j = 1 -> digits (0, 1): 7 * 3 + 2.
  CHECK(prg.block(1) == 23);
}

TEST_CASE("block access performs exactly k hash evaluations") {
  const auto prg = prg_new(64, 4, 5, 11);
  for (std::uint64_t j : {0ULL, 1ULL, 511ULL, 1023ULL}) {
    reset_eval_counters();
    (void)prg.block(j);
    CHECK(eval_counters().pairwise == 5);
  }
}

TEST_CASE("out of range access and bad shapes throw") {
  const auto prg = prg_new(16, 2, 3, 1);
  CHECK_THROWS_AS((void)prg.block(8), std::out_of_range);
  CHECK_THROWS_AS((void)prg.relabel(8), std::out_of_range);
  CHECK_THROWS_AS(prg_new(16, 3, 2, 1), ParameterError);
  CHECK_THROWS_AS(prg_new(0, 2, 2, 1), ParameterError);
  CHECK_THROWS_AS(prg_new(64, 2, 64, 1), ParameterError);
  CHECK_THROWS_AS((void)prg.stream_view(4, 5), std::out_of_range);
}

TEST_CASE("relabel by zero is the identity and relabel is an involution") {
  const auto prg = prg_new(64, 4, 3, 21);
  CHECK(prg.relabel(0) == prg);
  for (std::uint64_t ell : {1ULL, 17ULL, 63ULL}) CHECK(prg.relabel(ell).relabel(ell) == prg);
}

TEST_CASE("relabel permutes blocks by xor") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto prg = prg_new(40, 4, 3, seed);
    const std::uint64_t ell = (seed * 37) % prg.size();
    const auto moved = prg.relabel(ell);
    for (std::uint64_t i = 0; i < prg.size(); ++i) CHECK(moved.block(i) == prg.block(i ^ ell));
  }
}

TEST_CASE("Nisan generator") {
  const auto prg = nisan_new(32, 6, 8);
  CHECK(prg.variant() == PrgVariant::nisan);
  CHECK(prg.block(0) == prg.seed_word());
  for (int level = 0; level < 6; ++level) CHECK(prg.hash(level, 0) == PairwiseHash::identity(32));
  const auto single = nisan_new(32, 1, 8);
  CHECK(single.block(1) == single.hash(0, 1)(single.seed_word()));
}

TEST_CASE("Nisan generator unrolls the concatenation recursion") {
  // G_k(x) = G_{k-1}(x) ++ G_{k-1}(h_k(x)) with h_k the deepest level.
  const auto prg = nisan_new(24, 4, 77);
  std::function<void(int, std::uint64_t, std::vector<std::uint64_t>&)> expand =
      [&](int k, std::uint64_t x, std::vector<std::uint64_t>& out) {
        if (k == 0) return out.push_back(x);
        expand(k - 1, x, out);
        expand(k - 1, prg.hash(k - 1, 1)(x), out);
      };
  std::vector<std::uint64_t> expect;
  expand(4, prg.seed_word(), expect);
  for (std::uint64_t j = 0; j < prg.size(); ++j) CHECK(prg.block(j) == expect[j]);
}

TEST_CASE("stream view") {
  const auto prg = prg_new(64, 2, 4, 3);
  std::vector<std::uint64_t> all;
  for (auto v : prg.stream_view(0, prg.size())) all.push_back(v);
  REQUIRE(all.size() == prg.size());
  for (std::uint64_t j = 0; j < prg.size(); ++j) CHECK(all[j] == prg.block(j));
  CHECK(*prg.stream_view(5, 1).begin() == prg.block(5));
  std::vector<std::uint64_t> joined;
  for (auto v : prg.stream_view(0, 6)) joined.push_back(v);
  for (auto v : prg.stream_view(6, 10)) joined.push_back(v);
  CHECK(joined == all);
}

TEST_CASE("params round-trip and rebuild the same generator") {
  const PrgParams p{48, 8, 4, 123456789, PrgVariant::hashprg};
  CHECK(PrgParams::parse(p.to_string()) == p);
  CHECK(make_prg(p) == prg_new(48, 8, 4, 123456789));
  const PrgParams q{32, 2, 5, 7, PrgVariant::nisan};
  CHECK(PrgParams::parse(q.to_string()) == q);
  CHECK(make_prg(q) == nisan_new(32, 5, 7));
  CHECK_THROWS(PrgParams::parse("1 2 3"));
}

TEST_CASE("depth_for") {
  CHECK(depth_for(2, 1) == 0);
  CHECK(depth_for(2, 8) == 3);
  CHECK(depth_for(2, 9) == 4);
  CHECK(depth_for(16, 10000) == 4);
}
