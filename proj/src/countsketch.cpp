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

#include "hprg/countsketch.hpp"

#include <cmath>
#include <functional>

namespace hprg {

std::uint64_t default_branching(std::uint64_t blocks) {
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(blocks)));
  return std::max<std::uint64_t>(2, prev_pow2(std::max<std::uint64_t>(root, 1)));
}

CountSketch make_countsketch(std::uint64_t dimension, std::uint64_t table_size, int repetitions, int block_bits,
                             std::uint64_t branching, std::uint64_t master_seed, std::int64_t max_magnitude) {
  if (repetitions < 1) throw ParameterError("make_countsketch: repetitions must be >= 1");
  const int depth = depth_for(branching, static_cast<std::uint64_t>(repetitions) * dimension);
  return CountSketch(dimension, table_size, repetitions, prg_new(block_bits, branching, depth, master_seed),
                     max_magnitude);
}

BaselineCountSketch make_baseline_countsketch(std::uint64_t dimension, std::uint64_t table_size, int repetitions,
                                              int block_bits, std::uint64_t seed, std::int64_t max_magnitude) {
  if (repetitions < 1) throw ParameterError("make_baseline_countsketch: repetitions must be >= 1");
  return BaselineCountSketch(dimension, table_size, repetitions,
                             FullyRandomSource(block_bits, static_cast<std::uint64_t>(repetitions) * dimension, seed),
                             max_magnitude);
}

double tail_delta(std::span<const double> x, std::uint64_t t) {
  if (t == 0) throw ParameterError("tail_delta: t must be >= 1");
  if (t >= x.size()) return 0.0;
  std::vector<double> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(t), mags.end(), std::greater<>());
  double tail = 0;
  for (auto it = mags.begin() + static_cast<std::ptrdiff_t>(t); it != mags.end(); ++it) tail += *it * *it;
  return std::sqrt(tail) / std::sqrt(static_cast<double>(t));
}

double tail_delta(std::span<const std::int64_t> x, std::uint64_t t) {
  std::vector<double> v(x.begin(), x.end());
  return tail_delta(std::span<const double>(v), t);
}

}  // namespace hprg
