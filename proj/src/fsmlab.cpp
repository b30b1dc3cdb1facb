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

#include "hprg/fsmlab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hprg::fsm {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t s = a.size();
  Matrix c(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t m = 0; m < s; ++m) {
      const double aim = a[i][m];
      if (aim == 0.0) continue;
      for (std::size_t j = 0; j < s; ++j) c[i][j] += aim * b[m][j];
    }
  return c;
}

Matrix one_step(const Fsm& fsm, int n) {
  const std::uint64_t symbols = std::uint64_t{1} << n;
  const double weight = 1.0 / static_cast<double>(symbols);
  Matrix m(fsm.state_count, std::vector<double>(fsm.state_count, 0.0));
  for (State s = 0; s < fsm.state_count; ++s)
    for (std::uint64_t a = 0; a < symbols; ++a) m[s][fsm.step(s, a)] += weight;
  return m;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

namespace detail {
void check_budget(double evaluations) {
  if (evaluations > kEnumerationBudget) {
    std::ostringstream os;
    os << "enumeration needs " << evaluations << " transition evaluations, budget is " << kEnumerationBudget;
    throw BudgetError(os.str());
  }
}
}  // namespace detail

StateDistribution::StateDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  if (p_.empty()) throw ParameterError("StateDistribution: empty");
  double total = 0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw ParameterError("StateDistribution: negative or NaN probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("StateDistribution: probabilities must sum to 1");
}

StateDistribution StateDistribution::point_mass(State states, State at) {
  std::vector<double> p(states, 0.0);
  p.at(at) = 1.0;
  return StateDistribution(std::move(p));
}

Fsm one_state() {
  return {"one-state", 1, 0, [](State, std::uint64_t) -> State { return 0; }};
}

Fsm identity(State states) {
  return {"identity", states, 0, [](State s, std::uint64_t) { return s; }};
}

Fsm counter_mod(State m) {
  if (m < 1) throw ParameterError("counter_mod: modulus must be >= 1");
  return {"counter-mod-" + std::to_string(m), m, 0,
          [m](State s, std::uint64_t block) { return static_cast<State>((s + block % m) % m); }};
}

Fsm parity_low_bit() {
  return {"parity-low-bit", 2, 0, [](State s, std::uint64_t block) { return s ^ static_cast<State>(block & 1); }};
}

Fsm toggle_on_odd() {
  return {"toggle-on-odd", 2, 0, [](State s, std::uint64_t block) { return (block & 1) ? 1 - s : s; }};
}

Fsm threshold_counter(std::uint64_t threshold, State cap) {
  if (cap < 1) throw ParameterError("threshold_counter: cap must be >= 1");
  return {"threshold-" + std::to_string(threshold) + "-cap-" + std::to_string(cap), cap + 1, 0,
          [threshold, cap](State s, std::uint64_t block) { return block >= threshold && s < cap ? s + 1 : s; }};
}

Fsm zoo_fsm(const std::string& name) {
  auto number_after = [&](std::string_view prefix, std::size_t from = 0) -> std::uint64_t {
    std::uint64_t v = 0;
    const char* first = name.data() + from + prefix.size();
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) throw ParameterError("zoo_fsm: bad number in '" + name + "'");
    if (ptr != last && *ptr != '-') throw ParameterError("zoo_fsm: bad number in '" + name + "'");
    return v;
  };
  if (name == "one-state") return one_state();
  if (name == "parity-low-bit") return parity_low_bit();
  if (name == "toggle-on-odd") return toggle_on_odd();
  if (name.starts_with("identity-")) return identity(static_cast<State>(number_after("identity-")));
  if (name.starts_with("counter-mod-")) return counter_mod(static_cast<State>(number_after("counter-mod-")));
  if (name.starts_with("threshold-")) {
    const auto cap_at = name.find("-cap-");
    if (cap_at == std::string::npos) throw ParameterError("zoo_fsm: expected threshold-<t>-cap-<c>");
    return threshold_counter(number_after("threshold-"), static_cast<State>(number_after("-cap-", cap_at)));
  }
  throw ParameterError("zoo_fsm: unknown machine '" + name + "'");
}

State run_fsm(const Fsm& fsm, std::span<const std::uint64_t> blocks) {
  return run_fsm(fsm, fsm.start_state, blocks);
}

State run_fsm(const Fsm& fsm, State start, std::span<const std::uint64_t> blocks) {
  State s = start;
  for (std::uint64_t b : blocks) s = fsm.step(s, b);
  return s;
}

TransitionRows uniform_rows(const Fsm& fsm, int n, std::uint64_t steps) {
  if (n < 1 || n > 32) throw ParameterError("uniform_rows: n must be in [1, 32]");
  detail::check_budget(std::ldexp(1.0, n) * fsm.state_count * static_cast<double>(steps));

  const std::size_t s = fsm.state_count;
  Matrix result(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) result[i][i] = 1.0;
  if (steps > 0) {
    Matrix base = one_step(fsm, n);
    if (steps == 1) {
      result = std::move(base);
    } else {
      bool first = true;
      for (std::uint64_t e = steps; e > 0; e >>= 1) {
        if (e & 1) {
          result = first ? base : multiply(result, base);
          first = false;
        }
        if (e > 1) base = multiply(base, base);
      }
    }
  }
  TransitionRows rows;
  rows.reserve(s);
  for (auto& r : result) {
    // Renormalize away round-off so the distribution invariant holds.
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    if (total != 1.0)
      for (double& v : r) v /= total;
    rows.emplace_back(std::move(r));
  }
  return rows;
}

StateDistribution uniform_distribution(const Fsm& fsm, int n, std::uint64_t steps) {
  return uniform_rows(fsm, n, steps).at(fsm.start_state);
}

double tv_distance(const StateDistribution& a, const StateDistribution& b) {
  if (a.size() != b.size()) throw ParameterError("tv_distance: distributions have different lengths");
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double tv_distance(const TransitionRows& a, const TransitionRows& b) {
  if (a.size() != b.size()) throw ParameterError("tv_distance: row counts differ");
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, tv_distance(a[i], b[i]));
  return worst;
}

void SweepSummary::write_csv(std::ostream& os, bool header) const {
  if (header) os << "n,b,k,states,draw_index,tv\n";
  for (std::size_t i = 0; i < tv.size(); ++i) {
    os << n << ',' << b << ',' << k << ',' << states << ',' << i << ',';
    std::ostringstream v;
    v.precision(17);
    v << tv[i];
    os << v.str() << '\n';
  }
}

SweepSummary distinguish_sweep(const Fsm& fsm, int n, std::uint64_t b, int k, std::size_t hash_draws,
                               std::uint64_t master_seed) {
  SweepSummary out;
  out.n = n;
  out.b = b;
  out.k = k;
  out.states = fsm.state_count;
  HashPrg::validate_shape(n, b, k);
  const std::uint64_t steps = std::uint64_t{1} << (std::countr_zero(b) * k);
  const TransitionRows uniform = uniform_rows(fsm, n, steps);
  out.tv.reserve(hash_draws);
  for (std::size_t i = 0; i < hash_draws; ++i) {
    const HashPrg prg = prg_new(n, b, k, derive_seed(master_seed, i));
    out.tv.push_back(tv_distance(prg_rows(fsm, prg), uniform));
  }
  if (!out.tv.empty()) {
    std::vector<double> sorted = out.tv;
    std::sort(sorted.begin(), sorted.end());
    out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    out.max = sorted.back();
    out.q50 = quantile(sorted, 0.50);
    out.q90 = quantile(sorted, 0.90);
    out.q95 = quantile(sorted, 0.95);
    out.q99 = quantile(sorted, 0.99);
  }
  return out;
}

}  // namespace hprg::fsm
