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

// Exact final-state distributions of finite-state machines reading n-bit
// blocks, under uniform input and under generator output.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hprg/hashprg.hpp"

namespace hprg::fsm {

using State = std::uint32_t;
using Transition = std::function<State(State, std::uint64_t)>;

struct Fsm {
  std::string name;
  State state_count = 1;
  State start_state = 0;
  Transition transition;  // must be pure and total

  State step(State s, std::uint64_t block) const { return transition(s, block); }
};

/// Probability vector over states.
class StateDistribution {
 public:
  StateDistribution() = default;
  explicit StateDistribution(std::vector<double> probabilities);
  static StateDistribution point_mass(State states, State at);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probabilities() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

/// One distribution per start state (row i = start in state i).
using TransitionRows = std::vector<StateDistribution>;

/// Transition evaluations allowed for one exact enumeration.
inline constexpr double kEnumerationBudget = 1e9;

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Built-in zoo.
Fsm one_state();
Fsm identity(State states);
/// Sum of blocks modulo m.
Fsm counter_mod(State m);
/// Parity of the low bit of the blocks read so far.
Fsm parity_low_bit();
/// Toggles between two states whenever the block is odd.
Fsm toggle_on_odd();
/// Counts blocks whose value is >= threshold, saturating at cap.
Fsm threshold_counter(std::uint64_t threshold, State cap);

/// Zoo entry by name: one-state, identity-<s>, counter-mod-<m>,
/// parity-low-bit, toggle-on-odd, threshold-<t>-cap-<c>.
Fsm zoo_fsm(const std::string& name);

State run_fsm(const Fsm& fsm, std::span<const std::uint64_t> blocks);
State run_fsm(const Fsm& fsm, State start, std::span<const std::uint64_t> blocks);

/// Exact law of the final state after `steps` uniform n-bit blocks.
StateDistribution uniform_distribution(const Fsm& fsm, int n, std::uint64_t steps);
TransitionRows uniform_rows(const Fsm& fsm, int n, std::uint64_t steps);

/// Exact law of the final state when reading all b^k blocks of G(x, h) with
/// the generator's hashes fixed and x enumerated over all 2^n seeds.
template <class Hash>
StateDistribution prg_distribution(const Fsm& fsm, const BasicHashPrg<Hash>& prg);
template <class Hash>
TransitionRows prg_rows(const Fsm& fsm, const BasicHashPrg<Hash>& prg);

/// Half the l1 distance.
double tv_distance(const StateDistribution& a, const StateDistribution& b);
/// Max over start states of the row-wise distance.
double tv_distance(const TransitionRows& a, const TransitionRows& b);

struct SweepSummary {
  int n = 0;
  std::uint64_t b = 0;
  int k = 0;
  State states = 0;
  std::vector<double> tv;  // one per draw, in draw order
  double mean = 0;
  double max = 0;
  double q50 = 0, q90 = 0, q95 = 0, q99 = 0;

  /// CSV rows: n,b,k,states,draw_index,tv (with header).
  void write_csv(std::ostream& os, bool header = true) const;
};

/// Samples `hash_draws` generators (seed i derived from master_seed) and
/// measures each against the uniform law.
SweepSummary distinguish_sweep(const Fsm& fsm, int n, std::uint64_t b, int k, std::size_t hash_draws,
                               std::uint64_t master_seed);

// ---------------------------------------------------------------------------

namespace detail {
void check_budget(double evaluations);
}

template <class Hash>
TransitionRows prg_rows(const Fsm& fsm, const BasicHashPrg<Hash>& prg) {
  const int n = prg.block_bits();
  if (n > 32) throw BudgetError("prg_rows: seed enumeration over 2^n seeds needs n <= 32");
  const std::uint64_t seeds = std::uint64_t{1} << n;
  const std::uint64_t steps = prg.size();
  detail::check_budget(static_cast<double>(seeds) * static_cast<double>(steps) +
                       static_cast<double>(seeds) * static_cast<double>(steps) * fsm.state_count);

  std::vector<std::vector<double>> rows(fsm.state_count, std::vector<double>(fsm.state_count, 0.0));
  const double weight = 1.0 / static_cast<double>(seeds);
  std::vector<std::uint64_t> blocks(steps);
  for (std::uint64_t x = 0; x < seeds; ++x) {
    for (std::uint64_t j = 0; j < steps; ++j) blocks[j] = prg.block_for_seed(x, j);
    for (State s = 0; s < fsm.state_count; ++s) rows[s][run_fsm(fsm, s, blocks)] += weight;
  }
  TransitionRows out;
  out.reserve(rows.size());
  for (auto& r : rows) out.emplace_back(std::move(r));
  return out;
}

template <class Hash>
StateDistribution prg_distribution(const Fsm& fsm, const BasicHashPrg<Hash>& prg) {
  const int n = prg.block_bits();
  if (n > 32) throw BudgetError("prg_distribution: seed enumeration over 2^n seeds needs n <= 32");
  const std::uint64_t seeds = std::uint64_t{1} << n;
  const std::uint64_t steps = prg.size();
  detail::check_budget(2.0 * static_cast<double>(seeds) * static_cast<double>(steps));

  std::vector<double> p(fsm.state_count, 0.0);
  const double weight = 1.0 / static_cast<double>(seeds);
  for (std::uint64_t x = 0; x < seeds; ++x) {
    State s = fsm.start_state;
    for (std::uint64_t j = 0; j < steps; ++j) s = fsm.step(s, prg.block_for_seed(x, j));
    p[s] += weight;
  }
  return StateDistribution(std::move(p));
}

}  // namespace hprg::fsm
