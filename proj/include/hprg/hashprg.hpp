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

#include <bit>
#include <cstdint>
#include <ranges>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hprg/hashing.hpp"
#include "hprg/seed.hpp"

namespace hprg {

enum class PrgVariant { hashprg = 0, nisan = 1 };

/// Reproducible description of a generator: five decimal fields
/// "n b k master_seed variant".
struct PrgParams {
  int block_bits = 64;
  std::uint64_t branching = 2;
  int depth = 0;
  std::uint64_t master_seed = 0;
  PrgVariant variant = PrgVariant::hashprg;

  std::string to_string() const;
  static PrgParams parse(const std::string& text);
  friend bool operator==(const PrgParams&, const PrgParams&) = default;
};

/// Tree generator over n-bit blocks with branching factor b and depth k.
///
/// Block j, with j written in base b as j_{k-1} ... j_0, is
///   h_0^{(j_0)}( h_1^{(j_1)}( ... h_{k-1}^{(j_{k-1})}(x) ) ),
/// so the most significant digit selects the first hash applied to the seed.
/// The table is stored row-major: row i holds h_i^{(0)}, ..., h_i^{(b-1)}.
///
/// `Hash` is any callable uint64 -> uint64 mapping n-bit words to n-bit
/// words; PairwiseHash in production, hand-written maps in tests.
template <class Hash>
class BasicHashPrg {
 public:
  using hash_type = Hash;

  BasicHashPrg(int block_bits, std::uint64_t branching, int depth, std::uint64_t seed_word,
               std::vector<Hash> table, PrgVariant variant = PrgVariant::hashprg)
      : bits_(block_bits),
        branching_(branching),
        depth_(depth),
        seed_(seed_word),
        table_(std::move(table)),
        variant_(variant) {
    validate_shape(block_bits, branching, depth);
    digit_bits_ = std::countr_zero(branching);
    if (table_.size() != branching * static_cast<std::uint64_t>(depth))
      throw ParameterError("HashPrg: hash table must hold b*k functions");
    if (bits_ < 64) seed_ &= (std::uint64_t{1} << bits_) - 1;
  }

  int block_bits() const noexcept { return bits_; }
  std::uint64_t branching() const noexcept { return branching_; }
  int depth() const noexcept { return depth_; }
  std::uint64_t seed_word() const noexcept { return seed_; }
  PrgVariant variant() const noexcept { return variant_; }
  const std::vector<Hash>& table() const noexcept { return table_; }
  const Hash& hash(int level, std::uint64_t branch) const { return table_[index(level, branch)]; }

  /// Number of output blocks, b^k.
  std::uint64_t size() const noexcept { return std::uint64_t{1} << (digit_bits_ * depth_); }

  /// j-th output block; performs exactly k hash evaluations.
  std::uint64_t block(std::uint64_t j) const {
    if (j >= size()) throw std::out_of_range("HashPrg::block: index out of range");
    return block_unchecked(j);
  }

  std::uint64_t block_unchecked(std::uint64_t j) const noexcept { return block_for_seed(seed_, j); }

  /// Block j of G(x, h) for an arbitrary seed word x and this hash table.
  std::uint64_t block_for_seed(std::uint64_t x, std::uint64_t j) const noexcept {
    std::uint64_t v = x;
    const std::uint64_t digit_mask = branching_ - 1;
    for (int level = depth_ - 1; level >= 0; --level) {
      const std::uint64_t digit = (j >> (level * digit_bits_)) & digit_mask;
      v = table_[static_cast<std::size_t>(level) * branching_ + digit](v);
    }
    return v;
  }

  /// Generator whose output is this one's, permuted by i -> i xor ell.
  /// Row i becomes h_i'^{(j)} = h_i^{(j xor ell_i)} with ell_i the i-th
  /// base-b digit of ell; the seed word is unchanged.
  BasicHashPrg relabel(std::uint64_t ell) const {
    if (ell >= size()) throw std::out_of_range("HashPrg::relabel: index out of range");
    std::vector<Hash> rows;
    rows.reserve(table_.size());
    const std::uint64_t digit_mask = branching_ - 1;
    for (int level = 0; level < depth_; ++level) {
      const std::uint64_t shift = (ell >> (level * digit_bits_)) & digit_mask;
      for (std::uint64_t j = 0; j < branching_; ++j) rows.push_back(table_[index(level, j ^ shift)]);
    }
    return BasicHashPrg(bits_, branching_, depth_, seed_, std::move(rows), variant_);
  }

  /// Lazy view over blocks [start, start + count) in index order.
  auto stream_view(std::uint64_t start, std::uint64_t count) const {
    if (start > size() || count > size() - start)
      throw std::out_of_range("HashPrg::stream_view: range exceeds generator output");
    return std::views::iota(start, start + count) |
           std::views::transform([this](std::uint64_t j) { return block_unchecked(j); });
  }

  static void validate_shape(int block_bits, std::uint64_t branching, int depth) {
    if (block_bits < 1 || block_bits > 64) throw ParameterError("HashPrg: block_bits must be in [1, 64]");
    if (branching < 2 || !std::has_single_bit(branching))
      throw ParameterError("HashPrg: branching must be a power of two >= 2");
    if (depth < 0) throw ParameterError("HashPrg: depth must be >= 0");
    if (static_cast<long>(std::countr_zero(branching)) * depth > 63)
      throw ParameterError("HashPrg: b^k must not exceed 2^63");
  }

  friend bool operator==(const BasicHashPrg& a, const BasicHashPrg& b) {
    return a.bits_ == b.bits_ && a.branching_ == b.branching_ && a.depth_ == b.depth_ &&
           a.seed_ == b.seed_ && a.table_ == b.table_;
  }

 private:
  std::size_t index(int level, std::uint64_t branch) const noexcept {
    return static_cast<std::size_t>(level) * branching_ + branch;
  }

  int bits_;
  std::uint64_t branching_;
  int depth_;
  int digit_bits_ = 1;
  std::uint64_t seed_;
  std::vector<Hash> table_;
  PrgVariant variant_;
};

using HashPrg = BasicHashPrg<PairwiseHash>;

/// Samples the seed word and b*k pairwise hashes from master_seed.
inline HashPrg prg_new(int block_bits, std::uint64_t branching, int depth, std::uint64_t master_seed) {
  HashPrg::validate_shape(block_bits, branching, depth);
  SeedStream seeds(master_seed);
  const std::uint64_t seed_word = seeds.next();
  std::vector<PairwiseHash> table;
  table.reserve(branching * static_cast<std::uint64_t>(depth));
  for (std::uint64_t i = 0; i < branching * static_cast<std::uint64_t>(depth); ++i)
    table.push_back(PairwiseHash::random(block_bits, seeds));
  return HashPrg(block_bits, branching, depth, seed_word, std::move(table));
}

/// Nisan's generator: b = 2 with branch 0 the identity at every level, so
/// only k hashes are sampled. Level i's branch-1 hash is the (i+1)-th
/// sampled function.
inline HashPrg nisan_new(int block_bits, int depth, std::uint64_t master_seed) {
  HashPrg::validate_shape(block_bits, 2, depth);
  SeedStream seeds(master_seed);
  const std::uint64_t seed_word = seeds.next();
  std::vector<PairwiseHash> table;
  table.reserve(2 * static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) {
    table.push_back(PairwiseHash::identity(block_bits));
    table.push_back(PairwiseHash::random(block_bits, seeds));
  }
  return HashPrg(block_bits, 2, depth, seed_word, std::move(table), PrgVariant::nisan);
}

inline HashPrg make_prg(const PrgParams& p) {
  return p.variant == PrgVariant::nisan ? nisan_new(p.block_bits, p.depth, p.master_seed)
                                        : prg_new(p.block_bits, p.branching, p.depth, p.master_seed);
}

/// Smallest k with b^k >= blocks.
inline int depth_for(std::uint64_t branching, std::uint64_t blocks) {
  int k = 0;
  std::uint64_t reach = 1;
  while (reach < blocks) {
    if (reach > (UINT64_MAX >> 1) / branching) throw ParameterError("depth_for: block count too large");
    reach *= branching;
    ++k;
  }
  return k;
}

inline std::string PrgParams::to_string() const {
  std::ostringstream os;
  os << block_bits << ' ' << branching << ' ' << depth << ' ' << master_seed << ' '
     << static_cast<int>(variant);
  return os.str();
}

inline PrgParams PrgParams::parse(const std::string& text) {
  std::istringstream is(text);
  PrgParams p;
  int variant = 0;
  if (!(is >> p.block_bits >> p.branching >> p.depth >> p.master_seed >> variant) || variant < 0 ||
      variant > 1)
    throw ParameterError("PrgParams: expected five decimal fields 'n b k seed variant'");
  std::string extra;
  if (is >> extra) throw ParameterError("PrgParams: trailing data '" + extra + "'");
  p.variant = static_cast<PrgVariant>(variant);
  HashPrg::validate_shape(p.block_bits, p.branching, p.depth);
  return p;
}

}  // namespace hprg
