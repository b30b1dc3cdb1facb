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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hprg {

struct Update {
  std::uint64_t index;
  std::int64_t delta;
  friend bool operator==(const Update&, const Update&) = default;
};

/// Signed coordinate updates to an implicit vector of dimension d, each
/// with |delta| <= declared bound M.
struct TurnstileStream {
  std::uint64_t dimension = 0;
  std::int64_t bound = 0;
  std::vector<Update> updates;

  /// Throws StreamValidationError on an out-of-range index or delta.
  void validate() const;
  friend bool operator==(const TurnstileStream&, const TurnstileStream&) = default;
};

class StreamParseError : public std::runtime_error {
 public:
  StreamParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class StreamValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text format: header "d m M", then m lines "index delta".
TurnstileStream parse_stream(std::istream& in);
TurnstileStream parse_stream(const std::filesystem::path& path);
void write_stream(std::ostream& out, const TurnstileStream& stream);
void write_stream(const std::filesystem::path& path, const TurnstileStream& stream);

enum class Shape { flat, zipf, spike, gaussian };

/// Workload shape. Text forms: "flat", "zipf(1.0)", "spike(3)", "gaussian".
struct ShapeSpec {
  Shape shape = Shape::flat;
  double zipf_exponent = 1.0;
  std::uint64_t spikes = 1;
  /// Magnitude of flat entries, the top zipf entry, or the gaussian std.
  double scale = 1000.0;
  /// Magnitude of planted spikes.
  std::int64_t spike_magnitude = 100000;
  /// Spikes sit over uniform noise in [-noise, noise]; zero keeps them alone.
  std::int64_t noise = 0;

  static ShapeSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Emits the nonzero coordinates of x as a shuffled turnstile stream: each
/// coordinate is split into two updates (v + w, -w) with |w| <= |v|.
TurnstileStream stream_from_vector(std::span<const std::int64_t> x, std::uint64_t seed);

/// Dense vector of the requested shape, deterministic in seed.
std::vector<std::int64_t> synthetic_vector(const ShapeSpec& shape, std::uint64_t dimension, std::uint64_t seed);
/// One spike over gaussian noise, sized so ||x||_inf / ||x||_2 ~ ratio.
std::vector<std::int64_t> spike_with_ratio(std::uint64_t dimension, double ratio, std::uint64_t seed,
                                           double noise_scale = 1000.0);
TurnstileStream gen_synthetic(const ShapeSpec& shape, std::uint64_t dimension, std::uint64_t seed);

/// Ground truth for a stream.
struct DenseOracle {
  std::vector<std::int64_t> x;
  double l1 = 0;
  double l2 = 0;
  double linf = 0;

  double norm(double p) const;
  /// sum_i |x_i|^p.
  double moment(double p) const;
  double tail(std::uint64_t t) const;
  std::uint64_t nonzeros() const;
};

inline constexpr std::uint64_t kOracleMaxDimension = 10'000'000;

/// Materializes x; refuses d above kOracleMaxDimension and running values
/// beyond d*M.
DenseOracle replay_oracle(const TurnstileStream& stream);
DenseOracle dense_oracle(std::vector<std::int64_t> x);

}  // namespace hprg
