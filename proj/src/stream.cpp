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

#include "hprg/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hprg/countsketch.hpp"
#include "hprg/seed.hpp"

namespace hprg {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw StreamParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
  return value;
}

std::int64_t uniform_in(SeedStream& seeds, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(seeds.below(static_cast<std::uint64_t>(hi - lo) + 1));
}

}  // namespace

void TurnstileStream::validate() const {
  if (dimension == 0) throw StreamValidationError("stream dimension must be >= 1");
  if (bound < 0) throw StreamValidationError("stream bound must be >= 0");
  for (std::size_t u = 0; u < updates.size(); ++u) {
    if (updates[u].index >= dimension)
      throw StreamValidationError("update " + std::to_string(u) + ": index " + std::to_string(updates[u].index) +
                                  " >= d = " + std::to_string(dimension));
    if (updates[u].delta > bound || updates[u].delta < -bound)
      throw StreamValidationError("update " + std::to_string(u) + ": |delta| exceeds declared bound " +
                                  std::to_string(bound));
  }
}

TurnstileStream parse_stream(std::istream& in) {
  TurnstileStream s;
  std::string line;
  std::size_t line_no = 0;
  auto next_content = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!split_fields(line).empty()) return true;
    }
    return false;
  };
  if (!next_content()) throw StreamParseError(line_no + 1, "missing header 'd m M'");
  auto header = split_fields(line);
  if (header.size() != 3) throw StreamParseError(line_no, "header must have three fields 'd m M'");
  s.dimension = parse_number<std::uint64_t>(header[0], line_no, "dimension");
  const auto count = parse_number<std::uint64_t>(header[1], line_no, "update count");
  s.bound = parse_number<std::int64_t>(header[2], line_no, "bound");
  s.updates.reserve(count);
  for (std::uint64_t u = 0; u < count; ++u) {
    if (!next_content()) throw StreamParseError(line_no + 1, "expected " + std::to_string(count) + " updates, got " +
                                                                 std::to_string(u));
    auto fields = split_fields(line);
    if (fields.size() != 2) throw StreamParseError(line_no, "update must have two fields 'index delta'");
    s.updates.push_back({parse_number<std::uint64_t>(fields[0], line_no, "index"),
                         parse_number<std::int64_t>(fields[1], line_no, "delta")});
  }
  if (next_content()) throw StreamParseError(line_no, "trailing data after " + std::to_string(count) + " updates");
  s.validate();
  return s;
}

TurnstileStream parse_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file " + path.string());
  return parse_stream(in);
}

void write_stream(std::ostream& out, const TurnstileStream& stream) {
  out << stream.dimension << ' ' << stream.updates.size() << ' ' << stream.bound << '\n';
  for (const auto& u : stream.updates) out << u.index << ' ' << u.delta << '\n';
}

void write_stream(const std::filesystem::path& path, const TurnstileStream& stream) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stream file " + path.string());
  write_stream(out, stream);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ShapeSpec ShapeSpec::parse(const std::string& text) {
  ShapeSpec s;
  const auto open = text.find('(');
  const std::string name = text.substr(0, open);
  std::string arg;
  if (open != std::string::npos) {
    if (text.back() != ')') throw std::invalid_argument("shape: missing ')' in '" + text + "'");
    arg = text.substr(open + 1, text.size() - open - 2);
  }
  try {
    if (name == "flat") {
      s.shape = Shape::flat;
    } else if (name == "zipf") {
      s.shape = Shape::zipf;
      if (!arg.empty()) s.zipf_exponent = std::stod(arg);
    } else if (name == "spike") {
      s.shape = Shape::spike;
      if (!arg.empty()) s.spikes = std::stoull(arg);
    } else if (name == "gaussian") {
      s.shape = Shape::gaussian;
    } else {
      throw std::invalid_argument("shape: unknown shape '" + name + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const std::invalid_argument*>(&e) && std::string(e.what()).starts_with("shape:")) throw;
    throw std::invalid_argument("shape: bad argument in '" + text + "'");
  }
  if ((s.shape == Shape::flat || s.shape == Shape::gaussian) && !arg.empty())
    throw std::invalid_argument("shape: '" + name + "' takes no argument");
  return s;
}

std::string ShapeSpec::to_string() const {
  std::ostringstream os;
  switch (shape) {
    case Shape::flat: return "flat";
    case Shape::gaussian: return "gaussian";
    case Shape::zipf: os << "zipf(" << zipf_exponent << ')'; return os.str();
    case Shape::spike: os << "spike(" << spikes << ')'; return os.str();
  }
  return "flat";
}

TurnstileStream stream_from_vector(std::span<const std::int64_t> x, std::uint64_t seed) {
  SeedStream seeds(seed);
  TurnstileStream s;
  s.dimension = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::int64_t v = x[i];
    if (v == 0) continue;
    const std::int64_t mag = v < 0 ? -v : v;
    const std::int64_t w = uniform_in(seeds, -mag, mag);
    s.updates.push_back({i, v + w});
    if (w != 0) s.updates.push_back({i, -w});
  }
  for (std::size_t i = s.updates.size(); i > 1; --i) std::swap(s.updates[i - 1], s.updates[seeds.below(i)]);
  for (const auto& u : s.updates) s.bound = std::max(s.bound, u.delta < 0 ? -u.delta : u.delta);
  return s;
}

std::vector<std::int64_t> synthetic_vector(const ShapeSpec& shape, std::uint64_t dimension, std::uint64_t seed) {
  if (dimension == 0) throw std::invalid_argument("gen_synthetic: dimension must be >= 1");
  SeedStream seeds(seed);
  auto random_sign = [&] { return (seeds.next() & 1) ? -1 : 1; };
  std::vector<std::int64_t> x(dimension, 0);
  switch (shape.shape) {
    case Shape::flat: {
      const auto mag = static_cast<std::int64_t>(std::llround(shape.scale));
      for (auto& v : x) v = random_sign() * mag;
      break;
    }
    case Shape::zipf: {
      std::vector<std::uint64_t> order(dimension);
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[seeds.below(i)]);
      for (std::uint64_t rank = 0; rank < dimension; ++rank)
        x[order[rank]] = random_sign() * static_cast<std::int64_t>(
                                             std::llround(shape.scale * std::pow(rank + 1.0, -shape.zipf_exponent)));
      break;
    }
    case Shape::spike: {
      if (shape.spikes > dimension) throw std::invalid_argument("gen_synthetic: more spikes than coordinates");
      if (shape.noise > 0)
        for (auto& v : x) v = uniform_in(seeds, -shape.noise, shape.noise);
      std::vector<std::uint64_t> order(dimension);
      std::iota(order.begin(), order.end(), 0);
      for (std::uint64_t i = 0; i < shape.spikes; ++i) {
        std::swap(order[i], order[i + seeds.below(dimension - i)]);
        x[order[i]] = random_sign() * shape.spike_magnitude;
      }
      break;
    }
    case Shape::gaussian:
      for (auto& v : x) v = static_cast<std::int64_t>(std::llround(shape.scale * standard_normal(seeds)));
      break;
  }
  return x;
}

std::vector<std::int64_t> spike_with_ratio(std::uint64_t dimension, double ratio, std::uint64_t seed,
                                           double noise_scale) {
  if (dimension < 2) throw std::invalid_argument("spike_with_ratio: dimension must be >= 2");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("spike_with_ratio: ratio must be in (0, 1)");
  SeedStream seeds(seed);
  std::vector<std::int64_t> x(dimension);
  for (auto& v : x) v = static_cast<std::int64_t>(std::llround(noise_scale * standard_normal(seeds)));
  const std::uint64_t at = seeds.below(dimension);
  x[at] = 0;
  double energy = 0;
  for (auto v : x) energy += static_cast<double>(v) * static_cast<double>(v);
  const double spike = ratio * std::sqrt(energy) / std::sqrt(1.0 - ratio * ratio);
  x[at] = ((seeds.next() & 1) ? -1 : 1) * static_cast<std::int64_t>(std::llround(spike));
  return x;
}

TurnstileStream gen_synthetic(const ShapeSpec& shape, std::uint64_t dimension, std::uint64_t seed) {
  const auto x = synthetic_vector(shape, dimension, seed);
  return stream_from_vector(x, mix64(seed + 0x5851f42d4c957f2dULL));
}

double DenseOracle::moment(double p) const {
  if (!(p > 0)) throw std::invalid_argument("DenseOracle::moment: p must be > 0");
  double sum = 0;
  for (auto v : x)
    if (v != 0) sum += std::pow(std::abs(static_cast<double>(v)), p);
  return sum;
}

double DenseOracle::norm(double p) const { return std::pow(moment(p), 1.0 / p); }

double DenseOracle::tail(std::uint64_t t) const { return tail_delta(std::span<const std::int64_t>(x), t); }

std::uint64_t DenseOracle::nonzeros() const {
  return static_cast<std::uint64_t>(std::count_if(x.begin(), x.end(), [](std::int64_t v) { return v != 0; }));
}

DenseOracle dense_oracle(std::vector<std::int64_t> x) {
  DenseOracle o;
  o.x = std::move(x);
  double sq = 0;
  for (auto v : o.x) {
    const double a = std::abs(static_cast<double>(v));
    o.l1 += a;
    sq += a * a;
    o.linf = std::max(o.linf, a);
  }
  o.l2 = std::sqrt(sq);
  return o;
}

DenseOracle replay_oracle(const TurnstileStream& stream) {
  if (stream.dimension > kOracleMaxDimension)
    throw std::length_error("replay_oracle: dimension exceeds the dense memory budget");
  stream.validate();
  std::vector<std::int64_t> x(stream.dimension, 0);
  const auto limit = static_cast<__int128>(stream.dimension) * stream.bound;
  for (const auto& u : stream.updates) {
    x[u.index] += u.delta;
    const __int128 v = x[u.index];
    if (v > limit || v < -limit) throw StreamValidationError("replay_oracle: coordinate exceeds d*M");
  }
  return dense_oracle(std::move(x));
}

}  // namespace hprg
