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
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hprg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value experiment description. Reserved keys: task, seed,
/// trials, out, threads; everything else is a task parameter.
struct ExperimentConfig {
  std::string task;
  std::uint64_t master_seed = 0;
  std::uint64_t trials = 0;
  std::filesystem::path output;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::map<std::string, std::string> params;

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Keys in sorted order, one per line; parse(serialize()) == *this.
  std::string serialize() const;
  /// Checks the task name, rejects unknown keys and malformed values.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::vector<std::string> known_tasks();

struct ExperimentResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string summary;  // deterministic; no timings
  std::uint64_t failed_trials = 0;

  std::string csv() const;
};

/// Runs all trials (trial i uses derive_seed(master_seed, i)) on a thread
/// pool and, when an output path is set, writes the CSV atomically.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Fresh-entropy vs generator-driven block source for tail experiments.
enum class TailSource { hashprg, random };

struct TailParams {
  std::uint64_t dimension = 4096;
  std::uint64_t table_size = 64;
  int repetitions = 31;
  int block_bits = 32;
  std::uint64_t heavy = 50;
  std::int64_t heavy_magnitude = 1000;
  std::int64_t noise = 10;
  std::uint64_t coords_per_trial = 20;
  std::vector<double> alphas{0.25, 0.5, 1.0};
  TailSource source = TailSource::hashprg;
};

/// Fixed test vector for tail experiments: planted heavy coordinates over
/// uniform noise, derived from the master seed.
std::vector<std::int64_t> tail_vector(const TailParams& params, std::uint64_t master_seed);

/// Exceedance counts of |x_hat - x| > alpha * Delta for one sketch seed.
std::vector<std::uint64_t> countsketch_tail_trial(const TailParams& params, std::span<const std::int64_t> x,
                                                  double delta, std::uint64_t trial_seed);

}  // namespace hprg
