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

#include "hprg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "hprg/countsketch.hpp"
#include "hprg/fp_high.hpp"
#include "hprg/fp_low.hpp"
#include "hprg/fsmlab.hpp"
#include "hprg/linf.hpp"
#include "hprg/stream.hpp"

namespace hprg {

namespace {

using Row = std::vector<std::string>;

const std::set<std::string> kReserved{"task", "seed", "trials", "out", "threads"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

/// Typed access to task parameters; remembers which keys were read.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& m) : m_(m) {}

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = m_.find(key);
    return it == m_.end() ? fallback : it->second;
  }
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    auto it = m_.find(key);
    return it == m_.end() ? fallback : parse_integer<std::uint64_t>(key, it->second);
  }
  std::int64_t i64(const std::string& key, std::int64_t fallback) {
    used_.insert(key);
    auto it = m_.find(key);
    return it == m_.end() ? fallback : parse_integer<std::int64_t>(key, it->second);
  }
  double real(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = m_.find(key);
    return it == m_.end() ? fallback : parse_real(key, it->second);
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    auto it = m_.find(key);
    if (it == m_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
    return out;
  }
  void reject_unknown(const std::string& task) const {
    for (const auto& [k, v] : m_)
      if (!used_.contains(k)) throw ConfigError("config: unknown key '" + k + "' for task " + task);
  }

 private:
  const std::map<std::string, std::string>& m_;
  std::set<std::string> used_;
};

struct TaskPlan {
  std::vector<std::string> columns;  // final column is always status
  std::size_t trial_column = 0;
  std::function<Row(std::uint64_t trial, std::uint64_t seed)> run_trial;
  std::function<void(ExperimentResult&)> finish;
};

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::vector<const Row*> ok_rows(const ExperimentResult& r) {
  std::vector<const Row*> out;
  for (const auto& row : r.rows)
    if (row.back() == "ok") out.push_back(&row);
  return out;
}

std::string fraction_summary(const std::string& task, const ExperimentResult& r, std::size_t success_col,
                             std::size_t error_col, const std::string& error_name) {
  const auto ok = ok_rows(r);
  std::size_t successes = 0;
  double err_sum = 0;
  for (const Row* row : ok) {
    successes += (*row)[success_col] == "1";
    err_sum += std::stod((*row)[error_col]);
  }
  std::ostringstream os;
  os << task << ": success " << (ok.empty() ? 0.0 : double(successes) / double(ok.size())) << " (" << successes
     << '/' << ok.size() << "), mean " << error_name << ' ' << (ok.empty() ? 0.0 : err_sum / double(ok.size()))
     << ", failed " << r.failed_trials;
  return os.str();
}

TaskPlan plan_fp_high(Params& prm) {
  const std::uint64_t d = prm.u64("d", 10000);
  const double p = prm.real("p", 3.0);
  const int copies = static_cast<int>(prm.u64("copies", 1));
  const ShapeSpec shape = ShapeSpec::parse(prm.text("shape", "gaussian"));
  const double factor = prm.real("factor", 8.0);
  if (!(p > 2.0)) throw ConfigError("fp-high: p must be > 2");
  if (d < 1 || copies < 1 || !(factor >= 1.0)) throw ConfigError("fp-high: need d >= 1, copies >= 1, factor >= 1");
  TaskPlan plan;
  plan.columns = {"trial", "estimate", "truth", "ratio", "success", "hash_evals_per_update", "status"};
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const auto x = synthetic_vector(shape, d, derive_seed(seed, 1));
    const TurnstileStream stream = stream_from_vector(x, derive_seed(seed, 2));
    const DenseOracle oracle = replay_oracle(stream);
    FpHighSketch sk({.p = p,
                     .dimension = d,
                     .copies = copies,
                     .seed = derive_seed(seed, 3),
                     .max_abs = std::max<std::int64_t>(1, static_cast<std::int64_t>(oracle.linf))});
    reset_eval_counters();
    for (const auto& u : stream.updates) sk.update(u.index, u.delta);
    const double evals =
        stream.updates.empty() ? 0.0 : double(eval_counters().total()) / double(stream.updates.size());
    const double est = sk.estimate();
    const double truth = oracle.norm(p);
    const double ratio = truth == 0.0 ? (est == 0.0 ? 1.0 : INFINITY) : est / truth;
    const bool success = ratio >= 1.0 / factor && ratio <= factor;
    return {fmt(trial), fmt(est), fmt(truth), fmt(ratio), success ? "1" : "0", fmt(evals)};
  };
  plan.finish = [](ExperimentResult& r) { r.summary = fraction_summary("fp-high", r, 4, 3, "ratio"); };
  return plan;
}

TaskPlan plan_fp_low(Params& prm) {
  const std::uint64_t d = prm.u64("d", 10000);
  const double p = prm.real("p", 1.0);
  const double eps = prm.real("eps", 0.1);
  const ShapeSpec shape = ShapeSpec::parse(prm.text("shape", "gaussian"));
  const double tolerance = prm.real("tolerance", 1.5 * eps);
  fp_low_params(std::max<std::uint64_t>(d, 1), p, eps);  // validates
  TaskPlan plan;
  plan.columns = {"trial", "estimate", "truth", "rel_error", "success", "heavy_count", "status"};
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const auto x = synthetic_vector(shape, d, derive_seed(seed, 1));
    const TurnstileStream stream = stream_from_vector(x, derive_seed(seed, 2));
    const DenseOracle oracle = replay_oracle(stream);
    const FpLowResult res = fp_low_estimate(stream, p, eps, derive_seed(seed, 3));
    const double truth = oracle.moment(p);
    const double rel = truth == 0.0 ? std::abs(res.estimate) : std::abs(res.estimate - truth) / truth;
    return {fmt(trial), fmt(res.estimate), fmt(truth), fmt(rel), rel <= tolerance ? "1" : "0",
            fmt(static_cast<std::uint64_t>(res.heavy_count))};
  };
  plan.finish = [](ExperimentResult& r) { r.summary = fraction_summary("fp-low", r, 4, 3, "rel_error"); };
  return plan;
}

TaskPlan plan_linf(Params& prm) {
  const std::uint64_t d = prm.u64("d", 4096);
  const double eps = prm.real("eps", 0.1);
  const ShapeSpec shape = ShapeSpec::parse(prm.text("shape", "zipf(1)"));
  const LinfVariant variant = parse_linf_variant(prm.text("variant", "standard"));
  const double ratio = prm.real("ratio", 0.0);
  linf_geometry({.dimension = d, .eps = eps, .variant = variant});  // validates
  if (ratio < 0.0 || ratio >= 1.0) throw ConfigError("linf: ratio must be in [0, 1)");
  TaskPlan plan;
  plan.columns = {"trial", "estimate", "truth", "l2", "abs_error", "success", "counters", "status"};
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const auto x = ratio > 0.0 ? spike_with_ratio(d, ratio, derive_seed(seed, 1))
                               : synthetic_vector(shape, d, derive_seed(seed, 1));
    const TurnstileStream stream = stream_from_vector(x, derive_seed(seed, 2));
    const DenseOracle oracle = replay_oracle(stream);
    LinfSketch sk({.dimension = d, .eps = eps, .variant = variant, .seed = derive_seed(seed, 3)});
    for (const auto& u : stream.updates) sk.update(u.index, u.delta);
    const double est = sk.estimate();
    const double err = std::abs(est - oracle.linf);
    return {fmt(trial),       fmt(est),
            fmt(oracle.linf), fmt(oracle.l2),
            fmt(err),         err <= eps * oracle.l2 ? "1" : "0",
            fmt(static_cast<std::uint64_t>(sk.counter_count()))};
  };
  plan.finish = [](ExperimentResult& r) { r.summary = fraction_summary("linf", r, 5, 4, "abs_error"); };
  return plan;
}

TaskPlan plan_countsketch_err(Params& prm, std::uint64_t master_seed) {
  TailParams tp;
  tp.dimension = prm.u64("d", tp.dimension);
  tp.table_size = prm.u64("t", tp.table_size);
  tp.repetitions = static_cast<int>(prm.u64("r", static_cast<std::uint64_t>(tp.repetitions)));
  tp.block_bits = static_cast<int>(prm.u64("n", static_cast<std::uint64_t>(tp.block_bits)));
  tp.heavy = prm.u64("heavy", tp.heavy);
  tp.heavy_magnitude = prm.i64("heavy_magnitude", tp.heavy_magnitude);
  tp.noise = prm.i64("noise", tp.noise);
  tp.coords_per_trial = prm.u64("coords", tp.coords_per_trial);
  tp.alphas = prm.reals("alphas", tp.alphas);
  const std::string source = prm.text("source", "hashprg");
  if (source == "hashprg") tp.source = TailSource::hashprg;
  else if (source == "random") tp.source = TailSource::random;
  else throw ConfigError("countsketch-err: source must be hashprg or random");
  if (tp.heavy > tp.dimension || tp.coords_per_trial < 1)
    throw ConfigError("countsketch-err: need heavy <= d and coords >= 1");
  // Geometry check up front.
  make_baseline_countsketch(tp.dimension, tp.table_size, tp.repetitions, tp.block_bits, 0);

  auto x = std::make_shared<const std::vector<std::int64_t>>(tail_vector(tp, master_seed));
  const double delta = tail_delta(std::span<const std::int64_t>(*x), tp.table_size);
  TaskPlan plan;
  plan.columns = {"trial", "samples"};
  for (double a : tp.alphas) plan.columns.push_back("exceed_" + fmt(a));
  plan.columns.push_back("status");
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const auto counts = countsketch_tail_trial(tp, *x, delta, seed);
    Row row{fmt(trial), fmt(tp.coords_per_trial)};
    for (auto c : counts) row.push_back(fmt(c));
    return row;
  };
  plan.finish = [tp, delta](ExperimentResult& r) {
    const auto ok = ok_rows(r);
    std::vector<std::uint64_t> exceed(tp.alphas.size(), 0);
    std::uint64_t samples = 0;
    for (const Row* row : ok) {
      samples += std::stoull((*row)[1]);
      for (std::size_t a = 0; a < exceed.size(); ++a) exceed[a] += std::stoull((*row)[2 + a]);
    }
    std::vector<Row> rows;
    std::ostringstream os;
    os << "countsketch-err: delta " << delta << ", samples " << samples;
    for (std::size_t a = 0; a < exceed.size(); ++a) {
      const double tail = samples == 0 ? 0.0 : double(exceed[a]) / double(samples);
      rows.push_back({fmt(tp.alphas[a]), fmt(tail), fmt(static_cast<std::uint64_t>(ok.size())), fmt(samples)});
      os << ", tail(" << tp.alphas[a] << ") " << tail;
    }
    os << ", failed " << r.failed_trials;
    r.header = {"alpha", "empirical_tail", "trials", "samples"};
    r.rows = std::move(rows);
    r.summary = os.str();
  };
  return plan;
}

TaskPlan plan_prg_tv(Params& prm) {
  const std::string name = prm.text("fsm", "counter-mod-64");
  const int n = static_cast<int>(prm.u64("n", 10));
  const std::uint64_t b = prm.u64("b", 4);
  const int k = static_cast<int>(prm.u64("k", 3));
  const double threshold = prm.real("tv_threshold", 0.05);
  auto fsm = std::make_shared<const fsm::Fsm>(fsm::zoo_fsm(name));
  HashPrg::validate_shape(n, b, k);
  if (n > 32) throw ConfigError("prg-tv: n must be <= 32 for seed enumeration");
  const std::uint64_t steps = std::uint64_t{1} << (std::countr_zero(b) * k);
  auto uniform = std::make_shared<const fsm::TransitionRows>(fsm::uniform_rows(*fsm, n, steps));
  TaskPlan plan;
  plan.columns = {"n", "b", "k", "states", "draw_index", "tv", "status"};
  plan.trial_column = 4;
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const HashPrg prg = prg_new(n, b, k, seed);
    const double tv = fsm::tv_distance(fsm::prg_rows(*fsm, prg), *uniform);
    return {fmt(static_cast<std::uint64_t>(n)), fmt(b), fmt(static_cast<std::uint64_t>(k)),
            fmt(static_cast<std::uint64_t>(fsm->state_count)), fmt(trial), fmt(tv)};
  };
  plan.finish = [threshold](ExperimentResult& r) {
    const auto ok = ok_rows(r);
    std::vector<double> tv;
    for (const Row* row : ok) tv.push_back(std::stod((*row)[5]));
    std::sort(tv.begin(), tv.end());
    const auto below = std::count_if(tv.begin(), tv.end(), [&](double v) { return v <= threshold; });
    std::ostringstream os;
    os << "prg-tv: draws " << tv.size() << ", tv<=" << threshold << " in " << below << ", median "
       << (tv.empty() ? 0.0 : tv[tv.size() / 2]) << ", max " << (tv.empty() ? 0.0 : tv.back()) << ", failed "
       << r.failed_trials;
    r.summary = os.str();
  };
  return plan;
}

TaskPlan plan_lp_sample(Params& prm) {
  const std::uint64_t d = prm.u64("d", 1024);
  const double p = prm.real("p", 3.0);
  const double eps = prm.real("eps", 0.5);
  const double ratio = prm.real("ratio", 3.0);
  const std::int64_t base = prm.i64("base", 1000);
  if (d < 2 || !(p > 2.0) || !(ratio >= 1.0) || base < 1)
    throw ConfigError("lp-sample: need d >= 2, p > 2, ratio >= 1, base >= 1");
  LpSampler probe({.p = p, .dimension = d, .eps = eps, .seed = 0});  // validates eps
  std::vector<std::int64_t> x(d, 0);
  x[0] = static_cast<std::int64_t>(std::llround(static_cast<double>(base) * std::pow(ratio, 1.0 / p)));
  x[1] = base;
  TaskPlan plan;
  plan.columns = {"trial", "sample", "status"};
  plan.run_trial = [=](std::uint64_t trial, std::uint64_t seed) -> Row {
    const TurnstileStream stream = stream_from_vector(x, derive_seed(seed, 1));
    return {fmt(trial), fmt(lp_sample(stream, p, eps, derive_seed(seed, 2)))};
  };
  plan.finish = [](ExperimentResult& r) {
    const auto ok = ok_rows(r);
    std::uint64_t first = 0, second = 0;
    for (const Row* row : ok) {
      first += (*row)[1] == "0";
      second += (*row)[1] == "1";
    }
    std::ostringstream os;
    os << "lp-sample: samples " << ok.size() << ", index0 " << first << ", index1 " << second << ", ratio "
       << (second == 0 ? 0.0 : double(first) / double(second)) << ", failed " << r.failed_trials;
    r.summary = os.str();
  };
  return plan;
}

TaskPlan make_plan(const ExperimentConfig& config) {
  Params prm(config.params);
  TaskPlan plan;
  try {
    if (config.task == "fp-high") plan = plan_fp_high(prm);
    else if (config.task == "fp-low") plan = plan_fp_low(prm);
    else if (config.task == "linf") plan = plan_linf(prm);
    else if (config.task == "countsketch-err") plan = plan_countsketch_err(prm, config.master_seed);
    else if (config.task == "prg-tv") plan = plan_prg_tv(prm);
    else if (config.task == "lp-sample") plan = plan_lp_sample(prm);
    else throw ConfigError("config: unknown task '" + config.task + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  prm.reject_unknown(config.task);
  return plan;
}

std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> known_tasks() { return {"fp-high", "fp-low", "linf", "countsketch-err", "prg-tv", "lp-sample"}; }

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    if (key == "task") c.task = value;
    else if (key == "seed") c.master_seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "trials") c.trials = parse_integer<std::uint64_t>(key, value);
    else if (key == "out") c.output = value;
    else if (key == "threads") c.threads = parse_integer<unsigned>(key, value);
    else c.params[key] = value;
  }
  if (c.task.empty()) throw ConfigError("config: missing 'task'");
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in);
}

std::string ExperimentConfig::serialize() const {
  std::map<std::string, std::string> all = params;
  all["task"] = task;
  all["seed"] = std::to_string(master_seed);
  all["trials"] = std::to_string(trials);
  if (!output.empty()) all["out"] = output.string();
  if (threads != 0) all["threads"] = std::to_string(threads);
  std::string out;
  for (const auto& [k, v] : all) out += k + "=" + v + "\n";
  return out;
}

void ExperimentConfig::validate() const {
  for (const auto& [k, v] : params)
    if (kReserved.contains(k)) throw ConfigError("config: reserved key '" + k + "' in parameters");
  make_plan(*this);
}

std::string ExperimentResult::csv() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  for (const auto& [k, v] : config.params)
    if (kReserved.contains(k)) throw ConfigError("config: reserved key '" + k + "' in parameters");
  const TaskPlan plan = make_plan(config);

  ExperimentResult result;
  result.header = plan.columns;
  result.rows.resize(config.trials);
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> failed{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= config.trials) return;
      Row row;
      try {
        row = plan.run_trial(i, derive_seed(config.master_seed, i));
        row.push_back("ok");
      } catch (const std::exception& e) {
        row.assign(plan.columns.size(), "");
        row[plan.trial_column] = std::to_string(i);
        row.back() = std::string("error: ") + e.what();
        failed.fetch_add(1);
      }
      result.rows[i] = std::move(row);
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(config.trials, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  result.failed_trials = failed.load();
  plan.finish(result);
  if (!config.output.empty()) write_file_atomic(config.output, result.csv());
  return result;
}

std::vector<std::int64_t> tail_vector(const TailParams& params, std::uint64_t master_seed) {
  ShapeSpec shape;
  shape.shape = Shape::spike;
  shape.spikes = params.heavy;
  shape.spike_magnitude = params.heavy_magnitude;
  shape.noise = params.noise;
  return synthetic_vector(shape, params.dimension, derive_seed(master_seed, 0x7a11));
}

std::vector<std::uint64_t> countsketch_tail_trial(const TailParams& params, std::span<const std::int64_t> x,
                                                  double delta, std::uint64_t trial_seed) {
  SeedStream picks(derive_seed(trial_seed, 1));
  std::vector<std::uint64_t> coords(params.coords_per_trial);
  for (auto& c : coords) c = picks.below(params.dimension);
  std::vector<std::uint64_t> exceed(params.alphas.size(), 0);
  auto tally = [&](const auto& sketch) {
    for (auto c : coords) {
      const double err = std::abs(static_cast<double>(sketch.estimate(c) - x[c]));
      for (std::size_t a = 0; a < params.alphas.size(); ++a) exceed[a] += err > params.alphas[a] * delta;
    }
  };
  auto fill = [&](auto sketch) {
    for (std::uint64_t i = 0; i < x.size(); ++i)
      if (x[i] != 0) sketch.update(i, x[i]);
    tally(sketch);
  };
  const std::uint64_t sketch_seed = derive_seed(trial_seed, 2);
  if (params.source == TailSource::hashprg) {
    const std::uint64_t blocks = static_cast<std::uint64_t>(params.repetitions) * params.dimension;
    fill(make_countsketch(params.dimension, params.table_size, params.repetitions, params.block_bits,
                          default_branching(blocks), sketch_seed));
  } else {
    fill(make_baseline_countsketch(params.dimension, params.table_size, params.repetitions, params.block_bits,
                                   sketch_seed));
  }
  return exceed;
}

}  // namespace hprg
