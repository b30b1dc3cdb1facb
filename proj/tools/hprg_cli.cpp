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

// Command-line front end: stream generation, exact oracles and experiments.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hprg/experiment.hpp"
#include "hprg/stream.hpp"

namespace {

constexpr int kValidationFailure = 1;
constexpr int kRuntimeFailure = 2;

struct CommonFlags {
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--trials", f.trials, "number of trials")->capture_default_str();
  app->add_option("--seed", f.seed, "master seed")->capture_default_str();
  app->add_option("--out", f.out, "CSV output path (stdout when empty)");
  app->add_option("--threads", f.threads, "worker threads, 0 = all cores")->capture_default_str();
}

int execute(const hprg::ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const hprg::ExperimentResult result = hprg::run_experiment(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (config.output.empty()) std::cout << result.csv();
  std::cerr << result.summary << " [" << seconds << " s]\n";
  return 0;
}

/// Task subcommand whose flags map one-to-one onto config keys.
struct TaskCommand {
  CLI::App* app;
  CommonFlags common;
  std::map<std::string, std::string> values;
};

TaskCommand* add_task(CLI::App& root, std::vector<std::unique_ptr<TaskCommand>>& store, const std::string& task,
                      const std::string& help, const std::vector<std::pair<std::string, std::string>>& keys) {
  auto cmd = std::make_unique<TaskCommand>();
  cmd->app = root.add_subcommand(task, help);
  add_common(cmd->app, cmd->common);
  for (const auto& [key, desc] : keys) cmd->app->add_option("--" + key, cmd->values[key], desc);
  store.push_back(std::move(cmd));
  return store.back().get();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hprg: derandomized streaming sketches and experiments"};
  app.require_subcommand(1);

  // gen-stream
  std::string shape = "zipf(1)";
  std::uint64_t gen_d = 1000, gen_seed = 1;
  std::string gen_out;
  double gen_scale = 1000.0;
  std::int64_t gen_spike = 100000, gen_noise = 0;
  auto* gen = app.add_subcommand("gen-stream", "write a synthetic turnstile stream");
  gen->add_option("--shape", shape, "flat | zipf(a) | spike(k) | gaussian")->capture_default_str();
  gen->add_option("--d", gen_d, "dimension")->capture_default_str();
  gen->add_option("--seed", gen_seed, "seed")->capture_default_str();
  gen->add_option("--scale", gen_scale, "flat magnitude, top zipf value or gaussian std")->capture_default_str();
  gen->add_option("--spike-magnitude", gen_spike, "magnitude of planted spikes")->capture_default_str();
  gen->add_option("--noise", gen_noise, "uniform noise amplitude under spikes")->capture_default_str();
  gen->add_option("--out", gen_out, "output path (stdout when empty)");

  // oracle
  std::string oracle_path;
  std::vector<double> oracle_ps{1.0, 2.0, 3.0};
  std::uint64_t oracle_t = 64;
  auto* oracle = app.add_subcommand("oracle", "print exact statistics of a stream file");
  oracle->add_option("stream", oracle_path, "stream file")->required();
  oracle->add_option("--p", oracle_ps, "moments to report")->capture_default_str();
  oracle->add_option("--t", oracle_t, "tail size for Delta")->capture_default_str();

  // run
  std::string config_path, run_out;
  auto* run = app.add_subcommand("run", "run an experiment from a key=value config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", run_out, "override the config's output path");

  std::vector<std::unique_ptr<TaskCommand>> tasks;
  add_task(app, tasks, "fp-high", "F_p estimation for p > 2",
           {{"d", "dimension"}, {"p", "moment"}, {"copies", "median copies"}, {"shape", "input shape"},
            {"factor", "success factor"}});
  add_task(app, tasks, "fp-low", "F_p estimation for 0 < p < 2",
           {{"d", "dimension"}, {"p", "moment"}, {"eps", "accuracy"}, {"shape", "input shape"},
            {"tolerance", "success threshold on relative error"}});
  add_task(app, tasks, "linf", "additive l_inf estimation",
           {{"d", "dimension"}, {"eps", "accuracy"}, {"shape", "input shape"}, {"variant", "standard | tight"},
            {"ratio", "plant ||x||_inf / ||x||_2 = ratio instead of a shape"}});
  add_task(app, tasks, "countsketch-err", "CountSketch error tail profile",
           {{"d", "dimension"}, {"t", "table size"}, {"r", "repetitions"}, {"n", "block bits"},
            {"heavy", "planted heavy coordinates"}, {"heavy_magnitude", "heavy magnitude"},
            {"noise", "noise amplitude"}, {"coords", "coordinates sampled per trial"},
            {"alphas", "comma-separated alpha grid"}, {"source", "hashprg | random"}});
  add_task(app, tasks, "prg-tv", "exact distinguishing advantage of a zoo FSM",
           {{"fsm", "zoo machine name"}, {"n", "block bits"}, {"b", "branching"}, {"k", "depth"},
            {"tv_threshold", "threshold for the summary count"}});
  add_task(app, tasks, "lp-sample", "relaxed l_p sampler frequencies on a two-spike vector",
           {{"d", "dimension"}, {"p", "p"}, {"eps", "accuracy"}, {"ratio", "|x_0|^p / |x_1|^p"},
            {"base", "|x_1|"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      hprg::ShapeSpec spec = hprg::ShapeSpec::parse(shape);
      spec.scale = gen_scale;
      spec.spike_magnitude = gen_spike;
      spec.noise = gen_noise;
      const auto stream = hprg::gen_synthetic(spec, gen_d, gen_seed);
      if (gen_out.empty()) hprg::write_stream(std::cout, stream);
      else hprg::write_stream(std::filesystem::path(gen_out), stream);
      return 0;
    }
    if (oracle->parsed()) {
      const auto stream = hprg::parse_stream(std::filesystem::path(oracle_path));
      const auto o = hprg::replay_oracle(stream);
      std::cout << "d " << stream.dimension << "\nupdates " << stream.updates.size() << "\nnonzeros "
                << o.nonzeros() << "\nl1 " << hprg::format_number(o.l1) << "\nl2 " << hprg::format_number(o.l2)
                << "\nlinf " << hprg::format_number(o.linf) << '\n';
      for (double p : oracle_ps)
        std::cout << "norm_p" << hprg::format_number(p) << ' ' << hprg::format_number(o.norm(p)) << '\n';
      std::cout << "delta_t" << oracle_t << ' ' << hprg::format_number(o.tail(oracle_t)) << '\n';
      return 0;
    }
    if (run->parsed()) {
      auto config = hprg::ExperimentConfig::load(config_path);
      if (!run_out.empty()) config.output = run_out;
      config.validate();
      return execute(config);
    }
    for (const auto& t : tasks) {
      if (!t->app->parsed()) continue;
      hprg::ExperimentConfig config;
      config.task = t->app->get_name();
      config.trials = t->common.trials;
      config.master_seed = t->common.seed;
      config.output = t->common.out;
      config.threads = t->common.threads;
      for (const auto& [k, v] : t->values)
        if (t->app->count("--" + k) > 0) config.params[k] = v;
      config.validate();
      return execute(config);
    }
  } catch (const hprg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const hprg::StreamParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const hprg::StreamValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
