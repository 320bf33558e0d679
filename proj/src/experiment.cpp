#include "mrk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mrk {

std::string_view to_string(PresetName name) {
  switch (name) {
    case PresetName::fig1: return "fig1";
    case PresetName::fig2: return "fig2";
    case PresetName::fig3: return "fig3";
  }
  return "?";
}

PresetName parse_preset(std::string_view text) {
  if (text == "fig1") return PresetName::fig1;
  if (text == "fig2") return PresetName::fig2;
  if (text == "fig3") return PresetName::fig3;
  throw std::invalid_argument("unknown preset '" + std::string(text) + "' (expected fig1, fig2 or fig3)");
}

ExperimentPreset resolve_preset(PresetName name, const PresetOverrides& overrides) {
  ExperimentPreset p;
  p.name = name;
  p.seed = 1;
  p.swap_probability = 0.0;
  p.distribution = SamplingKind::uniform;
  switch (name) {
    case PresetName::fig1:
      // Two 10×2 classes with entries N(±0.8, 0.3).
      p.trials = 1;
      p.sizes = {10, 10};
      p.dimension = 2;
      p.entry_means = {0.8, -0.8};
      p.entry_spreads = {0.3, 0.3};
      p.iterations = 1000;
      p.record_trajectory = true;
      p.budget_note = "pilot: 2-D trajectories settle within a few hundred steps";
      break;
    case PresetName::fig2:
      // Two 1000×10 standard normal classes.
      p.trials = 100;
      p.sizes = {1000, 1000};
      p.dimension = 10;
      p.entry_means = {0.0, 0.0};
      p.entry_spreads = {1.0, 1.0};
      p.iterations = 3000;
      p.budget_note = "pilot: median squared error below 1e-20 by ~1000 steps, budget 3000";
      break;
    case PresetName::fig3:
      // Wisconsin breast cancer rows split 300/399, d = 10.
      p.trials = 100;
      p.sizes = {300, 399};
      p.dimension = 10;
      p.iterations = 40000;
      p.budget_note = "pilot: median squared error at rounding level by ~30000 steps, budget 40000";
      break;
  }

  if (overrides.swap_probability) p.swap_probability = *overrides.swap_probability;
  if (overrides.iterations) p.iterations = *overrides.iterations;
  if (overrides.seed) p.seed = *overrides.seed;
  if (overrides.distribution) p.distribution = *overrides.distribution;
  if (overrides.trials) p.trials = *overrides.trials;
  if (overrides.sizes) {
    if (overrides.sizes->empty()) throw std::invalid_argument("--sizes needs at least one class");
    p.sizes = *overrides.sizes;
    if (name != PresetName::fig3) {
      // Extra classes reuse the last class's entry distribution.
      p.entry_means.resize(p.sizes.size(), p.entry_means.back());
      p.entry_spreads.resize(p.sizes.size(), p.entry_spreads.back());
    }
  }
  if (name == PresetName::fig3) {
    if (overrides.data) {
      p.data = *overrides.data;
    } else if (const char* env = std::getenv(kWisconsinDataEnv); env && *env) {
      p.data = env;
    }
  }
  if (!(p.swap_probability >= 0.0 && p.swap_probability <= 1.0)) {
    throw std::invalid_argument("swap probability must lie in [0, 1]");
  }
  if (p.trials == 0) throw std::invalid_argument("trial count must be positive");
  return p;
}

GeneratorSpec synthetic_spec(const ExperimentPreset& preset, std::uint64_t seed) {
  if (preset.name == PresetName::fig3) throw std::invalid_argument("fig3 is not a synthetic preset");
  GeneratorSpec spec;
  spec.dimension = preset.dimension;
  spec.solution_spread = 1.0;
  spec.seed = seed;
  spec.shuffle = true;
  for (std::size_t j = 0; j < preset.sizes.size(); ++j) {
    spec.classes.push_back({preset.sizes[j], preset.entry_means[j], preset.entry_spreads[j]});
  }
  return spec;
}

LinearSystem trial_system(const ExperimentPreset& preset, std::uint64_t trial_seed,
                          const Matrix* dataset) {
  if (preset.name != PresetName::fig3) return generate_synthetic(synthetic_spec(preset, trial_seed));
  if (!dataset) throw std::invalid_argument("fig3 trials need the dataset matrix");
  return build_planted_from_matrix(*dataset, preset.sizes, trial_seed);
}

TrialResult run_trial(const ExperimentPreset& preset, std::uint64_t trial_seed,
                      const Matrix* dataset, bool record_steps) {
  LinearSystem system = trial_system(preset, trial_seed, dataset);
  RandomStream init_rng(trial_seed, Stream::initial_iterates);
  IterateSet inits = IterateSet::standard_normal(preset.sizes.size(), system.cols(), init_rng);
  MrkConfig config;
  config.swap_probability = preset.swap_probability;
  config.iterations = preset.iterations;
  config.distribution = preset.distribution;
  config.seed = trial_seed;
  config.record_steps = record_steps;
  config.record_trajectory = record_steps && preset.record_trajectory;
  Trace trace = run_mrk(system, inits, config);
  return {std::move(system), std::move(inits), std::move(trace)};
}

ExperimentResult run_experiment(const ExperimentPreset& preset, std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();

  std::optional<Matrix> dataset;
  if (preset.name == PresetName::fig3) {
    if (preset.data.empty()) {
      throw std::runtime_error(std::string("fig3 needs the Wisconsin breast cancer file "
                                           "(breast-cancer-wisconsin.data); pass --data or set ") +
                               kWisconsinDataEnv);
    }
    if (!std::filesystem::exists(preset.data)) {
      throw std::runtime_error("fig3 dataset not found at '" + preset.data.string() + "'");
    }
    dataset = load_delimited_dataset(preset.data);
  }
  const Matrix* data = dataset ? &*dataset : nullptr;

  ExperimentResult result;
  result.first_trial = run_trial(preset, preset.seed, data, true);

  std::vector<std::optional<Trace>> slots(preset.trials);
  slots[0] = result.first_trial->trace;
  slots[0]->steps.clear();
  slots[0]->trajectory.clear();

  std::atomic<std::size_t> next{1};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < preset.trials; t = next++) {
      try {
        slots[t] = run_trial(preset, preset.seed + t, data, false).trace;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(preset.trials, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  result.traces.reserve(preset.trials);
  for (auto& slot : slots) result.traces.push_back(std::move(*slot));
  result.aggregate = aggregate_trials(result.traces);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mrk
