#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrk/analysis.hpp"
#include "mrk/kaczmarz.hpp"
#include "mrk/linear_system.hpp"
#include "mrk/mrk.hpp"
#include "mrk/problems.hpp"
#include "mrk/trace.hpp"

namespace mrk {

/// Environment variable consulted for the Wisconsin data file when no
/// --data flag is given.
inline constexpr const char* kWisconsinDataEnv = "MRK_WISCONSIN_DATA";

enum class PresetName { fig1, fig2, fig3 };

std::string_view to_string(PresetName name);
PresetName parse_preset(std::string_view text);

/// User-supplied changes to a preset; unset fields keep the preset value.
struct PresetOverrides {
  std::optional<double> swap_probability;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<SamplingKind> distribution;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::size_t> trials;
  std::optional<std::filesystem::path> data;
};

/// Fully resolved experiment: every field concrete.
struct ExperimentPreset {
  PresetName name = PresetName::fig2;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  double swap_probability = 0.0;
  std::size_t iterations = 0;
  SamplingKind distribution = SamplingKind::uniform;
  /// Rows per class.
  std::vector<std::size_t> sizes;
  std::size_t dimension = 0;
  /// Entry distribution per class (synthetic presets only).
  std::vector<double> entry_means;
  std::vector<double> entry_spreads;
  /// Dataset file (fig3 only).
  std::filesystem::path data;
  bool record_trajectory = false;
  /// Where the iteration budget comes from; shown in the manifest.
  std::string budget_note;
};

/// Resolves a preset and its overrides. For fig3 the data path falls back to
/// $MRK_WISCONSIN_DATA; a missing path is left empty and reported by
/// run_experiment.
ExperimentPreset resolve_preset(PresetName name, const PresetOverrides& overrides = {});

/// Generator spec of a synthetic preset for one trial seed.
GeneratorSpec synthetic_spec(const ExperimentPreset& preset, std::uint64_t seed);

/// Problem instance of one trial. `dataset` must be given for fig3.
LinearSystem trial_system(const ExperimentPreset& preset, std::uint64_t trial_seed,
                          const Matrix* dataset = nullptr);

struct TrialResult {
  LinearSystem system;
  IterateSet inits;
  Trace trace;
};

/// One trial with seed `trial_seed`: its system, standard normal initial
/// iterates from Stream::initial_iterates, and the MRK run.
TrialResult run_trial(const ExperimentPreset& preset, std::uint64_t trial_seed,
                      const Matrix* dataset, bool record_steps);

struct ExperimentResult {
  /// Traces in trial order, without step records.
  std::vector<Trace> traces;
  AggregateSeries aggregate;
  double wall_seconds = 0.0;
  /// Trial 0 in full (steps and, for fig1, iterate trajectory).
  std::optional<TrialResult> first_trial;
};

/// Runs trials with seeds seed+0, seed+1, ... on up to `threads` workers.
/// Results are placed by trial index, so the aggregate does not depend on
/// the thread count. Throws std::runtime_error when fig3 has no readable
/// dataset.
ExperimentResult run_experiment(const ExperimentPreset& preset, std::size_t threads = 1);

}  // namespace mrk
