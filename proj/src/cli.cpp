#include "mrk/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrk/analysis.hpp"
#include "mrk/experiment.hpp"
#include "mrk/io.hpp"
#include "mrk/kaczmarz.hpp"
#include "mrk/mrk.hpp"
#include "mrk/problems.hpp"

namespace mrk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for bad flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string preset;
  fs::path spec_file;
  std::vector<std::size_t> rows;
  std::size_t dimension = 0;
  std::vector<double> means;
  std::vector<double> spreads;
  double solution_spread = 1.0;
  std::uint64_t seed = 1;
  bool shuffle = false;
  fs::path out;
};

GeneratorSpec spec_from_json(const json& j) {
  GeneratorSpec spec;
  spec.dimension = j.at("dimension").get<std::size_t>();
  spec.solution_spread = j.value("solution_spread", 1.0);
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.shuffle = j.value("shuffle", false);
  for (const auto& c : j.at("classes")) {
    spec.classes.push_back({c.at("rows").get<std::size_t>(), c.value("mean", 0.0), c.value("spread", 1.0)});
  }
  return spec;
}

GeneratorSpec resolve_gen(const GenOptions& o, bool seed_given) {
  GeneratorSpec spec;
  if (!o.preset.empty()) {
    const auto preset = parse_preset(o.preset);
    if (preset == PresetName::fig3) throw UsageError("gen supports the synthetic presets fig1 and fig2");
    spec = synthetic_spec(resolve_preset(preset), o.seed);
  } else if (!o.spec_file.empty()) {
    std::ifstream in(o.spec_file);
    if (!in) throw std::runtime_error("cannot read spec file '" + o.spec_file.string() + "'");
    spec = spec_from_json(json::parse(in));
    if (seed_given) spec.seed = o.seed;
  } else {
    if (o.rows.empty() || o.dimension == 0) {
      throw UsageError("gen needs --preset, --spec, or --rows with --dim");
    }
    spec.dimension = o.dimension;
    spec.solution_spread = o.solution_spread;
    spec.seed = o.seed;
    spec.shuffle = o.shuffle;
    for (std::size_t j = 0; j < o.rows.size(); ++j) {
      const double mean = o.means.empty() ? 0.0 : o.means[std::min(j, o.means.size() - 1)];
      const double spread = o.spreads.empty() ? 1.0 : o.spreads[std::min(j, o.spreads.size() - 1)];
      spec.classes.push_back({o.rows[j], mean, spread});
    }
  }
  return spec;
}

int cmd_generate(const GenOptions& o, bool seed_given, std::ostream& out) {
  const auto spec = resolve_gen(o, seed_given);
  const auto system = generate_synthetic(spec);
  const auto sidecar = io::solutions_path_for(o.out);
  io::write_system_csv(o.out, system);
  io::write_solutions(sidecar, *system.solutions());
  out << "seed " << spec.seed << '\n'
      << "system " << o.out.string() << " (" << system.describe() << ")\n"
      << "solutions " << sidecar.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  fs::path system;
  fs::path solutions;
  std::size_t classes = 0;
  double swap_probability = 0.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::string dist = "uniform";
  std::string method = "mrk";
  fs::path trace = "trace.jsonl";
  fs::path summary;
  bool require_errors = false;
};

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<fs::path> solutions;
  if (!o.solutions.empty()) {
    solutions = o.solutions;
  } else if (const auto sidecar = io::solutions_path_for(o.system); fs::exists(sidecar)) {
    solutions = sidecar;
  }
  if (!solutions && o.require_errors) {
    err << "error: no solutions file for '" << o.system.string() << "' and --require-errors is set\n";
    return 1;
  }
  const auto system = io::read_system_csv(o.system, solutions);
  const auto kind = parse_sampling_kind(o.dist);

  std::size_t classes = o.classes;
  if (classes == 0) classes = std::max<std::size_t>(system.class_count(), 1);
  if (o.method == "rk" && classes != 1) throw UsageError("--method rk runs a single iterate (--classes 1)");

  if (o.require_errors && system.solutions()->size() != classes) {
    err << "error: " << system.solutions()->size() << " solutions for " << classes
        << " iterates; errors cannot be recorded\n";
    return 1;
  }

  RandomStream init_rng(o.seed, Stream::initial_iterates);
  const auto inits = IterateSet::standard_normal(classes, system.cols(), init_rng);

  Trace trace;
  if (o.method == "rk") {
    trace = run_rk(system, inits[0], o.iterations, RowDistribution::make(kind, system), o.seed);
  } else if (o.method == "mrk") {
    MrkConfig config;
    config.swap_probability = o.swap_probability;
    config.iterations = o.iterations;
    config.distribution = kind;
    config.seed = o.seed;
    trace = run_mrk(system, inits, config);
  } else {
    throw UsageError("unknown --method '" + o.method + "' (expected mrk or rk)");
  }

  auto summary = o.summary;
  if (summary.empty()) {
    summary = o.trace;
    summary.replace_extension(".summary.csv");
  }
  io::write_trace_jsonl(o.trace, trace);
  io::write_summary_csv(summary, trace);

  out << "method " << trace.meta.method << " seed " << o.seed << " iterations " << o.iterations
      << " iterates " << classes << '\n';
  if (trace.errors && trace.errors->size() > 0) {
    const auto last = (*trace.errors)[trace.errors->size() - 1];
    out << "final squared errors";
    for (double v : last) out << ' ' << io::format_double(v);
    out << '\n';
  }
  if (trace.meta.residual_not_vanishing) out << "warning: residuals do not vanish (inconsistent system?)\n";
  out << "trace " << o.trace.string() << "\nsummary " << summary.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentOptions {
  std::string preset;
  PresetOverrides overrides;
  std::size_t trials = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double swap_probability = 0.0;
  std::string dist;
  std::vector<std::size_t> sizes;
  fs::path data;
  fs::path out;
  std::size_t threads = 0;
};

json preset_to_json(const ExperimentPreset& p) {
  json j = {
      {"preset", std::string(to_string(p.name))},
      {"trials", p.trials},
      {"seed", p.seed},
      {"trial_seeds", "seed + trial_index"},
      {"swap_probability", p.swap_probability},
      {"iterations", p.iterations},
      {"distribution", std::string(to_string(p.distribution))},
      {"sizes", p.sizes},
      {"dimension", p.dimension},
      {"budget", p.budget_note},
  };
  if (p.name == PresetName::fig3) {
    j["data"] = p.data.string();
    j["imputation"] = "column median of '?' cells";
    j["columns"] = "identifier dropped; 9 cytology features + class code";
  } else {
    j["entry_means"] = p.entry_means;
    j["entry_spreads"] = p.entry_spreads;
  }
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int cmd_experiment(const ExperimentOptions& o, std::ostream& out) {
  const auto name = parse_preset(o.preset);
  const auto preset = resolve_preset(name, o.overrides);
  const std::size_t threads = o.threads > 0 ? o.threads : std::max(1u, std::thread::hardware_concurrency());

  const fs::path dir = o.out.empty() ? fs::path("results") / std::string(to_string(name)) : o.out;
  fs::create_directories(dir);

  const auto result = run_experiment(preset, threads);

  std::vector<fs::path> outputs;
  const auto aggregate_path = dir / "aggregate.csv";
  io::write_aggregate_csv(aggregate_path, result.aggregate);
  outputs.push_back(aggregate_path);

  const auto& first = *result.first_trial;
  const auto trace_path = dir / "trial0.trace.jsonl";
  io::write_trace_jsonl(trace_path, first.trace);
  outputs.push_back(trace_path);
  const auto summary_path = dir / "trial0.summary.csv";
  io::write_summary_csv(summary_path, first.trace);
  outputs.push_back(summary_path);
  if (preset.record_trajectory) {
    const auto system_path = dir / "trial0.system.csv";
    io::write_system_csv(system_path, first.system);
    io::write_solutions(io::solutions_path_for(system_path), *first.system.solutions());
    const auto trajectory_path = dir / "trial0.trajectory.csv";
    io::write_trajectory_csv(trajectory_path, first.inits.vectors(), first.trace.trajectory);
    outputs.insert(outputs.end(), {system_path, io::solutions_path_for(system_path), trajectory_path});
  }

  json manifest;
  manifest["config"] = preset_to_json(preset);
  manifest["rng"] = std::string(RandomStream::algorithm);
  manifest["threads"] = threads;
  manifest["inputs"] = json::array();
  if (name == PresetName::fig3) {
    manifest["inputs"].push_back({{"path", preset.data.string()}, {"sha256", io::sha256_file(preset.data)}});
  }
  manifest["outputs"] = json::array();
  for (const auto& p : outputs) {
    manifest["outputs"].push_back({{"path", p.string()}, {"sha256", io::sha256_file(p)}});
  }
  manifest["wall_seconds"] = result.wall_seconds;
  manifest["finished_utc"] = utc_timestamp();

  const auto& last = result.aggregate.median.back();
  manifest["final_median"] = last;

  const auto manifest_path = dir / "manifest.json";
  {
    std::ofstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot write '" + manifest_path.string() + "'");
    mf << manifest.dump(2) << '\n';
  }

  out << to_string(name) << ": " << preset.trials << " trials x " << preset.iterations
      << " iterations in " << std::fixed << std::setprecision(2) << result.wall_seconds << " s\n";
  out.unsetf(std::ios::floatfield);
  out << "final median squared error";
  for (double v : last) out << ' ' << io::format_double(v);
  out << "\naggregate " << aggregate_path.string() << "\nmanifest " << manifest_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- bound

struct BoundOptions {
  std::vector<std::size_t> counts;
  double c = -1.0;
  double q = 0.0;
  double r = 0.0;
  fs::path from_system;
  bool row_normalized = false;
};

int cmd_bound(const BoundOptions& o, std::ostream& out) {
  std::vector<std::size_t> counts = o.counts;
  double c = o.c;
  if (!o.from_system.empty()) {
    const auto system = io::read_system_csv(o.from_system);
    if (!system.labels()) throw UsageError("--from-system needs a label column");
    counts = *system.class_counts();
    double worst = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      Matrix block = system.class_matrix(j);
      if (o.row_normalized) block = row_normalized(block);
      const auto k = rk_contraction_constant(block);
      out << "rk_constant[" << j << "] " << io::format_double(k.value)
          << (k.rank_deficient ? " (rank deficient)" : "") << '\n';
      worst = std::max(worst, k.value);
    }
    if (o.c < 0.0) c = worst;
  }
  if (counts.empty()) throw UsageError("bound needs --counts or --from-system");
  if (c < 0.0) throw UsageError("bound needs --c (or --from-system)");

  const auto bound = bound_matrix(counts, c, o.q, o.r);
  out << "counts";
  for (std::size_t j = 0; j < counts.size(); ++j) out << (j ? "," : " ") << counts[j];
  out << "\nc " << io::format_double(c) << "\nq " << io::format_double(o.q) << "\nr "
      << io::format_double(o.r) << "\nA\n";
  for (Eigen::Index i = 0; i < bound.matrix_a.rows(); ++i) {
    out << ' ';
    for (Eigen::Index j = 0; j < bound.matrix_a.cols(); ++j) {
      out << ' ' << io::format_double(bound.matrix_a(i, j));
    }
    out << '\n';
  }
  out << "l1_norm " << io::format_double(bound.l1_norm) << '\n'
      << "contraction " << (bound.contracts() ? "holds" : "fails") << " (l1_norm "
      << (bound.contracts() ? "<" : ">=") << " 1)\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-randomized Kaczmarz solver for shuffled multi-class linear systems", "mrk"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a planted multi-class system");
  gen_cmd->add_option("--preset", gen.preset, "fig1 or fig2");
  gen_cmd->add_option("--spec", gen.spec_file, "JSON generator spec")->check(CLI::ExistingFile);
  gen_cmd->add_option("--rows", gen.rows, "Rows per class, e.g. 1000,1000")->delimiter(',');
  gen_cmd->add_option("--dim", gen.dimension, "Columns");
  gen_cmd->add_option("--means", gen.means, "Entry mean per class")->delimiter(',');
  gen_cmd->add_option("--spreads", gen.spreads, "Entry standard deviation per class")->delimiter(',');
  gen_cmd->add_option("--solution-spread", gen.solution_spread, "Std. dev. of planted solutions");
  auto* gen_seed = gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_flag("--shuffle", gen.shuffle, "Shuffle rows after stacking");
  gen_cmd->add_option("--out", gen.out, "System CSV path")->required();

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run MRK (or RK) on a system file");
  run_cmd->add_option("system", run_opts.system, "System CSV")->required();
  run_cmd->add_option("--solutions", run_opts.solutions, "Solutions sidecar (default: <system>.solutions.csv)");
  run_cmd->add_option("--classes", run_opts.classes, "Number of iterates n+1 (default: class count)");
  run_cmd->add_option("--swap-prob", run_opts.swap_probability, "Swap probability r")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--iters", run_opts.iterations, "Iterations N");
  run_cmd->add_option("--seed", run_opts.seed, "Seed");
  run_cmd->add_option("--dist", run_opts.dist, "uniform or sqnorm");
  run_cmd->add_option("--method", run_opts.method, "mrk or rk");
  run_cmd->add_option("--trace", run_opts.trace, "JSON-Lines trace output");
  run_cmd->add_option("--summary", run_opts.summary, "CSV summary output (default: <trace>.summary.csv)");
  run_cmd->add_flag("--require-errors", run_opts.require_errors, "Fail unless errors can be recorded");

  ExperimentOptions exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Reproduce a figure preset over many trials");
  exp_cmd->add_option("preset", exp.preset, "fig1, fig2 or fig3")->required();
  auto* exp_trials = exp_cmd->add_option("--trials", exp.trials, "Trial count");
  auto* exp_iters = exp_cmd->add_option("--iters", exp.iterations, "Iterations per trial");
  auto* exp_seed = exp_cmd->add_option("--seed", exp.seed, "Base seed (trial t uses seed + t)");
  auto* exp_r = exp_cmd->add_option("--swap-prob", exp.swap_probability, "Swap probability r")->check(CLI::Range(0.0, 1.0));
  auto* exp_dist = exp_cmd->add_option("--dist", exp.dist, "uniform or sqnorm");
  auto* exp_sizes = exp_cmd->add_option("--sizes", exp.sizes, "Rows per class")->delimiter(',');
  auto* exp_data = exp_cmd->add_option("--data", exp.data, std::string("Wisconsin data file (default: $") + kWisconsinDataEnv + ")");
  exp_cmd->add_option("--out", exp.out, "Output directory (default: results/<preset>)");
  exp_cmd->add_option("--threads", exp.threads, "Worker threads (default: hardware concurrency)");

  BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the error-propagation bound matrix");
  bound_cmd->add_option("--counts", bound.counts, "Rows per class")->delimiter(',');
  bound_cmd->add_option("--c", bound.c, "RK constant bound c in (0,1)");
  bound_cmd->add_option("--q", bound.q, "Mistake probability q in [0,1)");
  bound_cmd->add_option("--r", bound.r, "Swap probability r in [0,1]");
  bound_cmd->add_option("--from-system", bound.from_system, "Take counts and c from a labeled system file");
  bound_cmd->add_flag("--row-normalized", bound.row_normalized, "Use constants of row-normalized class blocks (uniform sampling)");

  std::vector<const char*> argv{"mrk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen_cmd) return cmd_generate(gen, gen_seed->count() > 0, out);
    if (*run_cmd) return cmd_run(run_opts, out, err);
    if (*exp_cmd) {
      if (exp_trials->count()) exp.overrides.trials = exp.trials;
      if (exp_iters->count()) exp.overrides.iterations = exp.iterations;
      if (exp_seed->count()) exp.overrides.seed = exp.seed;
      if (exp_r->count()) exp.overrides.swap_probability = exp.swap_probability;
      if (exp_dist->count()) exp.overrides.distribution = parse_sampling_kind(exp.dist);
      if (exp_sizes->count()) exp.overrides.sizes = exp.sizes;
      if (exp_data->count()) exp.overrides.data = exp.data;
      return cmd_experiment(exp, out);
    }
    if (*bound_cmd) return cmd_bound(bound, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mrk::cli
