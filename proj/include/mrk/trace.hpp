#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrk/linear_system.hpp"

namespace mrk {

/// One solver step: sampled row, argmin/target iterates and the signed
/// residual coefficients of every iterate on the sampled row.
struct StepRecord {
  std::size_t step = 0;
  std::size_t sampled_row = 0;
  std::size_t argmin_iterate = 0;
  std::size_t target_iterate = 0;
  std::vector<double> coefficients;
  double update_magnitude = 0.0;
  bool swap_triggered = false;

  bool operator==(const StepRecord&) const = default;
};

/// Row-major k × width table of nonnegative values (one row per step).
class ErrorTable {
 public:
  ErrorTable() = default;
  explicit ErrorTable(std::size_t width) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t size() const { return width_ == 0 ? 0 : values_.size() / width_; }

  std::span<const double> operator[](std::size_t k) const {
    return {values_.data() + k * width_, width_};
  }
  void push_back(std::span<const double> row) { values_.insert(values_.end(), row.begin(), row.end()); }
  void reserve(std::size_t rows) { values_.reserve(rows * width_); }
  const std::vector<double>& data() const { return values_; }

  bool operator==(const ErrorTable&) const = default;

 private:
  std::size_t width_ = 0;
  std::vector<double> values_;
};

struct TraceMetadata {
  std::string method;  // "mrk" or "rk"
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  double swap_probability = 0.0;
  std::size_t iterations = 0;
  std::string distribution;
  std::string tie_break = "lowest-index";
  std::string system;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t iterate_count = 0;
  std::size_t solution_count = 0;
  /// Max over rows of |row·x − b| / (1 + |b|) at the final iterate (rk only).
  std::optional<double> final_max_residual;
  bool residual_not_vanishing = false;
  /// Iterate → solution pairing used for `errors` (argmin of matched error
  /// at the final iteration).
  std::vector<std::size_t> labeling;
  /// Fraction of non-swap steps whose target's class differs from the
  /// sampled row's class, under `labeling`.
  std::optional<double> empirical_mistake_rate;
};

struct Trace {
  TraceMetadata meta;
  std::vector<StepRecord> steps;
  /// Squared error of each iterate against its labeled solution after each
  /// step; present when the system carries solutions.
  std::optional<ErrorTable> errors;
  std::vector<double> initial_errors;
  /// Minimum over labelings of the total squared error, after each step.
  std::vector<double> matched_errors;
  double initial_matched_error = 0.0;
  std::vector<Vector> final_iterates;
  /// Iterate coordinates after each step, when requested.
  std::vector<std::vector<Vector>> trajectory;
};

}  // namespace mrk
