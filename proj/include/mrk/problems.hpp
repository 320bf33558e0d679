#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mrk/linear_system.hpp"

namespace mrk {

struct ClassSpec {
  std::size_t rows = 0;
  double entry_mean = 0.0;
  /// Standard deviation of the matrix entries.
  double entry_spread = 1.0;
};

struct GeneratorSpec {
  std::vector<ClassSpec> classes;
  std::size_t dimension = 0;
  /// Standard deviation of the planted solution entries (mean 0).
  double solution_spread = 1.0;
  std::uint64_t seed = 0;
  bool shuffle = false;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Gaussian class blocks with planted solutions, stacked in class order and
/// optionally shuffled. All draws come from the Stream::generator sub-stream
/// (class by class: matrix entries row-major, then the solution); the
/// shuffle uses Stream::shuffle.
LinearSystem generate_synthetic(const GeneratorSpec& spec);

enum class Imputation { median, mean };

/// Parses a comma-delimited numeric table, drops the leading identifier
/// column and fills `missing_token` cells with the column statistic of the
/// present values. Every row is kept.
///
/// Throws std::runtime_error naming the path when the file cannot be read,
/// and naming the 1-based line and column for malformed cells.
Matrix load_delimited_dataset(const std::filesystem::path& path,
                              const std::string& missing_token = "?",
                              Imputation impute = Imputation::median);

/// Splits rows of `data` in order into consecutive classes, plants a
/// standard normal solution per class (Stream::planted_solutions of
/// `solution_seed`) and synthesizes b. Throws std::invalid_argument when a
/// class block is rank deficient.
LinearSystem build_planted_from_matrix(const Matrix& data, const std::vector<std::size_t>& split_sizes,
                                       std::uint64_t solution_seed);

struct ShuffleRecord {
  /// New row r holds old row permutation[r].
  std::vector<std::size_t> permutation;
  std::vector<std::size_t> inverse;
};

/// Uniformly random joint permutation of rows, right-hand side and labels
/// (Fisher–Yates on the Stream::shuffle sub-stream). Solutions are kept.
std::pair<LinearSystem, ShuffleRecord> shuffle_rows(const LinearSystem& system, std::uint64_t seed);

/// Reorders rows so that new row r is old row order[r].
LinearSystem permute_rows(const LinearSystem& system, const std::vector<std::size_t>& order);

}  // namespace mrk
