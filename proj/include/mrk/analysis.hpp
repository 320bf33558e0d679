#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mrk/linear_system.hpp"
#include "mrk/trace.hpp"

namespace mrk {

class IterateSet;

/// Iterate i is paired with solution labeling[i].
using Labeling = std::vector<std::size_t>;

/// Exhaustive matching is limited to this many iterates.
inline constexpr std::size_t kMaxMatchedIterates = 8;

/// Σ_i ‖x⁽ⁱ⁾ − x*⁽ˡᵃᵇᵉˡⁱⁿᵍ⁽ⁱ⁾⁾‖².
double total_error(const IterateSet& iterates, std::span<const Vector> solutions,
                   const Labeling& labeling);

struct MatchedError {
  double value = 0.0;
  Labeling labeling;
};

/// Minimum of total_error over every permutation; ties resolve to the
/// lexicographically smallest permutation. Throws std::domain_error for more
/// than kMaxMatchedIterates iterates.
MatchedError matched_error(const IterateSet& iterates, std::span<const Vector> solutions);

/// Same search over a precomputed cost table, cost[i·w + j] = ‖x⁽ⁱ⁾ − x*⁽ʲ⁾‖².
MatchedError matched_error(std::span<const double> cost, std::size_t width);

/// Minimum assignment cost by dynamic programming over subsets. Used for the
/// per-step matched error, where only the value is needed.
double min_assignment_cost(std::span<const double> cost, std::size_t width);

struct ErrorSeries {
  std::vector<std::vector<double>> per_iterate;
  std::vector<double> total;
  Labeling labeling;
};

/// Per-step errors of a trace (initial state first) plus their sums.
ErrorSeries error_series(const Trace& trace);

struct ContractionConstant {
  double value = 1.0;
  bool rank_deficient = false;
  double sigma_min = 0.0;
  double frobenius_sq = 0.0;
};

/// 1 − σ_min²/‖M‖_F², the expected one-step squared-error ratio of RK with
/// squared-row-norm sampling. Rank-deficient input yields 1 with the flag set.
ContractionConstant rk_contraction_constant(const Matrix& matrix);

/// Rows scaled to unit norm. With uniform sampling, RK on M contracts at
/// rk_contraction_constant(row_normalized(M)).
Matrix row_normalized(const Matrix& matrix);

struct TheoreticalBound {
  Matrix matrix_a;
  double l1_norm = 0.0;
  std::vector<std::size_t> class_counts;
  double rk_constant_bound = 0.0;
  double mistake_probability = 0.0;
  double swap_probability = 0.0;

  bool contracts() const { return l1_norm < 1.0; }
};

/// Error-propagation matrix of the local convergence argument:
///   A_jj = 1 + (m_j/m)(c−1)(1 − q − n r/(n+1)) + ((m−m_j)/m)(q + r/(n+1))
///   A_ij = 2 (m_j/m)(q + r/(n+1)),  i ≠ j
/// Column j is built from m_j, the size of the class whose row is sampled.
TheoreticalBound bound_matrix(std::span<const std::size_t> class_counts, double c, double q,
                              double r);

/// Maximum column absolute sum. Throws std::domain_error on negative entries.
double l1_operator_norm(const Matrix& matrix);

struct ClassRank {
  std::size_t label = 0;
  std::size_t rows = 0;
  std::size_t rank = 0;
  bool full_rank = false;
};

/// Numerical rank (singular values above 1e-10·σ_max) of every class block.
std::vector<ClassRank> check_full_rank(const LinearSystem& system);

struct AggregateSeries {
  std::size_t trial_count = 0;
  std::size_t iterate_count = 0;
  /// Indexed [k][i]; k = 0 is the initial state.
  std::vector<std::vector<double>> median;
  std::vector<std::vector<double>> q25;
  std::vector<std::vector<double>> q75;
};

/// Percentile with linear interpolation between order statistics
/// (position p·(n−1) in the sorted sample).
double percentile(std::vector<double> values, double p);

/// Median and quartiles of each iterate's squared error across trials.
/// Traces must share N and n+1 and all carry errors.
AggregateSeries aggregate_trials(std::span<const Trace> traces);

}  // namespace mrk
