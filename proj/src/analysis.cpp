#include "mrk/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mrk/mrk.hpp"

namespace mrk {

namespace {

double sorted_percentile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> cost_table(const IterateSet& iterates, std::span<const Vector> solutions) {
  const std::size_t w = iterates.size();
  if (solutions.size() != w) {
    std::ostringstream os;
    os << w << " iterates but " << solutions.size() << " solutions";
    throw std::domain_error(os.str());
  }
  std::vector<double> cost(w * w);
  for (std::size_t i = 0; i < w; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (iterates[i].size() != solutions[j].size()) {
        throw std::domain_error("iterate and solution dimensions differ");
      }
      cost[i * w + j] = (iterates[i] - solutions[j]).squaredNorm();
    }
  }
  return cost;
}

}  // namespace

double total_error(const IterateSet& iterates, std::span<const Vector> solutions,
                   const Labeling& labeling) {
  if (labeling.size() != iterates.size() || solutions.size() != iterates.size()) {
    throw std::domain_error("iterates, solutions and labeling must have equal sizes");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const std::size_t j = labeling[i];
    if (j >= solutions.size()) throw std::domain_error("labeling entry out of range");
    if (iterates[i].size() != solutions[j].size()) {
      throw std::domain_error("iterate and solution dimensions differ");
    }
    sum += (iterates[i] - solutions[j]).squaredNorm();
  }
  return sum;
}

MatchedError matched_error(std::span<const double> cost, std::size_t width) {
  if (width == 0 || cost.size() != width * width) throw std::domain_error("malformed cost table");
  if (width > kMaxMatchedIterates) {
    std::ostringstream os;
    os << "exhaustive matching supports at most " << kMaxMatchedIterates << " iterates, got "
       << width;
    throw std::domain_error(os.str());
  }
  Labeling perm(width);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  MatchedError best{std::numeric_limits<double>::infinity(), perm};
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < width; ++i) sum += cost[i * width + perm[i]];
    // Strict comparison keeps the first (lexicographically smallest) optimum.
    if (sum < best.value) best = {sum, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

MatchedError matched_error(const IterateSet& iterates, std::span<const Vector> solutions) {
  if (iterates.size() > kMaxMatchedIterates) {
    std::ostringstream os;
    os << "exhaustive matching supports at most " << kMaxMatchedIterates << " iterates, got "
       << iterates.size();
    throw std::domain_error(os.str());
  }
  return matched_error(cost_table(iterates, solutions), iterates.size());
}

double min_assignment_cost(std::span<const double> cost, std::size_t width) {
  if (width == 0 || cost.size() != width * width) throw std::domain_error("malformed cost table");
  if (width == 1) return cost[0];
  if (width == 2) return std::min(cost[0] + cost[3], cost[1] + cost[2]);
  // dp[mask]: best cost of pairing iterates 0..popcount(mask)−1 with the
  // solutions in mask.
  const std::size_t full = std::size_t{1} << width;
  std::vector<double> dp(full, std::numeric_limits<double>::infinity());
  dp[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask])) continue;
    const auto i = static_cast<std::size_t>(std::popcount(mask));
    if (i == width) continue;
    for (std::size_t j = 0; j < width; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      dp[next] = std::min(dp[next], dp[mask] + cost[i * width + j]);
    }
  }
  return dp[full - 1];
}

ErrorSeries error_series(const Trace& trace) {
  if (!trace.errors) throw std::domain_error("trace carries no error series");
  ErrorSeries out;
  out.labeling = trace.meta.labeling;
  const auto& table = *trace.errors;
  out.per_iterate.reserve(table.size() + 1);
  out.per_iterate.push_back(trace.initial_errors);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto row = table[k];
    out.per_iterate.emplace_back(row.begin(), row.end());
  }
  out.total.reserve(out.per_iterate.size());
  for (const auto& row : out.per_iterate) {
    out.total.push_back(std::accumulate(row.begin(), row.end(), 0.0));
  }
  return out;
}

Matrix row_normalized(const Matrix& matrix) {
  Matrix out = matrix;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

ContractionConstant rk_contraction_constant(const Matrix& matrix) {
  ContractionConstant out;
  out.frobenius_sq = matrix.squaredNorm();
  if (matrix.rows() < matrix.cols() || out.frobenius_sq == 0.0) {
    out.rank_deficient = true;
    return out;
  }
  const Vector sv = singular_values(matrix);
  out.sigma_min = sv(sv.size() - 1);
  if (!(out.sigma_min > 1e-10 * sv(0))) {
    out.rank_deficient = true;
    out.value = 1.0;
    return out;
  }
  out.value = 1.0 - out.sigma_min * out.sigma_min / out.frobenius_sq;
  return out;
}

double l1_operator_norm(const Matrix& matrix) {
  if ((matrix.array() < 0.0).any()) throw std::domain_error("l1 operator norm expects nonnegative entries");
  if (matrix.size() == 0) return 0.0;
  return matrix.colwise().sum().maxCoeff();
}

TheoreticalBound bound_matrix(std::span<const std::size_t> class_counts, double c, double q,
                              double r) {
  if (class_counts.empty()) throw std::domain_error("bound matrix needs at least one class");
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("RK constant c must lie in (0, 1)");
  if (!(q >= 0.0 && q < 1.0)) throw std::domain_error("mistake probability q must lie in [0, 1)");
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("swap probability r must lie in [0, 1]");
  for (auto count : class_counts) {
    if (count == 0) throw std::domain_error("class counts must be positive");
  }

  const std::size_t width = class_counts.size();
  const double n = static_cast<double>(width - 1);
  const double n_plus_1 = static_cast<double>(width);
  const double m = static_cast<double>(
      std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  const double leak = q + r / n_plus_1;

  TheoreticalBound out;
  out.matrix_a = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
  for (std::size_t j = 0; j < width; ++j) {
    const double share = static_cast<double>(class_counts[j]) / m;
    const double rest = (m - static_cast<double>(class_counts[j])) / m;
    for (std::size_t i = 0; i < width; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (i == j) {
        out.matrix_a(ii, jj) = 1.0 + share * (c - 1.0) * (1.0 - q - n * r / n_plus_1) + rest * leak;
      } else {
        out.matrix_a(ii, jj) = 2.0 * share * leak;
      }
    }
  }
  out.l1_norm = l1_operator_norm(out.matrix_a);
  out.class_counts.assign(class_counts.begin(), class_counts.end());
  out.rk_constant_bound = c;
  out.mistake_probability = q;
  out.swap_probability = r;
  return out;
}

std::vector<ClassRank> check_full_rank(const LinearSystem& system) {
  if (!system.labels()) throw std::domain_error("rank check requires row labels");
  std::vector<ClassRank> out;
  const std::size_t classes = system.class_count();
  for (std::size_t label = 0; label < classes; ++label) {
    const Matrix block = system.class_matrix(label);
    ClassRank report;
    report.label = label;
    report.rows = static_cast<std::size_t>(block.rows());
    report.rank = block.rows() == 0 ? 0 : numerical_rank(block, 1e-10);
    report.full_rank = report.rank == system.cols();
    out.push_back(report);
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::domain_error("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  return sorted_percentile(values, p);
}

AggregateSeries aggregate_trials(std::span<const Trace> traces) {
  if (traces.empty()) throw std::domain_error("no traces to aggregate");
  const auto& first = traces.front();
  if (!first.errors) throw std::domain_error("trace 0 carries no error series");
  const std::size_t width = first.errors->width();
  const std::size_t steps = first.errors->size();
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& tr = traces[t];
    if (!tr.errors || tr.errors->width() != width || tr.errors->size() != steps ||
        tr.initial_errors.size() != width) {
      std::ostringstream os;
      os << "trace " << t << " does not match the shape of trace 0 (" << steps << " steps, "
         << width << " iterates)";
      throw std::domain_error(os.str());
    }
  }

  AggregateSeries out;
  out.trial_count = traces.size();
  out.iterate_count = width;
  out.median.assign(steps + 1, std::vector<double>(width));
  out.q25 = out.median;
  out.q75 = out.median;

  std::vector<double> sample(traces.size());
  for (std::size_t k = 0; k <= steps; ++k) {
    for (std::size_t i = 0; i < width; ++i) {
      for (std::size_t t = 0; t < traces.size(); ++t) {
        sample[t] = k == 0 ? traces[t].initial_errors[i] : (*traces[t].errors)[k - 1][i];
      }
      std::sort(sample.begin(), sample.end());
      out.median[k][i] = sorted_percentile(sample, 0.5);
      out.q25[k][i] = sorted_percentile(sample, 0.25);
      out.q75[k][i] = sorted_percentile(sample, 0.75);
    }
  }
  return out;
}

}  // namespace mrk
