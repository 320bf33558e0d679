#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mrk/linear_system.hpp"
#include "mrk/random.hpp"
#include "mrk/trace.hpp"

namespace mrk {

enum class SamplingKind { uniform, squared_row_norm };

std::string_view to_string(SamplingKind kind);
/// Accepts "uniform" and "sqnorm" (also "squared-row-norm").
SamplingKind parse_sampling_kind(std::string_view text);

/// Static row-sampling distribution over the rows of one system.
class RowDistribution {
 public:
  static RowDistribution uniform(std::size_t rows);
  static RowDistribution squared_row_norm(const LinearSystem& system);
  static RowDistribution make(SamplingKind kind, const LinearSystem& system);

  SamplingKind kind() const { return kind_; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  /// Inverse-CDF lookup of a uniform variate u ∈ [0,1).
  std::size_t index_for(double u) const;

 private:
  RowDistribution(SamplingKind kind, std::vector<double> weights);

  SamplingKind kind_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// (row·x − b) / ‖row‖². Throws std::domain_error for a zero row.
double residual_coefficient(const Eigen::Ref<const Eigen::RowVectorXd>& row, double b,
                            const Vector& x);
/// Same, with ‖row‖² supplied by the caller (the solvers pass the cached value).
double residual_coefficient(const Eigen::Ref<const Eigen::RowVectorXd>& row, double b,
                            const Vector& x, double row_norm_sq);

/// Orthogonal projection of x onto {y : row·y = b}.
Vector kaczmarz_update(const Vector& x, const Eigen::Ref<const Eigen::RowVectorXd>& row,
                       double b);

/// Draws one row index. Consumes exactly one uniform variate.
std::size_t sample_row(const RowDistribution& dist, RandomStream& rng);

/// Classic randomized Kaczmarz on a single-class system.
///
/// Rows are drawn from the Stream::rows sub-stream of `seed`, one variate per
/// step. When the system carries exactly one solution, the squared error is
/// recorded after every step. A system whose rows cannot all be satisfied by
/// the final iterate is flagged in the metadata rather than rejected.
Trace run_rk(const LinearSystem& system, const Vector& x0, std::size_t iterations,
             const RowDistribution& dist, std::uint64_t seed, bool record_steps = true);

}  // namespace mrk
