#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Absolute/relative hybrid tolerance for "row ℓ is satisfied by x".
inline constexpr double kConsistencyTolerance = 1e-9;

/// Stacked system M x = b for a combined (possibly shuffled) problem.
///
/// Ground truth is optional: `labels` maps each row to the class whose
/// planted solution satisfies it, `solutions` holds one vector per class.
/// Construction validates every invariant and throws std::invalid_argument
/// naming the offending row or class.
class LinearSystem {
 public:
  LinearSystem(Matrix matrix, Vector rhs,
               std::optional<std::vector<std::size_t>> labels = std::nullopt,
               std::optional<std::vector<Vector>> solutions = std::nullopt,
               std::optional<std::vector<std::size_t>> class_counts = std::nullopt);

  std::size_t rows() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix_.cols()); }

  const Matrix& matrix() const { return matrix_; }
  const Vector& rhs() const { return rhs_; }

  auto row(std::size_t i) const { return matrix_.row(static_cast<Eigen::Index>(i)); }
  double rhs(std::size_t i) const { return rhs_(static_cast<Eigen::Index>(i)); }
  double row_norm_sq(std::size_t i) const { return row_norm_sq_[i]; }
  const std::vector<double>& row_norms_sq() const { return row_norm_sq_; }

  const std::optional<std::vector<std::size_t>>& labels() const { return labels_; }
  const std::optional<std::vector<Vector>>& solutions() const { return solutions_; }
  const std::optional<std::vector<std::size_t>>& class_counts() const { return class_counts_; }

  bool has_ground_truth() const { return labels_.has_value() && solutions_.has_value(); }

  /// Number of classes implied by the ground truth (solutions, else labels).
  std::size_t class_count() const;

  /// Rows carrying `label`, in stored order. Requires labels.
  Matrix class_matrix(std::size_t label) const;

  /// True when |row·x − b| ≤ tol·(1 + |b|).
  bool row_satisfied_by(std::size_t i, const Vector& x,
                        double tol = kConsistencyTolerance) const;

  std::string describe() const;

 private:
  Matrix matrix_;
  Vector rhs_;
  std::vector<double> row_norm_sq_;
  std::optional<std::vector<std::size_t>> labels_;
  std::optional<std::vector<Vector>> solutions_;
  std::optional<std::vector<std::size_t>> class_counts_;
};

/// Singular values (descending) of a dense matrix.
Vector singular_values(const Matrix& m);

/// Count of singular values above rel_tol·σ_max.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-10);

}  // namespace mrk
