#include "mrk/linear_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mrk {

LinearSystem::LinearSystem(Matrix matrix, Vector rhs,
                           std::optional<std::vector<std::size_t>> labels,
                           std::optional<std::vector<Vector>> solutions,
                           std::optional<std::vector<std::size_t>> class_counts)
    : matrix_(std::move(matrix)),
      rhs_(std::move(rhs)),
      labels_(std::move(labels)),
      solutions_(std::move(solutions)),
      class_counts_(std::move(class_counts)) {
  const std::size_t m = rows();
  const std::size_t d = cols();
  if (m == 0 || d == 0) {
    throw std::invalid_argument("linear system must have at least one row and one column");
  }
  if (static_cast<std::size_t>(rhs_.size()) != m) {
    std::ostringstream os;
    os << "right-hand side has " << rhs_.size() << " entries, expected " << m;
    throw std::invalid_argument(os.str());
  }

  row_norm_sq_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double n2 = matrix_.row(static_cast<Eigen::Index>(i)).squaredNorm();
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      std::ostringstream os;
      os << "row " << i << " has zero or non-finite norm";
      throw std::invalid_argument(os.str());
    }
    row_norm_sq_[i] = n2;
  }

  if (solutions_) {
    if (solutions_->empty()) throw std::invalid_argument("solution list is empty");
    for (std::size_t j = 0; j < solutions_->size(); ++j) {
      if (static_cast<std::size_t>((*solutions_)[j].size()) != d) {
        std::ostringstream os;
        os << "solution " << j << " has dimension " << (*solutions_)[j].size() << ", expected "
           << d;
        throw std::invalid_argument(os.str());
      }
    }
  }

  if (labels_) {
    if (labels_->size() != m) {
      std::ostringstream os;
      os << "label count " << labels_->size() << " does not match row count " << m;
      throw std::invalid_argument(os.str());
    }
    if (solutions_) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t label = (*labels_)[i];
        if (label >= solutions_->size()) {
          std::ostringstream os;
          os << "row " << i << " has label " << label << " but only " << solutions_->size()
             << " solutions are attached";
          throw std::invalid_argument(os.str());
        }
        if (!row_satisfied_by(i, (*solutions_)[label])) {
          std::ostringstream os;
          os << "row " << i << " is inconsistent with the solution of its class " << label;
          throw std::invalid_argument(os.str());
        }
      }
    }
    if (!class_counts_) {
      const std::size_t k = class_count();
      std::vector<std::size_t> counts(k, 0);
      for (auto label : *labels_) ++counts[label];
      class_counts_ = std::move(counts);
    }
  }

  if (class_counts_) {
    const auto total = std::accumulate(class_counts_->begin(), class_counts_->end(), std::size_t{0});
    if (total != m) {
      std::ostringstream os;
      os << "class counts sum to " << total << ", expected " << m;
      throw std::invalid_argument(os.str());
    }
  }
}

std::size_t LinearSystem::class_count() const {
  if (solutions_) return solutions_->size();
  if (labels_ && !labels_->empty()) return *std::max_element(labels_->begin(), labels_->end()) + 1;
  if (class_counts_) return class_counts_->size();
  return 0;
}

Matrix LinearSystem::class_matrix(std::size_t label) const {
  if (!labels_) throw std::domain_error("class_matrix requires row labels");
  const auto count = static_cast<Eigen::Index>(std::count(labels_->begin(), labels_->end(), label));
  Matrix out(count, matrix_.cols());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    if ((*labels_)[i] == label) out.row(r++) = row(i);
  }
  return out;
}

bool LinearSystem::row_satisfied_by(std::size_t i, const Vector& x, double tol) const {
  const double b = rhs(i);
  return std::abs(row(i).dot(x) - b) <= tol * (1.0 + std::abs(b));
}

std::string LinearSystem::describe() const {
  std::ostringstream os;
  os << rows() << "x" << cols();
  if (class_counts_) {
    os << " classes=";
    for (std::size_t j = 0; j < class_counts_->size(); ++j) {
      if (j) os << '+';
      os << (*class_counts_)[j];
    }
  }
  if (solutions_) os << " solutions=" << solutions_->size();
  return os.str();
}

Vector singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  const Vector sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = rel_tol * sv(0);
  return static_cast<std::size_t>((sv.array() > cutoff).count());
}

}  // namespace mrk
