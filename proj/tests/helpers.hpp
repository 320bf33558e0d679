#pragma once

#include <cstdint>
#include <vector>

#include "mrk/linear_system.hpp"
#include "mrk/random.hpp"

namespace mrk::testing {

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Vector gaussian_vector(std::size_t n, RandomStream& rng) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
  return v;
}

/// Single-class consistent system with planted solution, rows in order.
inline LinearSystem planted_single(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RandomStream rng(seed, 99u);
  Matrix m = gaussian_matrix(rows, cols, rng);
  Vector x = gaussian_vector(cols, rng);
  Vector b = m * x;
  return LinearSystem(std::move(m), std::move(b), std::vector<std::size_t>(rows, 0),
                      std::vector<Vector>{x});
}

}  // namespace mrk::testing
