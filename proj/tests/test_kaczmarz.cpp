#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "helpers.hpp"
#include "mrk/kaczmarz.hpp"
#include "mrk/problems.hpp"

using namespace mrk;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) out(j++) = x;
  return out;
}

}  // namespace

TEST_CASE("LinearSystem validates its invariants") {
  SUBCASE("zero row is rejected with its index") {
    try {
      LinearSystem(mat({{1, 0}, {0, 0}}), vec({1, 0}));
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
  }
  SUBCASE("inconsistent labeled row is rejected") {
    CHECK_THROWS_AS(LinearSystem(mat({{1, 0}, {0, 1}}), vec({1, 5}), std::vector<std::size_t>{0, 0},
                                 std::vector<Vector>{vec({1, 1})}),
                    std::invalid_argument);
  }
  SUBCASE("consistency tolerance is scale aware") {
    // |residual| = 5e-10 ≤ 1e-9·(1 + 1e3) passes; 5e-6 does not.
    CHECK_NOTHROW(LinearSystem(mat({{1, 0}}), vec({1000.0 + 5e-10}), std::vector<std::size_t>{0},
                               std::vector<Vector>{vec({1000, 0})}));
    CHECK_THROWS(LinearSystem(mat({{1, 0}}), vec({1000.0 + 5e-6}), std::vector<std::size_t>{0},
                              std::vector<Vector>{vec({1000, 0})}));
  }
  SUBCASE("class counts must sum to m") {
    CHECK_THROWS(LinearSystem(mat({{1, 0}, {0, 1}}), vec({1, 1}), std::nullopt, std::nullopt,
                              std::vector<std::size_t>{1, 2}));
  }
  SUBCASE("row norms are cached") {
    LinearSystem s(mat({{3, 4}, {1, 0}}), vec({0, 0}));
    CHECK(s.row_norm_sq(0) == 25.0);
    CHECK(s.row_norm_sq(1) == 1.0);
  }
  SUBCASE("counts derived from labels") {
    LinearSystem s(mat({{1, 0}, {0, 1}, {1, 1}}), vec({1, 1, 2}), std::vector<std::size_t>{0, 1, 1});
    REQUIRE(s.class_counts());
    CHECK(*s.class_counts() == std::vector<std::size_t>{1, 2});
    CHECK(s.class_matrix(1).rows() == 2);
  }
}

TEST_CASE("residual_coefficient") {
  CHECK(residual_coefficient(vec({1, 0}).transpose(), 0.0, vec({0, 0})) == 0.0);
  CHECK(residual_coefficient(vec({2, 0}).transpose(), 4.0, vec({0, 0})) == -1.0);
  CHECK(residual_coefficient(vec({1, 1}).transpose(), 2.0, vec({3, 3})) == 2.0);
  CHECK_THROWS_AS(residual_coefficient(vec({0, 0}).transpose(), 1.0, vec({1, 1})), std::domain_error);
}

TEST_CASE("kaczmarz_update projects onto the hyperplane") {
  const Vector row = vec({1, 0});
  CHECK(kaczmarz_update(vec({0, 0}), row.transpose(), 2.0) == vec({2, 0}));
  CHECK(kaczmarz_update(vec({2, 7}), row.transpose(), 2.0) == vec({2, 7}));
  CHECK_THROWS_AS(kaczmarz_update(vec({1, 1}), vec({0, 0}).transpose(), 1.0), std::domain_error);

  RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 7);
    const Vector r = testing::gaussian_vector(d, rng);
    const Vector p = testing::gaussian_vector(d, rng);
    const double b = r.dot(p);
    const Vector x = 10.0 * testing::gaussian_vector(d, rng);
    const Vector x1 = kaczmarz_update(x, r.transpose(), b);
    const Vector x2 = kaczmarz_update(x1, r.transpose(), b);

    // Lands on the hyperplane, idempotent.
    CHECK(std::abs(r.dot(x1) - b) <= 1e-12 * (1.0 + std::abs(b) + r.norm() * x.norm()));
    CHECK((x2 - x1).norm() <= 1e-12 * (1.0 + x1.norm()));

    // Pythagorean identity for any p on the hyperplane.
    const double lhs = (x - p).squaredNorm();
    const double rhs = (x1 - p).squaredNorm() + (x - x1).squaredNorm();
    CHECK(std::abs(lhs - rhs) <= 1e-9 * lhs);

    // Step parallel to the row.
    const Vector step = x - x1;
    const Vector along = (step.dot(r) / r.squaredNorm()) * r;
    CHECK((step - along).norm() <= 1e-12 * (step.norm() + 1e-300));
  }
}

TEST_CASE("RowDistribution weights") {
  LinearSystem s(mat({{1, 0}, {0, 2}, {1, 1}}), vec({0, 0, 0}));
  const auto sq = RowDistribution::squared_row_norm(s);
  CHECK(sq.weights()[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(sq.weights()[1] == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(sq.weights()[2] == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
  const auto un = RowDistribution::uniform(3);
  for (const auto& d : {sq, un}) {
    const double total = std::accumulate(d.weights().begin(), d.weights().end(), 0.0);
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK(sq.index_for(0.0) == 0);
  CHECK(sq.index_for(std::nextafter(1.0, 0.0)) == 2);

  SUBCASE("weights follow rows through a permutation and back") {
    RandomStream rng(5);
    auto base = testing::planted_single(12, 3, 3);
    auto [shuffled, record] = shuffle_rows(base, 17);
    const auto w0 = RowDistribution::squared_row_norm(base).weights();
    const auto w1 = RowDistribution::squared_row_norm(shuffled).weights();
    for (std::size_t r = 0; r < w1.size(); ++r) {
      CHECK(w1[r] == doctest::Approx(w0[record.permutation[r]]).epsilon(1e-14));
    }
  }
  CHECK(parse_sampling_kind("sqnorm") == SamplingKind::squared_row_norm);
  CHECK(parse_sampling_kind("uniform") == SamplingKind::uniform);
  CHECK_THROWS(parse_sampling_kind("greedy"));
}

TEST_CASE("sample_row frequencies and draw discipline") {
  SUBCASE("single row") {
    RandomStream rng(1);
    const auto d = RowDistribution::uniform(1);
    for (int i = 0; i < 100; ++i) CHECK(sample_row(d, rng) == 0);
    CHECK(rng.uniform_draws() == 100);
  }
  SUBCASE("uniform over four rows") {
    RandomStream rng(2);
    const auto d = RowDistribution::uniform(4);
    std::vector<int> counts(4, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_row(d, rng)];
    for (int c : counts) CHECK(std::abs(c / double(draws) - 0.25) <= 0.01);
  }
  SUBCASE("squared row norms (1, 2)") {
    LinearSystem s(mat({{1, 0}, {0, 2}}), vec({0, 0}));
    RandomStream rng(3);
    const auto d = RowDistribution::squared_row_norm(s);
    std::vector<int> counts(2, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_row(d, rng)];
    CHECK(std::abs(counts[0] / double(draws) - 0.2) <= 0.01);
    CHECK(std::abs(counts[1] / double(draws) - 0.8) <= 0.01);
  }
}

TEST_CASE("RandomStream is reproducible and split") {
  RandomStream a(42, Stream::rows), b(42, Stream::rows), c(42, Stream::swaps);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    differs |= u != c.uniform();
  }
  CHECK(differs);
}

TEST_CASE("run_rk") {
  SUBCASE("fixed point stays put") {
    const auto s = testing::planted_single(20, 4, 1);
    const auto t = run_rk(s, s.solutions()->front(), 200, RowDistribution::uniform(20), 9);
    REQUIRE(t.errors);
    for (std::size_t k = 0; k < t.errors->size(); ++k) CHECK((*t.errors)[k][0] == 0.0);
  }
  SUBCASE("orthogonal rows solve exactly once both are seen") {
    LinearSystem s(mat({{1, 0}, {0, 1}}), vec({1, 1}), std::vector<std::size_t>{0, 0},
                   std::vector<Vector>{vec({1, 1})});
    const auto t = run_rk(s, vec({0, 0}), 50, RowDistribution::uniform(2), 4);
    bool seen[2] = {false, false};
    for (const auto& step : t.steps) {
      seen[step.sampled_row] = true;
      if (seen[0] && seen[1]) {
        CHECK((*t.errors)[step.step][0] == 0.0);
      }
    }
    CHECK(t.final_iterates.front() == vec({1, 1}));
  }
  SUBCASE("50x5 Gaussian converges within 5000 iterations") {
    const auto s = testing::planted_single(50, 5, 12);
    RandomStream rng(3);
    const auto t = run_rk(s, testing::gaussian_vector(5, rng), 5000,
                          RowDistribution::squared_row_norm(s), 77);
    CHECK((*t.errors)[4999][0] < 1e-20);
    CHECK_FALSE(t.meta.residual_not_vanishing);
    // Monotone up to rounding.
    double prev = t.initial_errors[0];
    for (std::size_t k = 0; k < t.errors->size(); ++k) {
      const double e = (*t.errors)[k][0];
      CHECK(e <= prev * (1.0 + 1e-9) + 1e-28);
      prev = e;
    }
  }
  SUBCASE("bitwise reproducible per seed") {
    const auto s = testing::planted_single(30, 3, 2);
    const auto a = run_rk(s, Vector::Zero(3), 300, RowDistribution::uniform(30), 5);
    const auto b = run_rk(s, Vector::Zero(3), 300, RowDistribution::uniform(30), 5);
    CHECK(a.steps == b.steps);
    CHECK(*a.errors == *b.errors);
    CHECK(a.meta.rng_algorithm == std::string(RandomStream::algorithm));
  }
  SUBCASE("inconsistent single-class system is flagged, not thrown") {
    LinearSystem s(mat({{1, 0}, {1, 0}, {0, 1}}), vec({1, 2, 0}));
    const auto t = run_rk(s, vec({0, 0}), 500, RowDistribution::uniform(3), 1);
    CHECK(t.meta.residual_not_vanishing);
    CHECK_FALSE(t.errors);
  }
}
