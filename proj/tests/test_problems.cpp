#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <tuple>

#include "mrk/analysis.hpp"
#include "mrk/problems.hpp"

using namespace mrk;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const auto dir = fs::temp_directory_path() / "mrk_test_problems";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << contents;
  return path;
}

std::size_t matrix_hash(const Matrix& m) {
  std::size_t h = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    h = h * 1099511628211ull ^ std::hash<double>{}(m.data()[i]);
  }
  return h;
}

GeneratorSpec fig_spec(std::size_t rows, std::size_t d, double m0, double m1, double spread,
                       std::uint64_t seed) {
  GeneratorSpec spec;
  spec.classes = {{rows, m0, spread}, {rows, m1, spread}};
  spec.dimension = d;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("generate_synthetic") {
  SUBCASE("single class is consistent") {
    GeneratorSpec spec;
    spec.classes = {{3, 0.0, 1.0}};
    spec.dimension = 3;
    spec.seed = 4;
    const auto s = generate_synthetic(spec);
    CHECK(std::all_of(s.labels()->begin(), s.labels()->end(), [](auto l) { return l == 0; }));
    const Vector b = s.matrix() * s.solutions()->front();
    CHECK(b == s.rhs());
  }
  SUBCASE("fig1 spec gives a 20-row stacked system") {
    const auto s = generate_synthetic(fig_spec(10, 2, 0.8, -0.8, 0.3, 1));
    CHECK(s.rows() == 20);
    CHECK(s.cols() == 2);
    CHECK(*s.class_counts() == std::vector<std::size_t>{10, 10});
    // Class means separate as requested.
    CHECK(s.class_matrix(0).mean() > 0.4);
    CHECK(s.class_matrix(1).mean() < -0.4);
  }
  SUBCASE("fig2 spec: 2000 rows, both classes rank 10") {
    const auto s = generate_synthetic(fig_spec(1000, 10, 0.0, 0.0, 1.0, 2));
    CHECK(s.rows() == 2000);
    for (const auto& report : check_full_rank(s)) {
      CHECK(report.rank == 10);
      CHECK(report.full_rank);
    }
  }
  SUBCASE("reproducible per seed, distinct across seeds") {
    auto spec = fig_spec(30, 4, 0.0, 0.0, 1.0, 10);
    spec.shuffle = true;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.rhs() == b.rhs());
    CHECK(*a.labels() == *b.labels());
    spec.seed = 11;
    const auto c = generate_synthetic(spec);
    CHECK(matrix_hash(a.matrix()) != matrix_hash(c.matrix()));
  }
  SUBCASE("degenerate specs are rejected") {
    CHECK_THROWS(generate_synthetic(fig_spec(2, 3, 0, 0, 1, 1)));
    CHECK_THROWS(generate_synthetic(fig_spec(5, 3, 0, 0, 0.0, 1)));
    GeneratorSpec empty;
    empty.dimension = 2;
    CHECK_THROWS(generate_synthetic(empty));
  }
}

TEST_CASE("shuffle_rows") {
  const auto s = generate_synthetic(fig_spec(15, 3, 0.0, 1.0, 1.0, 3));
  const auto [shuffled, record] = shuffle_rows(s, 99);

  std::vector<std::size_t> sorted = record.permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  for (std::size_t r = 0; r < record.permutation.size(); ++r) {
    CHECK(record.inverse[record.permutation[r]] == r);
  }

  // Multiset of (row, b, label) triples is preserved.
  using Triple = std::tuple<std::vector<double>, double, std::size_t>;
  auto triples = [](const LinearSystem& sys) {
    std::vector<Triple> out;
    for (std::size_t i = 0; i < sys.rows(); ++i) {
      const auto row = sys.row(i);
      out.emplace_back(std::vector<double>(row.data(), row.data() + row.size()), sys.rhs(i),
                       (*sys.labels())[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(triples(s) == triples(shuffled));

  // Per-class blocks match up to row order.
  for (std::size_t label = 0; label < 2; ++label) {
    auto rows_of = [](const Matrix& m) {
      std::vector<std::vector<double>> out;
      for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).data(), m.row(i).data() + m.cols());
      std::sort(out.begin(), out.end());
      return out;
    };
    CHECK(rows_of(s.class_matrix(label)) == rows_of(shuffled.class_matrix(label)));
  }

  // Inverse permutation restores the original bitwise.
  const auto restored = permute_rows(shuffled, record.inverse);
  CHECK(restored.matrix() == s.matrix());
  CHECK(restored.rhs() == s.rhs());
  CHECK(*restored.labels() == *s.labels());

  // Identity permutation leaves the system unchanged.
  std::vector<std::size_t> identity(s.rows());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  CHECK(permute_rows(s, identity).matrix() == s.matrix());
}

TEST_CASE("load_delimited_dataset") {
  SUBCASE("verbatim parse without missing cells") {
    const auto p = temp_file("plain.data", "101,1,2.5,3\n102,4,5,6e1\n");
    const auto m = load_delimited_dataset(p);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    CHECK(m(0, 1) == 2.5);
    CHECK(m(1, 2) == 60.0);
  }
  SUBCASE("missing cell imputed with the column median") {
    const auto p = temp_file("missing.data", "1,1,9\n2,3,9\n3,?,9\n4,5,9\n");
    const auto m = load_delimited_dataset(p);
    CHECK(m(2, 0) == 3.0);
    CHECK(m.rows() == 4);
    const auto mean = load_delimited_dataset(p, "?", Imputation::mean);
    CHECK(mean(2, 0) == 3.0);
  }
  SUBCASE("errors name the file and position") {
    CHECK_THROWS_WITH_AS(load_delimited_dataset("/nonexistent/wisconsin.data"),
                         doctest::Contains("/nonexistent/wisconsin.data"), std::runtime_error);
    const auto bad = temp_file("bad.data", "1,2,3\n2,x,4\n");
    CHECK_THROWS_WITH_AS(load_delimited_dataset(bad), doctest::Contains(":2: column 2"),
                         std::runtime_error);
    const auto ragged = temp_file("ragged.data", "1,2,3\n2,4\n");
    CHECK_THROWS_AS(load_delimited_dataset(ragged), std::runtime_error);
  }
  SUBCASE("699-row file in the Wisconsin layout") {
    std::string text;
    for (int i = 0; i < 699; ++i) {
      text += std::to_string(1000 + i);
      for (int c = 0; c < 9; ++c) text += "," + ((i % 50 == 7 && c == 5) ? std::string("?") : std::to_string(1 + (i * 7 + c * 3) % 10));
      text += i % 3 ? ",2\n" : ",4\n";
    }
    const auto m = load_delimited_dataset(temp_file("wisc.data", text));
    CHECK(m.rows() == 699);
    CHECK(m.cols() == 10);
  }
}

TEST_CASE("build_planted_from_matrix") {
  GeneratorSpec spec;
  spec.classes = {{30, 0.0, 1.0}};
  spec.dimension = 4;
  spec.seed = 8;
  const Matrix data = generate_synthetic(spec).matrix();

  SUBCASE("split into two classes") {
    const auto s = build_planted_from_matrix(data, {12, 18}, 5);
    CHECK(*s.class_counts() == std::vector<std::size_t>{12, 18});
    CHECK((*s.labels())[11] == 0);
    CHECK((*s.labels())[12] == 1);
    // b recomputed from labels and solutions.
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const double b = s.row(i).dot((*s.solutions())[(*s.labels())[i]]);
      CHECK(std::abs(b - s.rhs(i)) <= 1e-12 * (1.0 + std::abs(b)));
    }
  }
  SUBCASE("one class is a consistent single system") {
    const auto s = build_planted_from_matrix(data, {30}, 5);
    CHECK(s.class_count() == 1);
  }
  SUBCASE("rank-deficient block is named") {
    Matrix copies = data;
    for (Eigen::Index i = 0; i < 10; ++i) copies.row(20 + i) = copies.row(20);
    CHECK_THROWS_WITH_AS(build_planted_from_matrix(copies, {20, 10}, 1), doctest::Contains("class 1"),
                         std::invalid_argument);
  }
  SUBCASE("split sizes must cover the rows") {
    CHECK_THROWS(build_planted_from_matrix(data, {10, 10}, 1));
    CHECK_THROWS(build_planted_from_matrix(data, {28, 2}, 1));
  }
}
