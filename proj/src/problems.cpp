#include "mrk/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mrk/random.hpp"

namespace mrk {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (classes.empty()) throw std::invalid_argument("generator spec has no classes");
  if (dimension == 0) throw std::invalid_argument("generator dimension must be positive");
  if (!(solution_spread > 0.0)) throw std::invalid_argument("solution spread must be positive");
  for (std::size_t j = 0; j < classes.size(); ++j) {
    const auto& c = classes[j];
    std::ostringstream os;
    if (c.rows < dimension) {
      os << "class " << j << " has " << c.rows << " rows, fewer than the dimension " << dimension;
      throw std::invalid_argument(os.str());
    }
    if (!(c.entry_spread > 0.0)) {
      os << "class " << j << " entry spread must be positive";
      throw std::invalid_argument(os.str());
    }
  }
}

LinearSystem generate_synthetic(const GeneratorSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dimension);
  std::size_t m = 0;
  for (const auto& c : spec.classes) m += c.rows;

  Matrix matrix(static_cast<Eigen::Index>(m), d);
  Vector rhs(static_cast<Eigen::Index>(m));
  std::vector<std::size_t> labels(m);
  std::vector<Vector> solutions;
  std::vector<std::size_t> counts;

  RandomStream rng(spec.seed, Stream::generator);
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < spec.classes.size(); ++j) {
    const auto& c = spec.classes[j];
    const auto first = row;
    for (std::size_t r = 0; r < c.rows; ++r, ++row) {
      for (Eigen::Index col = 0; col < d; ++col) matrix(row, col) = rng.normal(c.entry_mean, c.entry_spread);
      labels[static_cast<std::size_t>(row)] = j;
    }
    Vector x(d);
    for (Eigen::Index col = 0; col < d; ++col) x(col) = rng.normal(0.0, spec.solution_spread);
    const auto block = static_cast<Eigen::Index>(c.rows);
    rhs.segment(first, block) = matrix.middleRows(first, block) * x;
    solutions.push_back(std::move(x));
    counts.push_back(c.rows);
  }

  LinearSystem system(std::move(matrix), std::move(rhs), std::move(labels), std::move(solutions),
                      std::move(counts));
  if (!spec.shuffle) return system;
  return shuffle_rows(system, spec.seed).first;
}

Matrix load_delimited_dataset(const std::filesystem::path& path, const std::string& missing_token,
                              Imputation impute) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset file '" + path.string() + "'");

  const double missing = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() < 2) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": expected an identifier and at least one value";
      throw std::runtime_error(os.str());
    }
    if (rows.empty()) {
      width = cells.size() - 1;
    } else if (cells.size() - 1 != width) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": " << cells.size() << " columns, expected "
         << width + 1;
      throw std::runtime_error(os.str());
    }
    std::vector<double> values(width);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto cell = cells[c];
      if (cell == missing_token) {
        values[c - 1] = missing;
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": column " << c + 1 << " value '" << cell
           << "' is not numeric";
        throw std::runtime_error(os.str());
      }
      values[c - 1] = v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error("dataset file '" + path.string() + "' has no rows");

  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<double> present;
    for (const auto& r : rows) {
      if (!std::isnan(r[c])) present.push_back(r[c]);
    }
    double fill = 0.0;
    const bool any_missing = present.size() != rows.size();
    if (any_missing) {
      if (present.empty()) {
        std::ostringstream os;
        os << path.string() << ": column " << c + 2 << " has no values to impute from";
        throw std::runtime_error(os.str());
      }
      if (impute == Imputation::mean) {
        fill = std::accumulate(present.begin(), present.end(), 0.0) / static_cast<double>(present.size());
      } else {
        std::sort(present.begin(), present.end());
        const std::size_t n = present.size();
        fill = n % 2 == 1 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
      }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          std::isnan(rows[r][c]) ? fill : rows[r][c];
    }
  }
  return out;
}

LinearSystem build_planted_from_matrix(const Matrix& data, const std::vector<std::size_t>& split_sizes,
                                       std::uint64_t solution_seed) {
  const auto total = std::accumulate(split_sizes.begin(), split_sizes.end(), std::size_t{0});
  if (split_sizes.empty() || total != static_cast<std::size_t>(data.rows())) {
    std::ostringstream os;
    os << "split sizes sum to " << total << " but the matrix has " << data.rows() << " rows";
    throw std::invalid_argument(os.str());
  }
  const auto d = data.cols();
  RandomStream rng(solution_seed, Stream::planted_solutions);
  Vector rhs(data.rows());
  std::vector<std::size_t> labels(static_cast<std::size_t>(data.rows()));
  std::vector<Vector> solutions;
  Eigen::Index first = 0;
  for (std::size_t j = 0; j < split_sizes.size(); ++j) {
    const auto block = static_cast<Eigen::Index>(split_sizes[j]);
    std::ostringstream os;
    if (block < d) {
      os << "class " << j << " has " << block << " rows, fewer than the dimension " << d;
      throw std::invalid_argument(os.str());
    }
    const Matrix sub = data.middleRows(first, block);
    if (const auto rank = numerical_rank(sub); rank < static_cast<std::size_t>(d)) {
      os << "class " << j << " is rank deficient (rank " << rank << " < " << d << ")";
      throw std::invalid_argument(os.str());
    }
    Vector x(d);
    for (Eigen::Index c = 0; c < d; ++c) x(c) = rng.normal();
    rhs.segment(first, block) = sub * x;
    std::fill(labels.begin() + first, labels.begin() + first + block, j);
    solutions.push_back(std::move(x));
    first += block;
  }
  return LinearSystem(data, std::move(rhs), std::move(labels), std::move(solutions), split_sizes);
}

LinearSystem permute_rows(const LinearSystem& system, const std::vector<std::size_t>& order) {
  const std::size_t m = system.rows();
  if (order.size() != m) throw std::invalid_argument("row order has the wrong length");
  Matrix matrix(system.matrix().rows(), system.matrix().cols());
  Vector rhs(system.rhs().size());
  std::optional<std::vector<std::size_t>> labels;
  if (system.labels()) labels.emplace(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto src = order[r];
    matrix.row(static_cast<Eigen::Index>(r)) = system.row(src);
    rhs(static_cast<Eigen::Index>(r)) = system.rhs(src);
    if (labels) (*labels)[r] = (*system.labels())[src];
  }
  return LinearSystem(std::move(matrix), std::move(rhs), std::move(labels), system.solutions(),
                      system.class_counts());
}

std::pair<LinearSystem, ShuffleRecord> shuffle_rows(const LinearSystem& system, std::uint64_t seed) {
  const std::size_t m = system.rows();
  ShuffleRecord record;
  record.permutation.resize(m);
  std::iota(record.permutation.begin(), record.permutation.end(), std::size_t{0});
  RandomStream rng(seed, Stream::shuffle);
  for (std::size_t i = m - 1; i > 0; --i) {
    const auto j = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1)), i);
    std::swap(record.permutation[i], record.permutation[j]);
  }
  record.inverse.resize(m);
  for (std::size_t r = 0; r < m; ++r) record.inverse[record.permutation[r]] = r;
  return {permute_rows(system, record.permutation), std::move(record)};
}

}  // namespace mrk
