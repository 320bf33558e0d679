#include "mrk/mrk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mrk/analysis.hpp"

namespace mrk {

namespace {

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace

IterateSet::IterateSet(std::vector<Vector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw std::invalid_argument("iterate set must hold at least one vector");
  const auto d = vectors_.front().size();
  for (std::size_t i = 1; i < vectors_.size(); ++i) {
    if (vectors_[i].size() != d) {
      std::ostringstream os;
      os << "iterate " << i << " has dimension " << vectors_[i].size() << ", expected " << d;
      throw std::invalid_argument(os.str());
    }
  }
}

IterateSet IterateSet::standard_normal(std::size_t count, std::size_t dimension,
                                       RandomStream& rng) {
  std::vector<Vector> out(count, Vector(static_cast<Eigen::Index>(dimension)));
  for (auto& v : out) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
  }
  return IterateSet(std::move(out));
}

IterateSet IterateSet::replicated(std::size_t count, const Vector& x) {
  return IterateSet(std::vector<Vector>(count, x));
}

bool IterateSet::operator==(const IterateSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (vectors_[i].size() != other.vectors_[i].size() || vectors_[i] != other.vectors_[i]) {
      return false;
    }
  }
  return true;
}

void MrkConfig::validate() const {
  if (!(swap_probability >= 0.0 && swap_probability <= 1.0)) {
    throw std::invalid_argument("swap probability must lie in [0, 1]");
  }
}

std::pair<std::size_t, bool> select_target(std::size_t s, std::size_t n_plus_1, double r,
                                           RandomStream& rng) {
  if (s >= n_plus_1) throw std::invalid_argument("argmin iterate index out of range");
  if (rng.uniform() < r) {
    const auto t = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_plus_1));
    return {std::min(t, n_plus_1 - 1), true};
  }
  return {s, false};
}

StepRecord mrk_step(IterateSet& iterates, const LinearSystem& system, std::size_t row_index,
                    double r, RandomStream& swap_rng) {
  if (row_index >= system.rows()) throw std::out_of_range("row index out of range");
  if (iterates.dimension() != system.cols()) {
    throw std::invalid_argument("iterate dimension does not match the system");
  }

  const auto row = system.row(row_index);
  const double b = system.rhs(row_index);
  const double norm_sq = system.row_norm_sq(row_index);
  const std::size_t count = iterates.size();

  StepRecord rec;
  rec.sampled_row = row_index;
  rec.coefficients.resize(count);
  std::size_t s = 0;
  for (std::size_t i = 0; i < count; ++i) {
    rec.coefficients[i] = residual_coefficient(row, b, iterates[i], norm_sq);
    if (std::abs(rec.coefficients[i]) < std::abs(rec.coefficients[s])) s = i;
  }

  const auto [t, swapped] = select_target(s, count, r, swap_rng);
  const double magnitude = std::abs(rec.coefficients[s]);
  const double step = magnitude * sign(rec.coefficients[t]);
  iterates[t] -= step * row.transpose();

  rec.argmin_iterate = s;
  rec.target_iterate = t;
  rec.swap_triggered = swapped;
  rec.update_magnitude = magnitude * std::sqrt(norm_sq);
  return rec;
}

std::pair<IterateSet, StepRecord> mrk_step(const IterateSet& iterates, const LinearSystem& system,
                                           std::size_t row_index, double r,
                                           RandomStream& swap_rng) {
  IterateSet next = iterates;
  StepRecord rec = mrk_step(next, system, row_index, r, swap_rng);
  return {std::move(next), std::move(rec)};
}

Trace run_mrk(const LinearSystem& system, const IterateSet& inits, const MrkConfig& config) {
  config.validate();
  if (inits.size() == 0) throw std::invalid_argument("no initial iterates");
  if (inits.dimension() != system.cols()) {
    throw std::invalid_argument("initial iterate dimension does not match the system");
  }

  const std::size_t width = inits.size();
  const auto dist = RowDistribution::make(config.distribution, system);

  Trace trace;
  auto& meta = trace.meta;
  meta.method = "mrk";
  meta.seed = config.seed;
  meta.rng_algorithm = std::string(RandomStream::algorithm);
  meta.swap_probability = config.swap_probability;
  meta.iterations = config.iterations;
  meta.distribution = std::string(to_string(config.distribution));
  meta.system = system.describe();
  meta.rows = system.rows();
  meta.cols = system.cols();
  meta.iterate_count = width;
  meta.solution_count = system.solutions() ? system.solutions()->size() : 0;

  const bool track_errors = meta.solution_count == width && width <= kMaxMatchedIterates;
  const auto* solutions = track_errors ? &*system.solutions() : nullptr;
  const auto* labels = system.labels() ? &*system.labels() : nullptr;

  // cost[i·w + j] = ‖x⁽ⁱ⁾ − x*⁽ʲ⁾‖², kept for every step so the final labeling
  // can be applied to the whole history.
  std::vector<double> cost(width * width, 0.0);
  std::vector<double> history;
  auto refresh_cost = [&](const IterateSet& xs, std::size_t i) {
    for (std::size_t j = 0; j < width; ++j) cost[i * width + j] = (xs[i] - (*solutions)[j]).squaredNorm();
  };

  IterateSet iterates = inits;
  if (track_errors) {
    for (std::size_t i = 0; i < width; ++i) refresh_cost(iterates, i);
    history.reserve((config.iterations + 1) * cost.size());
    history.insert(history.end(), cost.begin(), cost.end());
    trace.initial_matched_error = min_assignment_cost(cost, width);
    trace.matched_errors.reserve(config.iterations);
  }
  if (config.record_steps) trace.steps.reserve(config.iterations);
  if (config.record_trajectory) trace.trajectory.reserve(config.iterations);

  // target × row-class tallies of non-swap steps, for the mistake estimate.
  std::vector<std::size_t> tally(width * width, 0);
  std::size_t unswapped = 0;

  RandomStream row_rng(config.seed, Stream::rows);
  RandomStream swap_rng(config.seed, Stream::swaps);
  for (std::size_t k = 0; k < config.iterations; ++k) {
    const std::size_t i = sample_row(dist, row_rng);
    StepRecord rec = mrk_step(iterates, system, i, config.swap_probability, swap_rng);
    rec.step = k;

    if (track_errors) {
      refresh_cost(iterates, rec.target_iterate);
      history.insert(history.end(), cost.begin(), cost.end());
      trace.matched_errors.push_back(min_assignment_cost(cost, width));
      if (labels && !rec.swap_triggered && (*labels)[i] < width) {
        ++tally[rec.target_iterate * width + (*labels)[i]];
        ++unswapped;
      }
    }
    if (config.record_trajectory) trace.trajectory.push_back(iterates.vectors());
    if (config.record_steps) trace.steps.push_back(std::move(rec));
  }

  if (track_errors) {
    meta.labeling = matched_error(cost, width).labeling;
    const auto& labeling = meta.labeling;
    const std::size_t block = width * width;
    auto relabeled = [&](std::size_t k) {
      std::vector<double> row(width);
      for (std::size_t t = 0; t < width; ++t) row[t] = history[k * block + t * width + labeling[t]];
      return row;
    };
    trace.initial_errors = relabeled(0);
    trace.errors.emplace(width);
    trace.errors->reserve(config.iterations);
    for (std::size_t k = 1; k <= config.iterations; ++k) trace.errors->push_back(relabeled(k));

    if (labels && unswapped > 0) {
      std::size_t correct = 0;
      for (std::size_t t = 0; t < width; ++t) correct += tally[t * width + labeling[t]];
      meta.empirical_mistake_rate =
          static_cast<double>(unswapped - correct) / static_cast<double>(unswapped);
    }
  }

  trace.final_iterates = iterates.vectors();
  return trace;
}

}  // namespace mrk
