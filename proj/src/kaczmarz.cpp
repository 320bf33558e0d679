#include "mrk/kaczmarz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mrk {

std::string_view to_string(SamplingKind kind) {
  return kind == SamplingKind::uniform ? "uniform" : "sqnorm";
}

SamplingKind parse_sampling_kind(std::string_view text) {
  if (text == "uniform") return SamplingKind::uniform;
  if (text == "sqnorm" || text == "squared-row-norm") return SamplingKind::squared_row_norm;
  throw std::invalid_argument("unknown sampling distribution '" + std::string(text) +
                              "' (expected uniform or sqnorm)");
}

RowDistribution::RowDistribution(SamplingKind kind, std::vector<double> weights)
    : kind_(kind), weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("row distribution over zero rows");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("invalid row weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("row weights sum to zero");
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] /= total;
    acc += weights_[i];
    cumulative_[i] = acc;
  }
}

RowDistribution RowDistribution::uniform(std::size_t rows) {
  return RowDistribution(SamplingKind::uniform, std::vector<double>(rows, 1.0));
}

RowDistribution RowDistribution::squared_row_norm(const LinearSystem& system) {
  return RowDistribution(SamplingKind::squared_row_norm, system.row_norms_sq());
}

RowDistribution RowDistribution::make(SamplingKind kind, const LinearSystem& system) {
  return kind == SamplingKind::uniform ? uniform(system.rows()) : squared_row_norm(system);
}

std::size_t RowDistribution::index_for(double u) const {
  const std::size_t m = weights_.size();
  if (kind_ == SamplingKind::uniform) {
    return std::min(static_cast<std::size_t>(u * static_cast<double>(m)), m - 1);
  }
  // Scale by the last cumulative entry so rounding in the running sum can
  // never leave u beyond the table.
  const double target = u * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), m - 1);
}

double residual_coefficient(const Eigen::Ref<const Eigen::RowVectorXd>& row, double b,
                            const Vector& x, double row_norm_sq) {
  if (!(row_norm_sq > 0.0)) throw std::domain_error("residual coefficient of a zero-norm row");
  if (row.size() != x.size()) throw std::domain_error("row and iterate dimensions differ");
  return (row.dot(x) - b) / row_norm_sq;
}

double residual_coefficient(const Eigen::Ref<const Eigen::RowVectorXd>& row, double b,
                            const Vector& x) {
  return residual_coefficient(row, b, x, row.squaredNorm());
}

Vector kaczmarz_update(const Vector& x, const Eigen::Ref<const Eigen::RowVectorXd>& row,
                       double b) {
  const double c = residual_coefficient(row, b, x);
  return x - c * row.transpose();
}

std::size_t sample_row(const RowDistribution& dist, RandomStream& rng) {
  return dist.index_for(rng.uniform());
}

Trace run_rk(const LinearSystem& system, const Vector& x0, std::size_t iterations,
             const RowDistribution& dist, std::uint64_t seed, bool record_steps) {
  if (static_cast<std::size_t>(x0.size()) != system.cols()) {
    throw std::invalid_argument("initial iterate dimension does not match the system");
  }
  if (dist.size() != system.rows()) {
    throw std::invalid_argument("row distribution size does not match the system");
  }

  Trace trace;
  auto& meta = trace.meta;
  meta.method = "rk";
  meta.seed = seed;
  meta.rng_algorithm = std::string(RandomStream::algorithm);
  meta.iterations = iterations;
  meta.distribution = std::string(to_string(dist.kind()));
  meta.system = system.describe();
  meta.rows = system.rows();
  meta.cols = system.cols();
  meta.iterate_count = 1;

  const Vector* solution = nullptr;
  if (system.solutions() && system.solutions()->size() == 1) {
    solution = &system.solutions()->front();
    meta.solution_count = 1;
    meta.labeling = {0};
  }

  RandomStream rng(seed, Stream::rows);
  Vector x = x0;

  if (solution) {
    const double e0 = (x - *solution).squaredNorm();
    trace.initial_errors = {e0};
    trace.initial_matched_error = e0;
    trace.errors.emplace(1);
    trace.errors->reserve(iterations);
    trace.matched_errors.reserve(iterations);
  }
  if (record_steps) trace.steps.reserve(iterations);

  for (std::size_t k = 0; k < iterations; ++k) {
    const std::size_t i = sample_row(dist, rng);
    const auto row = system.row(i);
    const double c = residual_coefficient(row, system.rhs(i), x, system.row_norm_sq(i));
    x -= c * row.transpose();

    if (record_steps) {
      trace.steps.push_back(StepRecord{k, i, 0, 0, {c},
                                       std::abs(c) * std::sqrt(system.row_norm_sq(i)), false});
    }
    if (solution) {
      const double e = (x - *solution).squaredNorm();
      trace.errors->push_back(std::span<const double>(&e, 1));
      trace.matched_errors.push_back(e);
    }
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < system.rows(); ++i) {
    const double b = system.rhs(i);
    worst = std::max(worst, std::abs(system.row(i).dot(x) - b) / (1.0 + std::abs(b)));
  }
  meta.final_max_residual = worst;
  // Only meaningful once the run has had time to converge; a consistent
  // system drives every residual to rounding level.
  meta.residual_not_vanishing = iterations > 0 && worst > 1e-6;

  trace.final_iterates = {std::move(x)};
  return trace;
}

}  // namespace mrk
