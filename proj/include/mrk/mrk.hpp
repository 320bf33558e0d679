#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "mrk/kaczmarz.hpp"
#include "mrk/linear_system.hpp"
#include "mrk/random.hpp"
#include "mrk/trace.hpp"

namespace mrk {

/// The n+1 regressor iterates, one per latent class.
class IterateSet {
 public:
  IterateSet() = default;
  explicit IterateSet(std::vector<Vector> vectors);

  /// n+1 vectors with i.i.d. standard normal entries drawn from `rng`.
  static IterateSet standard_normal(std::size_t count, std::size_t dimension, RandomStream& rng);
  /// `count` copies of `x`.
  static IterateSet replicated(std::size_t count, const Vector& x);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dimension() const { return vectors_.empty() ? 0 : static_cast<std::size_t>(vectors_.front().size()); }

  Vector& operator[](std::size_t i) { return vectors_[i]; }
  const Vector& operator[](std::size_t i) const { return vectors_[i]; }
  const std::vector<Vector>& vectors() const { return vectors_; }

  bool operator==(const IterateSet& other) const;

 private:
  std::vector<Vector> vectors_;
};

enum class TieBreak { lowest_index };

struct MrkConfig {
  double swap_probability = 0.0;
  std::size_t iterations = 0;
  SamplingKind distribution = SamplingKind::uniform;
  std::uint64_t seed = 0;
  TieBreak tie_break = TieBreak::lowest_index;
  /// Keep one StepRecord per step. Experiments that only need error curves
  /// switch this off.
  bool record_steps = true;
  /// Keep the coordinates of every iterate after every step.
  bool record_trajectory = false;

  void validate() const;
};

/// Target of the update: s with probability 1 − r, otherwise uniform over
/// {0..n}. Consumes one variate, plus a second when the swap branch fires.
std::pair<std::size_t, bool> select_target(std::size_t s, std::size_t n_plus_1, double r,
                                           RandomStream& rng);

/// One MRK step on a given row, in place. Only iterate t_k moves, by
/// |c_s|·sgn(c_t)·rowᵀ; every other iterate is left bitwise untouched.
StepRecord mrk_step(IterateSet& iterates, const LinearSystem& system, std::size_t row_index,
                    double r, RandomStream& swap_rng);

/// Value-returning form of mrk_step.
std::pair<IterateSet, StepRecord> mrk_step(const IterateSet& iterates, const LinearSystem& system,
                                           std::size_t row_index, double r,
                                           RandomStream& swap_rng);

/// Runs N steps of Multi-Randomized Kaczmarz.
///
/// Row indices come from the Stream::rows sub-stream of the seed (one variate
/// per step) and the swap decisions from Stream::swaps (one variate per step,
/// two when the swap fires). With one iterate the row sequence, and so the
/// whole error history, matches run_rk for the same seed.
///
/// When the system carries solutions (one per iterate), per-iterate squared
/// errors are recorded every step and relabeled with the permutation that
/// minimizes the total error at the final iteration.
Trace run_mrk(const LinearSystem& system, const IterateSet& inits, const MrkConfig& config);

}  // namespace mrk
