#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mrk {

/// Well-known sub-stream identifiers. Splitting a seed into independent
/// streams keeps the row sequence of a run independent of how many swap
/// variates were consumed.
enum class Stream : std::uint32_t {
  rows = 0,
  swaps = 1,
  initial_iterates = 2,
  generator = 3,
  shuffle = 4,
  planted_solutions = 5,
};

/// Seedable, splittable pseudorandom stream.
///
/// Each (seed, stream) pair seeds an independent mt19937_64 through
/// std::seed_seq; both algorithms are fully specified by the standard, so a
/// given pair yields the same bits on every conforming implementation.
/// uniform() is built from the top 53 bits of one engine output and is
/// therefore portable too; normal() goes through std::normal_distribution
/// and is only reproducible within one standard library.
class RandomStream {
 public:
  static constexpr std::string_view algorithm =
      "mt19937_64/seed_seq(seed_lo,seed_hi,stream)/u53";

  explicit RandomStream(std::uint64_t seed, Stream stream = Stream::rows)
      : RandomStream(seed, static_cast<std::uint32_t>(stream)) {}

  RandomStream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    engine_.seed(seq);
  }

  /// Uniform variate in [0, 1). Consumes exactly one engine output.
  double uniform() {
    ++uniform_draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return mean + stddev * normal_(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  std::uint64_t uniform_draws() const { return uniform_draws_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t uniform_draws_ = 0;
};

}  // namespace mrk
