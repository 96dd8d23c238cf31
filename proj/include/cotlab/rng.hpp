#pragma once

#include <cstdint>
#include <span>

namespace cotlab {

// splitmix64 generator. Small, fast, and good enough for simulation work at
// this scale; most importantly it supports cheap keyed substreams, so
// parallel tasks can draw from (seed, task-index) streams whose output does
// not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Derived stream for task `index`. The combined (state, index) value is
  // passed through the output mixer, so substreams of the same generator
  // start far apart in the state space.
  Rng substream(std::uint64_t index) const {
    return Rng(mix(state_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  // Index of a category drawn from `probs` (need not be exactly normalized;
  // the last positive entry absorbs rounding slack).
  int next_categorical(std::span<const double> probs) {
    double u = next_unit();
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      last_positive = static_cast<int>(i);
      u -= probs[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return last_positive;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cotlab
