#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace m2s {

/// Counter-based generator: output n is a SplitMix64 finalizer applied to
/// seed + n * golden-gamma. The stream depends only on (seed, counter), so it
/// is identical on every platform and trivially checkpointable.
class Rng {
 public:
  struct State {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
    bool operator==(const State&) const = default;
  };

  explicit Rng(std::uint64_t seed = 0) : state_{seed, 0} {}
  explicit Rng(State state) : state_(state) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  /// Independent stream derived from this generator's seed and a stream tag.
  Rng fork(std::uint64_t tag) const;

  const State& state() const { return state_; }

 private:
  State state_;
};

}  // namespace m2s
