#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace rili {

// Portable seeded generator: xoshiro256** (Blackman & Vigna) with the state
// expanded from the 64-bit seed by splitmix64. Every derived draw below is
// built from next_u64() with integer arithmetic or IEEE-exact operations, so a
// given seed produces the same stream on every conforming platform (normal()
// additionally relies on std::log/std::sqrt).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p);
  // Standard normal via the Marsaglia polar method (pairs are cached).
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Independent child stream; deterministic in (seed, stream_id).
  SeededRng fork(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace rili
