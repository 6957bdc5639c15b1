#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/core/types.hpp"
#include "rili/sac/losses.hpp"

namespace rili::sac {

// Everything stored about one interaction. The conditioning vector is either
// fixed (`z`) or recomputed from `window` by the current encoder when sampled.
struct ReplayInteraction {
  Matrix<float> states;   // state_dim x (H + 1), s_0 .. s_H
  Matrix<float> actions;  // action_dim x H, unit box
  Matrix<float> rewards;  // 1 x H, scaled
  Matrix<float> window;   // encoder features (input_dim x k), empty when z is fixed
  Matrix<float> z;        // kLatentDim x 1 used while acting
  // Test-only channel; learning code never reads it.
  std::optional<TrueStrategy> true_strategy;
};

struct TransitionRef {
  std::size_t interaction = 0;
  int step = 0;
};

// Uniform replay over transitions. Every interaction has the same length, so
// sampling an interaction uniformly and then a step uniformly is uniform over
// transitions. Capacity is in transitions; whole interactions are evicted.
class ReplayBuffer {
 public:
  using Encode = std::function<Matrix<float>(const std::vector<Matrix<float>>& slots)>;

  explicit ReplayBuffer(std::size_t capacity = 1000000);

  void add(ReplayInteraction interaction);
  std::size_t interactions() const { return items_.size(); }
  std::size_t transitions() const { return transitions_; }
  std::size_t capacity() const { return capacity_; }
  const ReplayInteraction& at(std::size_t i) const { return items_.at(i); }
  const std::deque<ReplayInteraction>& items() const { return items_; }

  std::vector<TransitionRef> sample(std::size_t n, SeededRng& rng) const;
  // Builds an augmented batch. With `encode`, z is recomputed from each
  // sampled interaction's window; otherwise the stored z is used.
  SacBatch<float> gather(const std::vector<TransitionRef>& refs, const Encode* encode = nullptr) const;

 private:
  std::size_t capacity_;
  std::size_t transitions_ = 0;
  std::deque<ReplayInteraction> items_;
};

}  // namespace rili::sac
