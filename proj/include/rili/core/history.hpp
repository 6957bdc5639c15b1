#pragma once

#include <deque>
#include <optional>

#include "rili/core/types.hpp"

namespace rili {

inline constexpr int kDefaultHistoryLength = 4;

// The k most recent interactions, oldest first. Slots not yet filled hold
// zero experiences flagged as padding.
class HistoryWindow {
 public:
  HistoryWindow(int k, const ExperienceShape& shape);

  int capacity() const { return k_; }
  const ExperienceShape& shape() const { return shape_; }
  const std::deque<InteractionExperience>& entries() const { return window_; }
  int real_count() const;
  std::optional<std::int64_t> last_index() const { return last_index_; }

  // Appends exp, evicting the oldest. Throws SequencingError unless
  // exp.index == last_index + 1 (any index is accepted on an empty window).
  void push(InteractionExperience exp);
  [[nodiscard]] HistoryWindow pushed(InteractionExperience exp) const;

  // One encoder input per slot: flatten(exp) with rewards multiplied by
  // reward_scale, followed by the padding flag.
  std::vector<Vector> encoder_inputs(double reward_scale = 1.0) const;
  int encoder_input_dim() const { return shape_.flat_size() + 1; }

 private:
  int k_;
  ExperienceShape shape_;
  std::deque<InteractionExperience> window_;
  std::optional<std::int64_t> last_index_;
};

}  // namespace rili
