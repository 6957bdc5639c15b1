#include "rili/core/history.hpp"

#include "rili/core/errors.hpp"

namespace rili {

HistoryWindow::HistoryWindow(int k, const ExperienceShape& shape) : k_(k), shape_(shape) {
  if (k < 1) throw ContractError("history length must be at least 1");
  for (int i = 0; i < k; ++i) window_.push_back(zero_experience(shape_));
}

int HistoryWindow::real_count() const {
  int n = 0;
  for (const auto& e : window_) n += e.padding ? 0 : 1;
  return n;
}

void HistoryWindow::push(InteractionExperience exp) {
  if (last_index_ && exp.index != *last_index_ + 1) {
    throw SequencingError("history expects interaction " + std::to_string(*last_index_ + 1) +
                          ", got " + std::to_string(exp.index));
  }
  exp.check_shape(shape_);
  exp.padding = false;
  last_index_ = exp.index;
  window_.pop_front();
  window_.push_back(std::move(exp));
}

HistoryWindow HistoryWindow::pushed(InteractionExperience exp) const {
  HistoryWindow next = *this;
  next.push(std::move(exp));
  return next;
}

std::vector<Vector> HistoryWindow::encoder_inputs(double reward_scale) const {
  std::vector<Vector> inputs;
  inputs.reserve(window_.size());
  const int width = shape_.step_width();
  for (const auto& e : window_) {
    Vector v(encoder_input_dim());
    v.head(shape_.flat_size()) = flatten_experience(e, shape_);
    for (int t = 0; t < shape_.horizon; ++t) v[t * width + width - 1] *= reward_scale;
    v[shape_.flat_size()] = e.padding ? 1.0 : 0.0;
    inputs.push_back(std::move(v));
  }
  return inputs;
}

}  // namespace rili
