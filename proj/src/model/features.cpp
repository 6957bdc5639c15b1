#include "rili/model/features.hpp"

#include "rili/core/errors.hpp"

namespace rili::model {

Featurizer::Featurizer(ExperienceShape shape, Vector action_low, Vector action_high, double reward_scale)
    : shape_(shape), low_(std::move(action_low)), high_(std::move(action_high)), reward_scale_(reward_scale) {
  if (low_.size() != shape_.action_dim || high_.size() != shape_.action_dim) {
    throw StructuralError("action bounds do not match the action dimension");
  }
  if (!((high_ - low_).array() > 0.0).all()) throw ConfigError("action bounds must satisfy low < high");
  if (!(reward_scale_ > 0.0)) throw ConfigError("reward scale must be positive");
}

Vector Featurizer::normalize_action(const Vector& action) const {
  return (2.0 * (action - low_).array() / (high_ - low_).array() - 1.0).matrix();
}

Vector Featurizer::denormalize_action(const Vector& unit) const {
  return (low_.array() + (unit.array() + 1.0) * 0.5 * (high_ - low_).array()).matrix();
}

void Featurizer::write_step(const Vector& state, const Vector& action, float* out) const {
  if (state.size() != shape_.state_dim || action.size() != shape_.action_dim) {
    throw StructuralError("step does not match the experience shape");
  }
  for (int i = 0; i < shape_.state_dim; ++i) out[i] = static_cast<float>(state[i]);
  const Vector u = normalize_action(action);
  for (int i = 0; i < shape_.action_dim; ++i) out[shape_.state_dim + i] = static_cast<float>(u[i]);
}

VectorF Featurizer::experience_features(const InteractionExperience& exp) const {
  VectorF f = VectorF::Zero(encoder_input_dim());
  if (exp.padding) {
    f[shape_.flat_size()] = 1.0f;
    return f;
  }
  exp.check_shape(shape_);
  const int w = shape_.step_width();
  for (int t = 0; t < shape_.horizon; ++t) {
    const auto& s = exp.steps[static_cast<std::size_t>(t)];
    write_step(s.state, s.action, f.data() + t * w);
    f[t * w + w - 1] = static_cast<float>(s.reward * reward_scale_);
  }
  return f;
}

MatrixF Featurizer::window_features(const HistoryWindow& window) const {
  if (!(window.shape() == shape_)) throw StructuralError("history window shape differs from the featurizer's");
  MatrixF m(encoder_input_dim(), window.capacity());
  Eigen::Index c = 0;
  for (const auto& e : window.entries()) m.col(c++) = experience_features(e);
  return m;
}

MatrixF Featurizer::trajectory_features(const InteractionTrajectory& traj) const {
  if (static_cast<int>(traj.size()) != shape_.horizon) throw StructuralError("trajectory length differs from H");
  MatrixF m(step_dim(), shape_.horizon);
  for (int t = 0; t < shape_.horizon; ++t) {
    const auto& p = traj.points[static_cast<std::size_t>(t)];
    write_step(p.state, p.action, m.col(t).data());
  }
  return m;
}

VectorF Featurizer::scaled_rewards(const InteractionExperience& exp) const {
  exp.check_shape(shape_);
  VectorF r(shape_.horizon);
  for (int t = 0; t < shape_.horizon; ++t) r[t] = static_cast<float>(exp.steps[static_cast<std::size_t>(t)].reward * reward_scale_);
  return r;
}

}  // namespace rili::model
