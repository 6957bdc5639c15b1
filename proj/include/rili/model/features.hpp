#pragma once

#include <Eigen/Dense>

#include "rili/core/history.hpp"
#include "rili/core/types.hpp"

namespace rili::model {

using MatrixF = Eigen::MatrixXf;
using VectorF = Eigen::VectorXf;

// Turns recorded interactions into network inputs: actions are mapped to
// [-1, 1] using the action box, rewards multiplied by reward_scale.
class Featurizer {
 public:
  Featurizer() = default;
  Featurizer(ExperienceShape shape, Vector action_low, Vector action_high, double reward_scale);

  const ExperienceShape& shape() const { return shape_; }
  double reward_scale() const { return reward_scale_; }
  const Vector& action_low() const { return low_; }
  const Vector& action_high() const { return high_; }

  int step_dim() const { return shape_.state_dim + shape_.action_dim; }
  int encoder_input_dim() const { return shape_.flat_size() + 1; }

  Vector normalize_action(const Vector& action) const;
  Vector denormalize_action(const Vector& unit) const;

  // state | normalized action
  void write_step(const Vector& state, const Vector& action, float* out) const;
  // One encoder sequence element: per step state | action | scaled reward,
  // then the padding flag.
  VectorF experience_features(const InteractionExperience& exp) const;
  // encoder_input_dim x k, oldest first.
  MatrixF window_features(const HistoryWindow& window) const;
  // step_dim x H decoder inputs.
  MatrixF trajectory_features(const InteractionTrajectory& traj) const;
  VectorF scaled_rewards(const InteractionExperience& exp) const;

 private:
  ExperienceShape shape_;
  Vector low_, high_;
  double reward_scale_ = 1.0;
};

}  // namespace rili::model
