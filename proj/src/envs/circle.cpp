#include <cmath>

#include "rili/core/errors.hpp"
#include "rili/envs/environment.hpp"

namespace rili::envs {

namespace {

EnvSpec circle_spec(const CircleGeometry& g) {
  if (g.horizon < 1 || !(g.radius > 0.0) || !(g.max_speed > 0.0)) throw ConfigError("invalid circle geometry");
  EnvSpec s;
  s.kind = EnvKind::kCircle;
  s.state_dim = 2;
  s.action_dim = 2;
  s.horizon = g.horizon;
  s.action_low = Vector::Constant(2, -g.max_speed);
  s.action_high = Vector::Constant(2, g.max_speed);
  s.reward_scale = default_reward_scale(EnvKind::kCircle);
  return s;
}

}  // namespace

CircleEnv::CircleEnv(CircleGeometry g) : Environment(circle_spec(g)), g_(g) {}

void CircleEnv::check(const TrueStrategy& strategy) const {
  const auto* a = std::get_if<CircleAngle>(&strategy);
  if (a == nullptr) throw StructuralError("circle environment needs a CircleAngle, got " + describe(strategy));
  if (!std::isfinite(a->radians)) throw StructuralError("circle angle must be finite");
}

Vector CircleEnv::do_reset(const TrueStrategy& strategy) {
  const double th = std::get<CircleAngle>(strategy).radians;
  partner_ = g_.radius * Eigen::Vector2d(std::cos(th), std::sin(th));
  pos_.setZero();
  return Vector(pos_);
}

std::pair<Vector, double> CircleEnv::do_step(const Vector& action) {
  pos_ = kinematics::circle_move(pos_, action, g_.max_speed);
  const double cost = (pos_ - partner_).norm();
  const bool last = t() + 1 == g_.horizon;
  const double reward = (!g_.terminal_reward || last) ? -cost : 0.0;
  return {Vector(pos_), reward};
}

}  // namespace rili::envs
