#include <algorithm>
#include <cmath>

#include "rili/core/errors.hpp"
#include "rili/envs/environment.hpp"

namespace rili::envs {

namespace {

EnvSpec driving_spec(const DrivingGeometry& g) {
  if (g.horizon < 1 || g.lanes < 3 || !(g.max_lateral > 0.0) || g.merge_steps < 1) {
    throw ConfigError("invalid driving geometry");
  }
  EnvSpec s;
  s.kind = EnvKind::kDriving;
  s.state_dim = 2;
  s.action_dim = 1;
  s.horizon = g.horizon;
  s.action_low = Vector::Constant(1, -g.max_lateral);
  s.action_high = Vector::Constant(1, g.max_lateral);
  s.reward_scale = default_reward_scale(EnvKind::kDriving);
  return s;
}

}  // namespace

DrivingEnv::DrivingEnv(DrivingGeometry g) : Environment(driving_spec(g)), g_(g) {}

double DrivingEnv::partner_y(int steps, int target_lane, const DrivingGeometry& g) {
  const double start = g.start_lane();
  // First step count at which the gap has closed to the trigger distance.
  int trigger = -1;
  for (int k = 0; k <= steps; ++k) {
    if (kinematics::driving_partner_x(k, g) - kinematics::driving_ego_x(k, g) <= g.merge_trigger) {
      trigger = k;
      break;
    }
  }
  if (trigger < 0) return start;
  const double frac = std::min(1.0, static_cast<double>(steps - trigger + 1) / g.merge_steps);
  return start + (target_lane - start) * frac;
}

void DrivingEnv::check(const TrueStrategy& strategy) const {
  const auto* l = std::get_if<LaneIndex>(&strategy);
  if (l == nullptr) throw StructuralError("driving environment needs a LaneIndex, got " + describe(strategy));
  if (l->lane < 0 || l->lane >= g_.lanes) throw StructuralError("lane index out of range");
}

Vector DrivingEnv::observe() const {
  Vector o(2);
  o << kinematics::driving_ego_x(t(), g_) / (g_.ego_speed * g_.horizon), y_;
  return o;
}

Vector DrivingEnv::do_reset(const TrueStrategy& strategy) {
  target_lane_ = std::get<LaneIndex>(strategy).lane;
  y_ = g_.start_lane();
  collided_ = false;
  return observe();
}

std::pair<Vector, double> DrivingEnv::do_step(const Vector& action) {
  const double y_next = kinematics::driving_lateral_move(y_, action[0], g_);
  const double dy = y_next - y_;
  y_ = y_next;
  double reward = -std::sqrt(g_.ego_speed * g_.ego_speed + dy * dy);
  const int k = t() + 1;
  const double dx = kinematics::driving_ego_x(k, g_) - kinematics::driving_partner_x(k, g_);
  const double dyp = y_ - partner_y(k, target_lane_, g_);
  if (!collided_ && std::abs(dx) < g_.car_length && std::abs(dyp) < g_.car_width) {
    collided_ = true;
    reward -= g_.collision_penalty;
  }
  // observe() reads t(), which the base class increments after this call.
  Vector o(2);
  o << kinematics::driving_ego_x(k, g_) / (g_.ego_speed * g_.horizon), y_;
  return {o, reward};
}

}  // namespace rili::envs
