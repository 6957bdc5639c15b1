#include <cmath>

#include "rili/core/errors.hpp"
#include "rili/envs/environment.hpp"

namespace rili::envs {

namespace {

EnvSpec robot_spec(const RobotGeometry& g) {
  if (g.horizon < 1 || !(g.max_speed > 0.0) || !(g.success_radius > 0.0)) throw ConfigError("invalid robot geometry");
  if (g.bonus_goal < -1 || g.bonus_goal >= static_cast<int>(g.goal_x.size())) {
    throw ConfigError("bonus goal out of range");
  }
  EnvSpec s;
  s.kind = EnvKind::kRobot;
  s.state_dim = 2;
  s.action_dim = 2;
  s.horizon = g.horizon;
  s.action_low = Vector::Constant(2, -g.max_speed);
  s.action_high = Vector::Constant(2, g.max_speed);
  s.reward_scale = default_reward_scale(EnvKind::kRobot);
  return s;
}

}  // namespace

RobotEnv::RobotEnv(RobotGeometry g) : Environment(robot_spec(g)), g_(g) {}

void RobotEnv::check(const TrueStrategy& strategy) const {
  const auto* goal = std::get_if<GoalIndex>(&strategy);
  if (goal == nullptr) throw StructuralError("robot environment needs a GoalIndex, got " + describe(strategy));
  if (goal->goal < 0 || goal->goal >= static_cast<int>(g_.goal_x.size())) {
    throw StructuralError("goal index out of range");
  }
}

Vector RobotEnv::do_reset(const TrueStrategy& strategy) {
  partner_goal_ = std::get<GoalIndex>(strategy).goal;
  ee_ = Eigen::Vector2d(g_.start_x, g_.start_height);
  return Vector(ee_);
}

std::pair<Vector, double> RobotEnv::do_step(const Vector& action) {
  ee_ = kinematics::robot_move(ee_, action, g_);
  const double dist = (ee_ - g_.goal(partner_goal_)).norm();
  double reward = -dist;
  if (t() + 1 == g_.horizon) {
    if (dist <= g_.success_radius) reward += g_.success_reward;
    if (partner_goal_ == g_.bonus_goal) reward += g_.bonus_reward;
  }
  return {Vector(ee_), reward};
}

}  // namespace rili::envs
