#pragma once

// Geometry shared between the environments and the scripted partners that
// reason about where the ego agent ended up.

#include <algorithm>
#include <array>
#include <cmath>

#include "rili/core/types.hpp"

namespace rili {

struct CircleGeometry {
  double radius = 1.0;
  double max_speed = 0.2;
  int horizon = 10;
  double partner_step = 0.4;     // radians moved per interaction
  bool terminal_reward = false;  // reward only at the last step
};

// Lane i is centred at lateral coordinate y = i; lane 0 is the far left.
struct DrivingGeometry {
  int lanes = 3;
  int horizon = 15;
  double ego_speed = 1.0;
  double partner_speed = 0.5;
  double partner_start = 6.0;    // initial longitudinal gap
  double max_lateral = 0.5;      // lanes per step
  double merge_trigger = 5.0;    // partner merges once the gap is this small
  int merge_steps = 3;
  double car_length = 1.0;
  double car_width = 0.6;
  double collision_penalty = 100.0;

  double start_lane() const { return static_cast<double>(lanes / 2); }
  int early_steps() const { return (horizon + 2) / 3; }
};

// End-effector in a vertical (x, height) plane. Goals sit on the table.
struct RobotGeometry {
  std::array<double, 3> goal_x{-0.5, 0.0, 0.5};
  double goal_height = 0.0;
  double start_x = 0.0;
  double start_height = 0.6;
  double max_speed = 0.15;
  double x_limit = 1.0;
  double height_max = 1.0;
  int horizon = 10;
  double success_radius = 0.1;
  double success_reward = 100.0;
  double bonus_reward = 50.0;
  int bonus_goal = 2;            // right goal for Dynamics 1-3
  double height_threshold = 0.3;

  Eigen::Vector2d goal(int g) const { return {goal_x[static_cast<std::size_t>(g)], goal_height}; }
};

struct TowerGeometry {
  int horizon = 4;
  double start_distance = 0.5;
  double tie_threshold = 0.05;
  TowerOrder target{};
};

// Geometry of every environment, as read from the experiment config.
struct WorldGeometry {
  CircleGeometry circle;
  DrivingGeometry driving;
  RobotGeometry robot;
  TowerGeometry tower;
};

namespace kinematics {

// Circle: velocity action limited to max_speed in norm.
inline Eigen::Vector2d circle_move(const Eigen::Vector2d& pos, const Vector& action,
                                   double max_speed) {
  Eigen::Vector2d v(action[0], action[1]);
  const double n = v.norm();
  if (n > max_speed) v *= max_speed / n;
  return pos + v;
}

inline double driving_lateral_move(double y, double dy, const DrivingGeometry& g) {
  dy = std::clamp(dy, -g.max_lateral, g.max_lateral);
  return std::clamp(y + dy, 0.0, static_cast<double>(g.lanes - 1));
}

inline int lane_of(double y, int lanes) {
  return std::clamp(static_cast<int>(std::lround(y)), 0, lanes - 1);
}

// Longitudinal positions after `steps` steps.
inline double driving_ego_x(int steps, const DrivingGeometry& g) { return g.ego_speed * steps; }
inline double driving_partner_x(int steps, const DrivingGeometry& g) {
  return g.partner_start + g.partner_speed * steps;
}

inline Eigen::Vector2d robot_move(const Eigen::Vector2d& ee, const Vector& action,
                                  const RobotGeometry& g) {
  Eigen::Vector2d next;
  next[0] = std::clamp(ee[0] + std::clamp(action[0], -g.max_speed, g.max_speed), -g.x_limit,
                       g.x_limit);
  next[1] = std::clamp(ee[1] + std::clamp(action[1], -g.max_speed, g.max_speed), 0.0,
                       g.height_max);
  return next;
}

}  // namespace kinematics
}  // namespace rili
