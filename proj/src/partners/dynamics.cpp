#include "rili/partners/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rili/core/errors.hpp"

namespace rili::partners {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const StepRecord& last_step(const InteractionExperience& prev) {
  if (prev.steps.empty()) throw ContractError("partner dynamics need a non-empty interaction");
  return prev.steps.back();
}

template <typename T>
const T& expect(const TrueStrategy& s, const char* what) {
  const T* v = std::get_if<T>(&s);
  if (v == nullptr) throw StructuralError(std::string("expected a ") + what + " strategy, got " + describe(s));
  return *v;
}

double mean_of(const std::vector<double>& v, std::size_t n) {
  n = std::min(n, v.size());
  if (n == 0) return 0.0;
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
}

}  // namespace

std::string to_string(DynamicsId id) {
  switch (id) {
    case DynamicsId::kD1: return "d1";
    case DynamicsId::kD2: return "d2";
    case DynamicsId::kD3: return "d3";
    case DynamicsId::kNew: return "new";
  }
  return "?";
}

DynamicsId parse_dynamics_id(std::string_view name) {
  if (name == "d1") return DynamicsId::kD1;
  if (name == "d2") return DynamicsId::kD2;
  if (name == "d3") return DynamicsId::kD3;
  if (name == "new") return DynamicsId::kNew;
  throw ConfigError("unknown partner dynamics '" + std::string(name) + "'");
}

double wrap_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Eigen::Vector2d circle_final_position(const InteractionExperience& prev, const CircleGeometry& g) {
  const auto& s = last_step(prev);
  return kinematics::circle_move(Eigen::Vector2d(s.state[0], s.state[1]), s.action, g.max_speed);
}

std::vector<double> driving_lateral_path(const InteractionExperience& prev, const DrivingGeometry& g) {
  const auto& s = last_step(prev);
  std::vector<double> path;
  path.reserve(prev.size());
  for (std::size_t t = 1; t < prev.size(); ++t) path.push_back(prev.steps[t].state[1]);
  path.push_back(kinematics::driving_lateral_move(s.state[1], s.action[0], g));
  return path;
}

Eigen::Vector2d robot_final_position(const InteractionExperience& prev, const RobotGeometry& g) {
  const auto& s = last_step(prev);
  return kinematics::robot_move(Eigen::Vector2d(s.state[0], s.state[1]), s.action, g);
}

CircleAngle circle_dynamics(DynamicsId id, const InteractionExperience& prev, CircleAngle theta,
                            const CircleGeometry& g) {
  const double d = g.partner_step;
  if (id == DynamicsId::kD3) return {wrap_angle(theta.radians - d)};
  // Boundary counts as inside.
  const bool outside = circle_final_position(prev, g).norm() > g.radius;
  double next = theta.radians;
  switch (id) {
    case DynamicsId::kD1: next += outside ? -d : d; break;
    case DynamicsId::kD2: next += outside ? 0.0 : d; break;
    case DynamicsId::kNew: next += outside ? d : -d; break;
    case DynamicsId::kD3: break;
  }
  return {wrap_angle(next)};
}

LaneIndex driving_dynamics(DynamicsId id, const InteractionExperience& prev, LaneIndex lane,
                           const DrivingGeometry& g) {
  if (id == DynamicsId::kD3) return {(lane.lane + 1) % g.lanes};
  const auto path = driving_lateral_path(prev, g);
  const double early = mean_of(path, static_cast<std::size_t>(g.early_steps()));
  switch (id) {
    case DynamicsId::kD1: {
      // Lane at the first step where the ego is ahead of the partner; if it
      // never gets ahead, its final lane.
      for (std::size_t k = 1; k <= path.size(); ++k) {
        const int steps = static_cast<int>(k);
        if (kinematics::driving_ego_x(steps, g) > kinematics::driving_partner_x(steps, g)) {
          return {kinematics::lane_of(path[k - 1], g.lanes)};
        }
      }
      return {kinematics::lane_of(path.back(), g.lanes)};
    }
    case DynamicsId::kD2:
      return early < g.start_lane() ? LaneIndex{g.lanes - 1} : lane;
    case DynamicsId::kNew:
      if (early > g.start_lane()) return {0};
      return {kinematics::lane_of(path.back(), g.lanes)};
    case DynamicsId::kD3: break;
  }
  return lane;
}

GoalIndex robot_dynamics(DynamicsId id, const InteractionExperience& prev, GoalIndex goal,
                         const RobotGeometry& g) {
  const int n = static_cast<int>(g.goal_x.size());
  if (id == DynamicsId::kD3) return {(goal.goal + 1) % n};
  const Eigen::Vector2d ee = robot_final_position(prev, g);
  switch (id) {
    case DynamicsId::kD1: {
      double best = (g.goal(goal.goal) - ee).norm();
      int arg = goal.goal;
      for (int i = 0; i < n; ++i) {
        const double d = (g.goal(i) - ee).norm();
        if (d > best + 1e-12) {
          best = d;
          arg = i;
        }
      }
      return {arg};
    }
    case DynamicsId::kD2:
      return ee[0] < g.goal_x[static_cast<std::size_t>(goal.goal)] ? goal : GoalIndex{(goal.goal + 1) % n};
    case DynamicsId::kNew:
      return ee[1] < g.height_threshold ? goal : GoalIndex{(goal.goal + 1) % n};
    case DynamicsId::kD3: break;
  }
  return goal;
}

std::array<int, 4> tower_level_map(TowerVariant variant) {
  switch (variant) {
    case TowerVariant::kBottomUp: return {1, 2, 3, 4};
    case TowerVariant::kTopDown: return {4, 3, 2, 1};
    case TowerVariant::kMiddleOutA: return {2, 3, 1, 4};
    case TowerVariant::kMiddleOutB: return {3, 2, 4, 1};
    case TowerVariant::kEndsIn: return {1, 4, 2, 3};
  }
  return {1, 2, 3, 4};
}

std::string to_string(TowerVariant variant) {
  switch (variant) {
    case TowerVariant::kBottomUp: return "bottom_up";
    case TowerVariant::kTopDown: return "top_down";
    case TowerVariant::kMiddleOutA: return "middle_out_a";
    case TowerVariant::kMiddleOutB: return "middle_out_b";
    case TowerVariant::kEndsIn: return "ends_in";
  }
  return "?";
}

TowerVariant parse_tower_variant(std::string_view name) {
  if (name == "bottom_up") return TowerVariant::kBottomUp;
  if (name == "top_down") return TowerVariant::kTopDown;
  if (name == "middle_out_a" || name == "middle_out") return TowerVariant::kMiddleOutA;
  if (name == "middle_out_b") return TowerVariant::kMiddleOutB;
  if (name == "ends_in") return TowerVariant::kEndsIn;
  throw ConfigError("unknown tower dynamics '" + std::string(name) + "'");
}

TowerOrder tower_dynamics(TowerVariant variant, const std::array<double, 4>& distances,
                          double tie_threshold, SeededRng& rng) {
  for (double d : distances) {
    if (!std::isfinite(d)) throw StructuralError("tower block distances must be finite");
  }
  std::array<int, 4> sorted{0, 1, 2, 3};
  std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
    return distances[static_cast<std::size_t>(a)] < distances[static_cast<std::size_t>(b)];
  });
  // Shuffle each maximal chain of near-tied neighbours.
  std::size_t start = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    const bool chain_ends =
        i == sorted.size() || distances[static_cast<std::size_t>(sorted[i])] -
                                      distances[static_cast<std::size_t>(sorted[i - 1])] >=
                                  tie_threshold;
    if (chain_ends) {
      if (i - start > 1) rng.shuffle(std::span<int>(sorted.data() + start, i - start));
      start = i;
    }
  }
  const auto levels = tower_level_map(variant);
  TowerOrder out;
  for (std::size_t i = 0; i < 4; ++i) out.order[static_cast<std::size_t>(levels[i] - 1)] = sorted[i];
  return out;
}

LatentDynamics make_dynamics(EnvKind env, std::string_view id, const WorldGeometry& geometry) {
  LatentDynamics dyn;
  dyn.env = env;
  switch (env) {
    case EnvKind::kCircle: {
      const auto which = parse_dynamics_id(id);
      const auto g = geometry.circle;
      dyn.id = to_string(which);
      dyn.initial = [](SeededRng& rng) -> TrueStrategy { return CircleAngle{rng.uniform(0.0, kTwoPi)}; };
      dyn.next = [which, g](const InteractionExperience& prev, const TrueStrategy& s, SeededRng&) -> TrueStrategy {
        return circle_dynamics(which, prev, expect<CircleAngle>(s, "circle"), g);
      };
      break;
    }
    case EnvKind::kDriving: {
      const auto which = parse_dynamics_id(id);
      const auto g = geometry.driving;
      dyn.id = to_string(which);
      dyn.initial = [g](SeededRng& rng) -> TrueStrategy {
        return LaneIndex{static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(g.lanes)))};
      };
      dyn.next = [which, g](const InteractionExperience& prev, const TrueStrategy& s, SeededRng&) -> TrueStrategy {
        return driving_dynamics(which, prev, expect<LaneIndex>(s, "driving"), g);
      };
      break;
    }
    case EnvKind::kRobot: {
      const auto which = parse_dynamics_id(id);
      const auto g = geometry.robot;
      dyn.id = to_string(which);
      dyn.initial = [g](SeededRng& rng) -> TrueStrategy {
        return GoalIndex{static_cast<int>(rng.uniform_index(g.goal_x.size()))};
      };
      dyn.next = [which, g](const InteractionExperience& prev, const TrueStrategy& s, SeededRng&) -> TrueStrategy {
        return robot_dynamics(which, prev, expect<GoalIndex>(s, "robot"), g);
      };
      break;
    }
    case EnvKind::kTower: {
      // The tower partner keeps its stacking rule; the realized order depends
      // on the layout of the interaction it is applied to.
      const auto variant = parse_tower_variant(id);
      dyn.id = to_string(variant);
      dyn.initial = [variant](SeededRng&) -> TrueStrategy { return TowerRule{variant}; };
      dyn.next = [variant](const InteractionExperience&, const TrueStrategy&, SeededRng&) -> TrueStrategy {
        return TowerRule{variant};
      };
      break;
    }
  }
  return dyn;
}

std::vector<std::string> training_dynamics_ids(EnvKind env) {
  if (env == EnvKind::kTower) return {"bottom_up", "top_down", "middle_out_a", "middle_out_b"};
  return {"d1", "d2", "d3"};
}

std::vector<std::string> all_dynamics_ids(EnvKind env) {
  if (env == EnvKind::kTower) return {"bottom_up", "top_down", "middle_out_a", "middle_out_b", "ends_in"};
  return {"d1", "d2", "d3", "new"};
}

void check_strategy(EnvKind env, const TrueStrategy& strategy, const WorldGeometry& geometry) {
  switch (env) {
    case EnvKind::kCircle: {
      const double r = expect<CircleAngle>(strategy, "circle").radians;
      if (!std::isfinite(r)) throw StructuralError("circle angle must be finite");
      return;
    }
    case EnvKind::kDriving: {
      const int lane = expect<LaneIndex>(strategy, "driving").lane;
      if (lane < 0 || lane >= geometry.driving.lanes) throw StructuralError("lane index out of range");
      return;
    }
    case EnvKind::kRobot: {
      const int goal = expect<GoalIndex>(strategy, "robot").goal;
      if (goal < 0 || goal >= static_cast<int>(geometry.robot.goal_x.size())) {
        throw StructuralError("goal index out of range");
      }
      return;
    }
    case EnvKind::kTower:
      if (const auto* o = std::get_if<TowerOrder>(&strategy)) {
        if (!is_permutation(*o)) throw StructuralError("tower order is not a permutation");
        return;
      }
      expect<TowerRule>(strategy, "tower");
      return;
  }
}

Vector oracle_embedding(const TrueStrategy& strategy) {
  Vector z = Vector::Zero(kLatentDim);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CircleAngle>) {
          z[0] = std::cos(s.radians);
          z[1] = std::sin(s.radians);
        } else if constexpr (std::is_same_v<S, LaneIndex>) {
          z[s.lane % kLatentDim] = 1.0;
        } else if constexpr (std::is_same_v<S, GoalIndex>) {
          z[s.goal % kLatentDim] = 1.0;
        } else if constexpr (std::is_same_v<S, TowerRule>) {
          z[static_cast<int>(s.variant)] = 1.0;
        } else {
          // Level-by-level block ids, scaled to [0, 1].
          for (int l = 0; l < 4; ++l) z[l] = s.order[static_cast<std::size_t>(l)] / 3.0;
        }
      },
      strategy);
  return z;
}

}  // namespace rili::partners
