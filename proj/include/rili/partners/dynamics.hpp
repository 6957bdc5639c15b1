#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rili/core/env_kind.hpp"
#include "rili/core/kinematics.hpp"
#include "rili/core/rng.hpp"
#include "rili/core/types.hpp"

namespace rili::partners {

// Scripted partner families for circle / driving / robot. kNew is held out of
// training and only used for transfer.
enum class DynamicsId { kD1, kD2, kD3, kNew };

std::string to_string(DynamicsId id);
DynamicsId parse_dynamics_id(std::string_view name);

double wrap_angle(double radians);

// Where the ego ended up, recomputed from the stored states and applied actions.
Eigen::Vector2d circle_final_position(const InteractionExperience& prev, const CircleGeometry& g);
// Ego lateral position after each of the H steps.
std::vector<double> driving_lateral_path(const InteractionExperience& prev, const DrivingGeometry& g);
Eigen::Vector2d robot_final_position(const InteractionExperience& prev, const RobotGeometry& g);

CircleAngle circle_dynamics(DynamicsId id, const InteractionExperience& prev, CircleAngle theta,
                            const CircleGeometry& g);
LaneIndex driving_dynamics(DynamicsId id, const InteractionExperience& prev, LaneIndex lane,
                           const DrivingGeometry& g);
GoalIndex robot_dynamics(DynamicsId id, const InteractionExperience& prev, GoalIndex goal,
                         const RobotGeometry& g);

// Level (1-based, bottom first) assigned to the i-th closest block.
std::array<int, 4> tower_level_map(TowerVariant variant);
std::string to_string(TowerVariant variant);
TowerVariant parse_tower_variant(std::string_view name);

// Sorts blocks by distance, shuffling chains of near-tied blocks (adjacent
// gaps below tie_threshold), and stacks them according to the variant.
TowerOrder tower_dynamics(TowerVariant variant, const std::array<double, 4>& distances,
                          double tie_threshold, SeededRng& rng);

// f_p: one partner's latent dynamics. next() only sees the last interaction and
// the partner's own previous strategy.
struct LatentDynamics {
  std::string id;
  EnvKind env = EnvKind::kCircle;
  std::function<TrueStrategy(SeededRng&)> initial;
  std::function<TrueStrategy(const InteractionExperience&, const TrueStrategy&, SeededRng&)> next;

  TrueStrategy initial_strategy(SeededRng& rng) const { return initial(rng); }
  TrueStrategy next_strategy(const InteractionExperience& prev, const TrueStrategy& strategy,
                             SeededRng& rng) const {
    return next(prev, strategy, rng);
  }
};

// Identifiers: "d1", "d2", "d3", "new" for circle/driving/robot; tower uses
// "bottom_up", "top_down", "middle_out_a", "middle_out_b", "ends_in" (and
// "middle_out" as an alias for variant A).
LatentDynamics make_dynamics(EnvKind env, std::string_view id, const WorldGeometry& geometry);
std::vector<std::string> training_dynamics_ids(EnvKind env);
std::vector<std::string> all_dynamics_ids(EnvKind env);

// Throws StructuralError if the strategy does not belong to env.
void check_strategy(EnvKind env, const TrueStrategy& strategy, const WorldGeometry& geometry);

// Fixed kLatentDim embedding of the true strategy, used only by the Oracle
// baseline.
Vector oracle_embedding(const TrueStrategy& strategy);

}  // namespace rili::partners
