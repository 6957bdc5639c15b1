#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rili {

inline constexpr int kLatentDim = 10;

using Vector = Eigen::VectorXd;

// One timestep of an interaction: s_t, a_t, r_t.
struct StepRecord {
  Vector state;
  Vector action;
  double reward = 0.0;
};

// Dimensions shared by every interaction of one environment.
struct ExperienceShape {
  int horizon = 1;
  int state_dim = 1;
  int action_dim = 1;

  int step_width() const { return state_dim + action_dim + 1; }
  int flat_size() const { return horizon * step_width(); }
  bool operator==(const ExperienceShape&) const = default;
};

struct TrajectoryPoint {
  Vector state;
  Vector action;
};

// States and actions of one interaction (rewards dropped).
struct InteractionTrajectory {
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
};

// Full record of one interaction. `padding` marks the zero experiences that
// fill a history window before k real interactions have happened.
struct InteractionExperience {
  std::vector<StepRecord> steps;
  std::int64_t index = 0;
  bool padding = false;

  std::size_t size() const { return steps.size(); }
  double total_reward() const;
  InteractionTrajectory trajectory() const;
  // Throws StructuralError unless every step matches `shape`.
  void check_shape(const ExperienceShape& shape) const;
};

InteractionExperience zero_experience(const ExperienceShape& shape);

// Packs an experience step-major as state | action | reward.
Vector flatten_experience(const InteractionExperience& exp, const ExperienceShape& shape);
InteractionExperience unflatten_experience(const Vector& flat, const ExperienceShape& shape,
                                           std::int64_t index = 0);

// Encoder output. Always kLatentDim entries, all finite.
class InferredStrategy {
 public:
  using Storage = Eigen::Matrix<double, kLatentDim, 1>;

  InferredStrategy() : value_(Storage::Zero()) {}
  explicit InferredStrategy(const Storage& value);
  // Throws StructuralError on wrong size or non-finite entries.
  static InferredStrategy from_vector(const Vector& v);

  const Storage& value() const { return value_; }
  double operator[](int i) const { return value_[i]; }

 private:
  Storage value_;
};

// Ground-truth partner strategies. These never reach agent inputs except via
// the Oracle conditioning path.
struct CircleAngle {
  double radians = 0.0;
  bool operator==(const CircleAngle&) const = default;
};
struct LaneIndex {
  int lane = 0;
  bool operator==(const LaneIndex&) const = default;
};
struct GoalIndex {
  int goal = 0;
  bool operator==(const GoalIndex&) const = default;
};
// order[level] = block id, level 0 is the bottom of the tower.
struct TowerOrder {
  std::array<int, 4> order{0, 1, 2, 3};
  bool operator==(const TowerOrder&) const = default;
};

enum class TowerVariant { kBottomUp, kTopDown, kMiddleOutA, kMiddleOutB, kEndsIn };
inline constexpr int kTowerVariantCount = 5;

// The tower partner's latent state is the rule it uses to stack the blocks it
// is handed; the realized TowerOrder depends on the layout of the same
// interaction.
struct TowerRule {
  TowerVariant variant = TowerVariant::kBottomUp;
  bool operator==(const TowerRule&) const = default;
};

using TrueStrategy = std::variant<CircleAngle, LaneIndex, GoalIndex, TowerOrder, TowerRule>;

std::string describe(const TrueStrategy& strategy);
bool is_permutation(const TowerOrder& order);

}  // namespace rili
