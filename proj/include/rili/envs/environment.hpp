#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "rili/core/env_kind.hpp"
#include "rili/core/kinematics.hpp"
#include "rili/core/rng.hpp"
#include "rili/core/types.hpp"

namespace rili::envs {

struct EnvSpec {
  EnvKind kind = EnvKind::kCircle;
  int state_dim = 1;
  int action_dim = 1;
  int horizon = 1;
  Vector action_low;
  Vector action_high;
  // Multiplier applied to rewards before they reach any learner. Metrics are
  // always reported unscaled.
  double reward_scale = 1.0;

  ExperienceShape shape() const { return {horizon, state_dim, action_dim}; }
};

struct StepResult {
  Vector observation;
  // The action after clipping to the bounds; this is what gets recorded.
  Vector applied_action;
  double reward = 0.0;
  bool done = false;
};

// One interaction of the repeated game. reset() receives the partner's true
// strategy for this interaction; observations never depend on it.
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }
  int t() const { return t_; }
  bool done() const { return t_ >= spec_.horizon; }
  bool started() const { return started_; }
  void set_reward_scale(double scale) { spec_.reward_scale = scale; }

  Vector reset(const TrueStrategy& strategy);
  StepResult step(const Vector& action);

  // Clips to the declared box; warns (once per instance) when clipping was
  // needed by more than a rounding error.
  Vector clip_action(const Vector& action);

 protected:
  virtual void check(const TrueStrategy& strategy) const = 0;
  virtual Vector do_reset(const TrueStrategy& strategy) = 0;
  // Returns (next observation, reward) for step t_ (before increment).
  virtual std::pair<Vector, double> do_step(const Vector& action) = 0;

 private:
  EnvSpec spec_;
  int t_ = 0;
  bool started_ = false;
  bool warned_ = false;
};

class CircleEnv : public Environment {
 public:
  explicit CircleEnv(CircleGeometry g = {});
  const CircleGeometry& geometry() const { return g_; }
  Eigen::Vector2d position() const { return pos_; }
  Eigen::Vector2d partner_point() const { return partner_; }

 protected:
  void check(const TrueStrategy& strategy) const override;
  Vector do_reset(const TrueStrategy& strategy) override;
  std::pair<Vector, double> do_step(const Vector& action) override;

 private:
  CircleGeometry g_;
  Eigen::Vector2d pos_{0, 0};
  Eigen::Vector2d partner_{0, 0};
};

// Ego drives forward at constant speed and only chooses lateral velocity. The
// partner car starts ahead in the start lane, moves slower, and merges into
// its chosen lane once the ego closes in.
class DrivingEnv : public Environment {
 public:
  explicit DrivingEnv(DrivingGeometry g = {});
  const DrivingGeometry& geometry() const { return g_; }
  double ego_y() const { return y_; }
  bool collided() const { return collided_; }
  // Partner lateral position after `steps` steps when merging into target_lane.
  static double partner_y(int steps, int target_lane, const DrivingGeometry& g);

 protected:
  void check(const TrueStrategy& strategy) const override;
  Vector do_reset(const TrueStrategy& strategy) override;
  std::pair<Vector, double> do_step(const Vector& action) override;

 private:
  Vector observe() const;
  DrivingGeometry g_;
  double y_ = 0.0;
  int target_lane_ = 0;
  bool collided_ = false;
};

class RobotEnv : public Environment {
 public:
  explicit RobotEnv(RobotGeometry g = {});
  const RobotGeometry& geometry() const { return g_; }
  Eigen::Vector2d end_effector() const { return ee_; }

 protected:
  void check(const TrueStrategy& strategy) const override;
  Vector do_reset(const TrueStrategy& strategy) override;
  std::pair<Vector, double> do_step(const Vector& action) override;

 private:
  RobotGeometry g_;
  Eigen::Vector2d ee_{0, 0};
  int partner_goal_ = 0;
};

// -200 per level whose block differs from the target.
double tower_reward(const TowerOrder& target, const TowerOrder& built);

// Four blocks; step t sets block t's distance from the partner. After the last
// step the partner stacks the blocks (by its rule, or by an external
// assembler such as a human) and the reward for the built tower is returned.
class TowerEnv : public Environment {
 public:
  using Assembler = std::function<TowerOrder(const std::array<double, 4>& distances)>;

  TowerEnv(TowerGeometry g = {}, std::uint64_t seed = 0);
  const TowerGeometry& geometry() const { return g_; }
  const std::array<double, 4>& distances() const { return d_; }
  const std::optional<TowerOrder>& built() const { return built_; }
  void set_target(const TowerOrder& target);
  // Overrides the scripted partner for the final assembly.
  void set_assembler(Assembler assembler) { assembler_ = std::move(assembler); }

 protected:
  void check(const TrueStrategy& strategy) const override;
  Vector do_reset(const TrueStrategy& strategy) override;
  std::pair<Vector, double> do_step(const Vector& action) override;

 private:
  Vector observe() const;
  TowerGeometry g_;
  SeededRng rng_;
  std::array<double, 4> d_{};
  TrueStrategy strategy_;
  std::optional<TowerOrder> built_;
  Assembler assembler_;
};

// Default learning-signal scale per environment (rewards are divided down to
// roughly unit magnitude per interaction).
double default_reward_scale(EnvKind kind);

std::unique_ptr<Environment> make_environment(EnvKind kind, const WorldGeometry& geometry,
                                              std::uint64_t seed = 0,
                                              std::optional<double> reward_scale = std::nullopt);

}  // namespace rili::envs
