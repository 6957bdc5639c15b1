#include "rili/envs/environment.hpp"

#include <cmath>

#include "rili/core/errors.hpp"
#include "rili/core/log.hpp"

namespace rili::envs {

Vector Environment::reset(const TrueStrategy& strategy) {
  check(strategy);
  t_ = 0;
  started_ = true;
  return do_reset(strategy);
}

Vector Environment::clip_action(const Vector& action) {
  if (action.size() != spec_.action_dim) {
    throw StructuralError("action has " + std::to_string(action.size()) + " entries, expected " +
                          std::to_string(spec_.action_dim));
  }
  if (!action.allFinite()) throw NumericError("non-finite action");
  Vector clipped = action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  if (!warned_ && (clipped - action).cwiseAbs().maxCoeff() > 1e-9) {
    warned_ = true;
    log::warn("action outside bounds was clipped (", to_string(spec_.kind), ")");
  }
  return clipped;
}

StepResult Environment::step(const Vector& action) {
  if (!started_) throw ContractError("step() before reset()");
  if (done()) throw ContractError("step() after the interaction is done");
  StepResult r;
  r.applied_action = clip_action(action);
  auto [obs, reward] = do_step(r.applied_action);
  ++t_;
  r.observation = std::move(obs);
  r.reward = reward;
  r.done = done();
  return r;
}

double default_reward_scale(EnvKind kind) {
  switch (kind) {
    case EnvKind::kCircle: return 1.0;
    case EnvKind::kDriving: return 0.1;
    case EnvKind::kRobot: return 0.05;
    case EnvKind::kTower: return 1.0 / 200.0;
  }
  return 1.0;
}

std::unique_ptr<Environment> make_environment(EnvKind kind, const WorldGeometry& geometry,
                                              std::uint64_t seed, std::optional<double> reward_scale) {
  std::unique_ptr<Environment> env;
  switch (kind) {
    case EnvKind::kCircle: env = std::make_unique<CircleEnv>(geometry.circle); break;
    case EnvKind::kDriving: env = std::make_unique<DrivingEnv>(geometry.driving); break;
    case EnvKind::kRobot: env = std::make_unique<RobotEnv>(geometry.robot); break;
    case EnvKind::kTower: env = std::make_unique<TowerEnv>(geometry.tower, seed); break;
  }
  if (reward_scale) {
    if (!(*reward_scale > 0.0) || !std::isfinite(*reward_scale)) throw ConfigError("reward scale must be positive");
    env->set_reward_scale(*reward_scale);
  }
  return env;
}

}  // namespace rili::envs
