#include <algorithm>
#include <cmath>

#include "rili/core/errors.hpp"
#include "rili/envs/environment.hpp"
#include "rili/partners/dynamics.hpp"

namespace rili::envs {

namespace {

EnvSpec tower_spec(const TowerGeometry& g) {
  if (g.horizon != 4) throw ConfigError("tower horizon must equal the block count (4)");
  if (!is_permutation(g.target)) throw ConfigError("tower target is not a permutation");
  EnvSpec s;
  s.kind = EnvKind::kTower;
  s.state_dim = 5;
  s.action_dim = 1;
  s.horizon = g.horizon;
  s.action_low = Vector::Zero(1);
  s.action_high = Vector::Ones(1);
  s.reward_scale = default_reward_scale(EnvKind::kTower);
  return s;
}

}  // namespace

double tower_reward(const TowerOrder& target, const TowerOrder& built) {
  if (!is_permutation(target) || !is_permutation(built)) throw StructuralError("tower orders must be permutations");
  int wrong = 0;
  for (std::size_t l = 0; l < 4; ++l) wrong += target.order[l] != built.order[l] ? 1 : 0;
  return -200.0 * wrong;
}

TowerEnv::TowerEnv(TowerGeometry g, std::uint64_t seed) : Environment(tower_spec(g)), g_(g), rng_(seed) {}

void TowerEnv::set_target(const TowerOrder& target) {
  if (!is_permutation(target)) throw StructuralError("tower target is not a permutation");
  g_.target = target;
}

void TowerEnv::check(const TrueStrategy& strategy) const {
  if (const auto* o = std::get_if<TowerOrder>(&strategy)) {
    if (!is_permutation(*o)) throw StructuralError("tower order is not a permutation");
    return;
  }
  if (std::get_if<TowerRule>(&strategy) == nullptr) {
    throw StructuralError("tower environment needs a TowerRule or TowerOrder, got " + describe(strategy));
  }
}

Vector TowerEnv::observe() const {
  Vector o(5);
  for (int i = 0; i < 4; ++i) o[i] = d_[static_cast<std::size_t>(i)];
  o[4] = static_cast<double>(t()) / g_.horizon;
  return o;
}

Vector TowerEnv::do_reset(const TrueStrategy& strategy) {
  strategy_ = strategy;
  d_.fill(g_.start_distance);
  built_.reset();
  return observe();
}

std::pair<Vector, double> TowerEnv::do_step(const Vector& action) {
  const int k = t();
  d_[static_cast<std::size_t>(k)] = action[0];
  double reward = 0.0;
  if (k + 1 == g_.horizon) {
    TowerOrder built;
    if (assembler_) {
      built = assembler_(d_);
    } else if (const auto* rule = std::get_if<TowerRule>(&strategy_)) {
      built = partners::tower_dynamics(rule->variant, d_, g_.tie_threshold, rng_);
    } else {
      built = std::get<TowerOrder>(strategy_);
    }
    built_ = built;
    reward = tower_reward(g_.target, built);
  }
  Vector o(5);
  for (int i = 0; i < 4; ++i) o[i] = d_[static_cast<std::size_t>(i)];
  o[4] = static_cast<double>(k + 1) / g_.horizon;
  return {o, reward};
}

}  // namespace rili::envs
