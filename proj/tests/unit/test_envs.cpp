#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rili/core/errors.hpp"
#include "rili/envs/environment.hpp"

using namespace rili;
using namespace rili::envs;

namespace {

std::vector<StepResult> rollout(Environment& env, const TrueStrategy& s, const std::vector<Vector>& actions) {
  env.reset(s);
  std::vector<StepResult> out;
  for (const auto& a : actions) out.push_back(env.step(a));
  return out;
}

std::vector<Vector> random_actions(const EnvSpec& spec, SeededRng& rng) {
  std::vector<Vector> acts;
  for (int t = 0; t < spec.horizon; ++t) {
    Vector a(spec.action_dim);
    for (int i = 0; i < spec.action_dim; ++i) a[i] = rng.uniform(spec.action_low[i], spec.action_high[i]);
    acts.push_back(a);
  }
  return acts;
}

}  // namespace

TEST_CASE("reset examples") {
  WorldGeometry w;
  auto circle = make_environment(EnvKind::kCircle, w);
  CHECK(circle->reset(CircleAngle{0.3}) == Vector::Zero(2));
  auto driving = make_environment(EnvKind::kDriving, w);
  auto o = driving->reset(LaneIndex{0});
  CHECK(o[0] == 0.0);
  CHECK(o[1] == 1.0);
  auto tower = make_environment(EnvKind::kTower, w);
  auto t = tower->reset(TowerRule{});
  for (int i = 0; i < 4; ++i) CHECK(t[i] == 0.5);
  CHECK_THROWS_AS(circle->reset(LaneIndex{0}), StructuralError);
  CHECK_THROWS_AS(driving->reset(LaneIndex{3}), StructuralError);
}

TEST_CASE("circle: standing on the partner point costs nothing") {
  CircleGeometry g;
  g.radius = 0.2;  // reachable in one step
  CircleEnv env(g);
  env.reset(CircleAngle{0.0});
  auto r = env.step((Vector(2) << 0.2, 0.0).finished());
  CHECK(r.reward == doctest::Approx(0.0).epsilon(1e-12));
  r = env.step(Vector::Zero(2));
  CHECK(r.reward == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("circle: action norm limit and terminal-only reward") {
  CircleGeometry g;
  CircleEnv env(g);
  env.reset(CircleAngle{0.0});
  auto r = env.step((Vector(2) << 0.2, 0.2).finished());
  CHECK(r.observation.norm() == doctest::Approx(0.2));
  CHECK(r.reward == doctest::Approx(-(r.observation - Eigen::Vector2d(1, 0)).norm()));
  g.terminal_reward = true;
  CircleEnv term(g);
  term.reset(CircleAngle{0.0});
  for (int t = 0; t < g.horizon; ++t) {
    auto s = term.step(Vector::Zero(2));
    if (t + 1 < g.horizon) CHECK(s.reward == 0.0);
    else CHECK(s.reward == doctest::Approx(-1.0));
  }
}

TEST_CASE("driving: collision costs 100 extra, once") {
  DrivingGeometry g;
  DrivingEnv env(g);
  env.reset(LaneIndex{1});  // partner merges into the ego's lane
  double total = 0;
  for (int t = 0; t < g.horizon; ++t) total += env.step(Vector::Zero(1)).reward;
  CHECK(env.collided());
  CHECK(total == doctest::Approx(-15.0 - 100.0));

  env.reset(LaneIndex{0});
  total = 0;
  for (int t = 0; t < g.horizon; ++t) total += env.step(Vector::Zero(1)).reward;
  CHECK_FALSE(env.collided());
  CHECK(total == doctest::Approx(-15.0));
}

TEST_CASE("driving: path length penalty and partner merge") {
  DrivingGeometry g;
  DrivingEnv env(g);
  env.reset(LaneIndex{2});
  auto r = env.step(Vector::Constant(1, 0.5));
  CHECK(r.reward == doctest::Approx(-std::sqrt(1.25)));
  CHECK(DrivingEnv::partner_y(0, 2, g) == 1.0);
  CHECK(DrivingEnv::partner_y(20, 2, g) == 2.0);
  CHECK(DrivingEnv::partner_y(20, 0, g) == 0.0);
  // the partner has finished merging before the cars are level
  CHECK(DrivingEnv::partner_y(10, 0, g) == 0.0);
}

TEST_CASE("robot: success and bonus") {
  RobotGeometry g;
  RobotEnv env(g);
  auto reach = [&](int partner_goal, int aim) {
    env.reset(GoalIndex{partner_goal});
    double last = 0;
    for (int t = 0; t < g.horizon; ++t) {
      const Eigen::Vector2d d = g.goal(aim) - env.end_effector();
      last = env.step(Vector(d)).reward;
    }
    return last;
  };
  CHECK(reach(0, 0) == doctest::Approx(100.0));
  CHECK(reach(2, 2) == doctest::Approx(150.0));
  CHECK(reach(0, 2) == doctest::Approx(-1.0));
  CHECK(reach(2, 0) == doctest::Approx(50.0 - 1.0));
}

TEST_CASE("tower_reward examples") {
  const TowerOrder target{{0, 1, 2, 3}};
  CHECK(tower_reward(target, target) == 0.0);
  CHECK(tower_reward(target, TowerOrder{{1, 0, 3, 2}}) == -800.0);
  CHECK(tower_reward(target, TowerOrder{{1, 0, 2, 3}}) == -400.0);
  CHECK_THROWS_AS(tower_reward(target, TowerOrder{{0, 0, 2, 3}}), StructuralError);
}

TEST_CASE("tower reward over all permutations is never -200") {
  std::array<int, 4> p{0, 1, 2, 3};
  const TowerOrder target{{2, 0, 3, 1}};
  do {
    const double r = tower_reward(target, TowerOrder{p});
    CHECK((r == 0.0 || r == -400.0 || r == -600.0 || r == -800.0));
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST_CASE("tower: rule assembles from the layout built during the interaction") {
  TowerEnv env;
  env.reset(TowerRule{TowerVariant::kBottomUp});
  const double layout[] = {0.1, 0.4, 0.7, 0.9};
  StepResult r;
  for (double d : layout) {
    CHECK(r.reward == 0.0);
    r = env.step(Vector::Constant(1, d));
  }
  CHECK(r.done);
  CHECK(env.built() == TowerOrder{{0, 1, 2, 3}});
  CHECK(r.reward == 0.0);

  env.reset(TowerRule{TowerVariant::kTopDown});
  for (double d : layout) r = env.step(Vector::Constant(1, d));
  CHECK(r.reward == -800.0);

  env.set_assembler([](const std::array<double, 4>&) { return TowerOrder{{1, 0, 2, 3}}; });
  env.reset(TowerRule{TowerVariant::kBottomUp});
  for (double d : layout) r = env.step(Vector::Constant(1, d));
  CHECK(r.reward == -400.0);
}

TEST_CASE("episode length, step-after-done and clipping") {
  WorldGeometry w;
  SeededRng rng(3);
  for (EnvKind k : {EnvKind::kCircle, EnvKind::kDriving, EnvKind::kRobot, EnvKind::kTower}) {
    auto env = make_environment(k, w, 1);
    CHECK_THROWS_AS(env->step(Vector::Zero(env->spec().action_dim)), ContractError);
    TrueStrategy s = k == EnvKind::kCircle    ? TrueStrategy{CircleAngle{1.0}}
                     : k == EnvKind::kDriving ? TrueStrategy{LaneIndex{0}}
                     : k == EnvKind::kRobot   ? TrueStrategy{GoalIndex{1}}
                                              : TrueStrategy{TowerRule{}};
    env->reset(s);
    int steps = 0;
    while (!env->done()) {
      auto r = env->step(Vector::Constant(env->spec().action_dim, 100.0));
      CHECK(r.applied_action == env->spec().action_high);
      ++steps;
      CHECK(r.done == (steps == env->spec().horizon));
    }
    CHECK(steps == env->spec().horizon);
    CHECK_THROWS_AS(env->step(Vector::Zero(env->spec().action_dim)), ContractError);
  }
}

TEST_CASE("observations do not depend on the partner strategy") {
  WorldGeometry w;
  SeededRng rng(8);
  struct Case {
    EnvKind kind;
    std::vector<TrueStrategy> strategies;
  };
  const std::vector<Case> cases{
      {EnvKind::kCircle, {CircleAngle{0.0}, CircleAngle{2.0}, CircleAngle{4.0}}},
      {EnvKind::kDriving, {LaneIndex{0}, LaneIndex{1}, LaneIndex{2}}},
      {EnvKind::kRobot, {GoalIndex{0}, GoalIndex{1}, GoalIndex{2}}},
      {EnvKind::kTower, {TowerRule{TowerVariant::kBottomUp}, TowerRule{TowerVariant::kTopDown}, TowerRule{TowerVariant::kEndsIn}}}};
  for (const auto& c : cases) {
    auto env = make_environment(c.kind, w, 4);
    for (int trial = 0; trial < 20; ++trial) {
      auto acts = random_actions(env->spec(), rng);
      auto base = rollout(*env, c.strategies[0], acts);
      for (std::size_t j = 1; j < c.strategies.size(); ++j) {
        auto other = rollout(*env, c.strategies[j], acts);
        for (std::size_t t = 0; t < base.size(); ++t) CHECK(other[t].observation == base[t].observation);
      }
    }
  }
}

TEST_CASE("rewards stay within their bounds and transitions are deterministic") {
  WorldGeometry w;
  SeededRng rng(12);
  auto circle = make_environment(EnvKind::kCircle, w);
  auto driving = make_environment(EnvKind::kDriving, w);
  const auto& cg = w.circle;
  const double circle_min = -(cg.radius + cg.max_speed * std::sqrt(2.0) * cg.horizon) * cg.horizon;
  const auto& dg = w.driving;
  const double path_max = dg.horizon * std::sqrt(1.0 + dg.max_lateral * dg.max_lateral);
  for (int trial = 0; trial < 200; ++trial) {
    const CircleAngle th{rng.uniform(0, 2 * std::numbers::pi)};
    auto acts = random_actions(circle->spec(), rng);
    auto a = rollout(*circle, th, acts), b = rollout(*circle, th, acts);
    double total = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].reward <= 0.0);
      CHECK(a[t].reward == b[t].reward);
      CHECK(a[t].observation == b[t].observation);
      total += a[t].reward;
    }
    CHECK(total >= circle_min);

    const LaneIndex lane{static_cast<int>(rng.uniform_index(3))};
    auto dacts = random_actions(driving->spec(), rng);
    double dtotal = 0;
    for (const auto& r : rollout(*driving, lane, dacts)) dtotal += r.reward;
    CHECK(dtotal >= -(path_max + 100.0 * dg.horizon));
    CHECK(dtotal <= -dg.horizon);
  }
}

TEST_CASE("factory applies reward scale overrides") {
  WorldGeometry w;
  CHECK(make_environment(EnvKind::kTower, w)->spec().reward_scale == doctest::Approx(0.005));
  CHECK(make_environment(EnvKind::kCircle, w, 0, 0.5)->spec().reward_scale == 0.5);
  CHECK_THROWS_AS(make_environment(EnvKind::kCircle, w, 0, -1.0), ConfigError);
}
