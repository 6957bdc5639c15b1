#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rili/core/errors.hpp"
#include "rili/transfer/library.hpp"
#include "rili/transfer/transfer.hpp"

using namespace rili;
using namespace rili::transfer;

namespace {

InteractionTrajectory line_trajectory(double ax, double ay, int h = 10) {
  InteractionTrajectory t;
  Vector s = Vector::Zero(2);
  for (int i = 0; i < h; ++i) {
    Vector a(2);
    a << ax, ay;
    t.points.push_back({s, a});
    s += a;
  }
  return t;
}

bool same(const InteractionTrajectory& a, const InteractionTrajectory& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.points[i].state != b.points[i].state || a.points[i].action != b.points[i].action) return false;
  }
  return true;
}

// Executes every library entry against the partner and returns realized totals.
std::vector<double> realized(envs::Environment& env, const TrajectoryLibrary& lib, const TrueStrategy& truth) {
  std::vector<double> out;
  for (const auto& t : lib.trajectories) out.push_back(execute_open_loop(env, t, truth).total_reward());
  return out;
}

std::vector<InteractionTrajectory> random_circle_buffer(int n, SeededRng& rng) {
  std::vector<InteractionTrajectory> buf;
  for (int i = 0; i < n; ++i) {
    const double ang = rng.uniform(-M_PI, M_PI), speed = rng.uniform(0.0, 0.14);
    buf.push_back(line_trajectory(speed * std::cos(ang), speed * std::sin(ang)));
  }
  return buf;
}

}  // namespace

TEST_CASE("build_library: identical trajectories, K = 1") {
  SeededRng rng(1);
  std::vector<InteractionTrajectory> buf(5, line_trajectory(0.1, 0.0));
  auto lib = build_library(buf, 1, rng);
  REQUIRE(lib.size() == 1);
  CHECK(same(lib.at(0), buf[0]));
}

TEST_CASE("build_library: two separated clusters give one representative each") {
  SeededRng rng(2);
  std::vector<InteractionTrajectory> buf;
  std::vector<int> cluster;
  for (int i = 0; i < 40; ++i) {
    const double jitter = 0.01 * rng.normal();
    const bool left = i % 3 == 0;
    buf.push_back(line_trajectory(left ? -0.1 + jitter : 0.1 + jitter, jitter));
    cluster.push_back(left ? 0 : 1);
  }
  auto lib = build_library(buf, 2, rng);
  REQUIRE(lib.size() == 2);
  // Brute-force assignment: which cluster does each representative belong to?
  std::vector<int> seen;
  for (const auto& t : lib.trajectories) {
    for (std::size_t i = 0; i < buf.size(); ++i) {
      if (same(t, buf[i])) seen.push_back(cluster[i]);
    }
  }
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] != seen[1]);
}

TEST_CASE("build_library: K = buffer size returns the deduplicated buffer") {
  SeededRng rng(3);
  std::vector<InteractionTrajectory> buf{line_trajectory(0.1, 0), line_trajectory(0, 0.1), line_trajectory(0.1, 0),
                                         line_trajectory(-0.1, 0), line_trajectory(0, -0.1)};
  auto lib = build_library(buf, static_cast<int>(buf.size()), rng);
  CHECK(lib.size() == 4);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    CHECK(std::any_of(lib.trajectories.begin(), lib.trajectories.end(),
                      [&](const InteractionTrajectory& t) { return same(t, buf[i]); }));
  }
}

TEST_CASE("build_library: errors, determinism, members come from the buffer") {
  SeededRng rng(4);
  auto buf = random_circle_buffer(200, rng);
  CHECK_THROWS_AS(build_library(std::vector<InteractionTrajectory>(buf.begin(), buf.begin() + 3), 4, rng),
                  ContractError);
  SeededRng a(9), b(9);
  auto l1 = build_library(buf, 20, a);
  auto l2 = build_library(buf, 20, b);
  REQUIRE(l1.size() == l2.size());
  CHECK(l1.size() == 20);
  for (int i = 0; i < l1.size(); ++i) {
    CHECK(same(l1.at(i), l2.at(i)));
    CHECK(std::any_of(buf.begin(), buf.end(), [&](const InteractionTrajectory& t) { return same(t, l1.at(i)); }));
  }
}

TEST_CASE("select_trajectory examples") {
  CHECK(select_trajectory({1, 5, 3}) == 1);
  CHECK(select_trajectory({2, 2, 2}) == 0);
  CHECK(select_trajectory({-4, -3, 7}) == 2);
  CHECK_THROWS_AS(select_trajectory({1, std::nan(""), 3}), NumericError);
  CHECK_THROWS_AS(select_trajectory({}), ContractError);
}

TEST_CASE("score_library: constant decoder and H = 1") {
  TrajectoryLibrary lib;
  lib.trajectories = {line_trajectory(0.1, 0), line_trajectory(0, 0.1)};
  RewardModel constant = [](const InteractionTrajectory& t, const InferredStrategy&) {
    return Vector::Constant(static_cast<Eigen::Index>(t.size()), 0.25);
  };
  for (double s : score_library(constant, lib, InferredStrategy{})) CHECK(s == doctest::Approx(10 * 0.25));
  TrajectoryLibrary one;
  one.trajectories = {line_trajectory(0.1, 0, 1)};
  RewardModel single = [](const InteractionTrajectory&, const InferredStrategy&) { return Vector::Constant(1, -3.5); };
  CHECK(score_library(single, one, InferredStrategy{})[0] == -3.5);
}

TEST_CASE("selection is invariant to positive affine maps of the decoded rewards") {
  SeededRng rng(5);
  WorldGeometry w;
  auto lib = build_library(random_circle_buffer(300, rng), 20, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = rng.uniform(-M_PI, M_PI);
    Eigen::Vector2d p(std::cos(theta), std::sin(theta));
    RewardModel truth = [&](const InteractionTrajectory& t, const InferredStrategy&) {
      Vector r(static_cast<Eigen::Index>(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = -(t.points[i].state + t.points[i].action - p).norm();
      }
      return r;
    };
    const double a = rng.uniform(0.1, 5.0), b = rng.uniform(-3.0, 3.0);
    RewardModel mapped = [&](const InteractionTrajectory& t, const InferredStrategy& z) -> Vector {
      return (a * truth(t, z).array() + b).matrix();
    };
    CHECK(select_trajectory(score_library(truth, lib, {})) == select_trajectory(score_library(mapped, lib, {})));
  }
}

TEST_CASE("true-reward decoder picks the best library trajectory (exhaustive execution)") {
  SeededRng rng(6);
  WorldGeometry w;
  auto env = envs::make_environment(EnvKind::kCircle, w);
  auto lib = build_library(random_circle_buffer(400, rng), 20, rng);
  REQUIRE(lib.size() <= 20);
  for (int trial = 0; trial < 50; ++trial) {
    const CircleAngle partner{rng.uniform(-M_PI, M_PI)};
    RewardModel oracle = [&](const InteractionTrajectory& t, const InferredStrategy&) {
      const auto exp = execute_open_loop(*env, t, partner);
      Vector r(static_cast<Eigen::Index>(exp.size()));
      for (std::size_t i = 0; i < exp.size(); ++i) r[static_cast<Eigen::Index>(i)] = exp.steps[i].reward;
      return r;
    };
    const int pick = select_trajectory(score_library(oracle, lib, {}));
    const auto actual = realized(*env, lib, partner);
    const int best = static_cast<int>(std::max_element(actual.begin(), actual.end()) - actual.begin());
    CHECK(pick == best);
  }
}

TEST_CASE("execute_open_loop: determinism and the zero-action closed form") {
  WorldGeometry w;
  auto env = envs::make_environment(EnvKind::kCircle, w);
  const CircleAngle partner{0.7};
  auto t = line_trajectory(0.05, -0.1);
  auto e1 = execute_open_loop(*env, t, partner);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(e1.steps[i].state.isApprox(t.points[i].state, 1e-12));
  auto zero = execute_open_loop(*env, line_trajectory(0, 0), partner);
  CHECK(zero.total_reward() == doctest::Approx(-10.0 * w.circle.radius));
  CHECK_THROWS_AS(execute_open_loop(*env, line_trajectory(0, 0, 3), partner), StructuralError);
}

TEST_CASE("library checkpoint round trip") {
  SeededRng rng(7);
  auto lib = build_library(random_circle_buffer(50, rng), 10, rng);
  nn::Checkpoint ck;
  lib.save(ck, "library/");
  auto back = TrajectoryLibrary::load(ck, "library/");
  REQUIRE(back.size() == lib.size());
  for (int i = 0; i < lib.size(); ++i) CHECK(same(back.at(i), lib.at(i)));
}

TEST_CASE("TransferAgent: policy frozen, encoder and decoder adapt") {
  SeededRng rng(8);
  WorldGeometry w;
  auto env = envs::make_environment(EnvKind::kCircle, w);
  sac::LearnerConfig lc;
  lc.sac.hidden = {16, 16};
  sac::Learner trained(env->spec(), lc, rng);
  nn::Checkpoint ck;
  trained.save(ck);
  auto lib = build_library(random_circle_buffer(100, rng), 20, rng);
  TransferConfig tc;
  TransferAgent agent(env->spec(), lc, ck, lib, tc, rng);
  const auto policy = agent.policy_fingerprint();
  const auto enc = agent.representation().encoder().params().fingerprint();
  double theta = 0.3;
  for (int i = 0; i < 30; ++i) {
    auto out = agent.play(*env, CircleAngle{theta}, rng);
    CHECK(out.experience.size() == 10);
    theta += 0.4;
  }
  CHECK(agent.policy_fingerprint() == policy);
  CHECK(agent.representation().encoder().params().fingerprint() != enc);
  CHECK(agent.buffer().size() == 30);

  TransferConfig bad;
  bad.library_size = 5;
  CHECK_THROWS_AS(TransferAgent(env->spec(), lc, ck, lib, bad, rng), ConfigError);
  auto sac_only = lc;
  sac_only.variant = sac::Variant::kSac;
  CHECK_THROWS_AS(TransferAgent(env->spec(), sac_only, ck, lib, tc, rng), ConfigError);
}
