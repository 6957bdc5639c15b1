#include "rili/transfer/library.hpp"

#include <cmath>
#include <limits>

#include "rili/core/errors.hpp"

namespace rili::transfer {

namespace {

using Mat = Eigen::MatrixXd;

// One column per trajectory: s_0 | a_0 | s_1 | a_1 ...
Mat flatten(const std::vector<InteractionTrajectory>& buffer) {
  const auto& p0 = buffer.front().points.front();
  const auto sd = p0.state.size(), ad = p0.action.size();
  const auto h = static_cast<Eigen::Index>(buffer.front().size());
  Mat x(h * (sd + ad), static_cast<Eigen::Index>(buffer.size()));
  for (std::size_t j = 0; j < buffer.size(); ++j) {
    const auto& traj = buffer[j];
    if (static_cast<Eigen::Index>(traj.size()) != h) throw StructuralError("library buffer mixes trajectory lengths");
    Eigen::Index r = 0;
    for (const auto& p : traj.points) {
      if (p.state.size() != sd || p.action.size() != ad) throw StructuralError("library buffer mixes dimensions");
      x.col(static_cast<Eigen::Index>(j)).segment(r, sd) = p.state;
      x.col(static_cast<Eigen::Index>(j)).segment(r + sd, ad) = p.action;
      r += sd + ad;
    }
  }
  return x;
}

void standardize(Mat& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    x.row(i).array() -= mean;
    const double sd = std::sqrt(x.row(i).squaredNorm() / static_cast<double>(x.cols()));
    if (sd > 1e-12) x.row(i) /= sd;
  }
}

// Squared distance from every column of x to its nearest center.
Eigen::VectorXd nearest_sq(const Mat& x, const Mat& centers, Eigen::Index n_centers, std::vector<int>* assign) {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(x.cols(), std::numeric_limits<double>::infinity());
  if (assign) assign->assign(static_cast<std::size_t>(x.cols()), 0);
  for (Eigen::Index c = 0; c < n_centers; ++c) {
    const Eigen::VectorXd dc = (x.colwise() - centers.col(c)).colwise().squaredNorm().transpose();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (dc[j] < d[j]) {
        d[j] = dc[j];
        if (assign) (*assign)[static_cast<std::size_t>(j)] = static_cast<int>(c);
      }
    }
  }
  return d;
}

}  // namespace

TrajectoryLibrary build_library(const std::vector<InteractionTrajectory>& buffer, int k, SeededRng& rng) {
  if (k < 1) throw ContractError("library size must be >= 1");
  if (buffer.size() < static_cast<std::size_t>(k)) throw ContractError("trajectory buffer is smaller than K");
  Mat x = flatten(buffer);
  standardize(x);
  const Eigen::Index n = x.cols();

  // k-means++ seeding. Stops early when every point already sits on a center.
  Mat centers(x.rows(), k);
  Eigen::Index m = 0;
  centers.col(m++) = x.col(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  while (m < k) {
    const Eigen::VectorXd d = nearest_sq(x, centers, m, nullptr);
    const double total = d.sum();
    if (!(total > 0.0)) break;
    double u = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      u -= d[j];
      if (u < 0.0 && d[j] > 0.0) {
        pick = j;
        break;
      }
    }
    centers.col(m++) = x.col(pick);
  }

  std::vector<int> assign;
  for (int it = 0; it < kKmeansIterations; ++it) {
    nearest_sq(x, centers, m, &assign);
    Mat sums = Mat::Zero(x.rows(), m);
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      sums.col(assign[static_cast<std::size_t>(j)]) += x.col(j);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])];
    }
    bool moved = false;
    for (Eigen::Index c = 0; c < m; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;  // empty cluster keeps its center
      const Eigen::VectorXd next = sums.col(c) / counts[static_cast<std::size_t>(c)];
      if (next != centers.col(c)) moved = true;
      centers.col(c) = next;
    }
    if (!moved) break;
  }

  // Snap each center to the closest real trajectory.
  TrajectoryLibrary lib;
  std::vector<Eigen::Index> picked;
  for (Eigen::Index c = 0; c < m; ++c) {
    Eigen::Index best = 0;
    (x.colwise() - centers.col(c)).colwise().squaredNorm().minCoeff(&best);
    bool dup = false;
    for (Eigen::Index p : picked) dup = dup || x.col(p) == x.col(best);
    if (dup) continue;
    picked.push_back(best);
    lib.trajectories.push_back(buffer[static_cast<std::size_t>(best)]);
  }
  lib.source_id = "buffer:" + std::to_string(buffer.size());
  return lib;
}

RewardModel decoder_model(const model::RepresentationLearner& learner) {
  return [&learner](const InteractionTrajectory& traj, const InferredStrategy& z) -> Vector {
    return learner.decode(traj, z).cast<double>();
  };
}

std::vector<double> score_library(const RewardModel& model, const TrajectoryLibrary& lib, const InferredStrategy& z) {
  std::vector<double> scores;
  scores.reserve(lib.trajectories.size());
  for (const auto& traj : lib.trajectories) {
    const Vector r = model(traj, z);
    if (r.size() != static_cast<Eigen::Index>(traj.size())) throw StructuralError("reward model returned wrong length");
    scores.push_back(r.sum());
  }
  return scores;
}

int select_trajectory(const std::vector<double>& scores) {
  if (scores.empty()) throw ContractError("no trajectories to select from");
  int best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw NumericError("trajectory score is NaN");
    if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

InteractionExperience execute_open_loop(envs::Environment& env, const InteractionTrajectory& traj,
                                        const TrueStrategy& truth) {
  if (static_cast<int>(traj.size()) != env.spec().horizon) throw StructuralError("trajectory length differs from H");
  InteractionExperience exp;
  Vector obs = env.reset(truth);
  for (const auto& p : traj.points) {
    auto r = env.step(p.action);
    exp.steps.push_back({obs, r.applied_action, r.reward});
    obs = r.observation;
  }
  return exp;
}

void TrajectoryLibrary::save(nn::Checkpoint& ck, const std::string& prefix) const {
  ck.put_int(prefix + "size", size());
  ck.put_text(prefix + "source", source_id);
  for (int i = 0; i < size(); ++i) {
    const auto& t = at(i);
    Mat s(t.points[0].state.size(), static_cast<Eigen::Index>(t.size()));
    Mat a(t.points[0].action.size(), static_cast<Eigen::Index>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
      s.col(static_cast<Eigen::Index>(j)) = t.points[j].state;
      a.col(static_cast<Eigen::Index>(j)) = t.points[j].action;
    }
    ck.put_tensor(prefix + "states" + std::to_string(i), s);
    ck.put_tensor(prefix + "actions" + std::to_string(i), a);
  }
}

TrajectoryLibrary TrajectoryLibrary::load(const nn::Checkpoint& ck, const std::string& prefix) {
  TrajectoryLibrary lib;
  const auto n = ck.integer(prefix + "size");
  lib.source_id = ck.text(prefix + "source");
  for (std::int64_t i = 0; i < n; ++i) {
    const auto s = ck.tensor<double>(prefix + "states" + std::to_string(i));
    const auto a = ck.tensor<double>(prefix + "actions" + std::to_string(i));
    if (s.cols() != a.cols()) throw StructuralError("library entry has mismatched lengths");
    InteractionTrajectory t;
    for (Eigen::Index j = 0; j < s.cols(); ++j) t.points.push_back({s.col(j), a.col(j)});
    lib.trajectories.push_back(std::move(t));
  }
  return lib;
}

}  // namespace rili::transfer
