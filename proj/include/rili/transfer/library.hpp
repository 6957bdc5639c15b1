#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/core/types.hpp"
#include "rili/envs/environment.hpp"
#include "rili/model/representation.hpp"
#include "rili/nn/checkpoint.hpp"

namespace rili::transfer {

inline constexpr int kLibraryMin = 10;
inline constexpr int kLibraryMax = 80;
inline constexpr int kKmeansIterations = 50;

// Representative trajectories picked out of prior experience. Every entry is
// a trajectory that was actually executed.
struct TrajectoryLibrary {
  std::vector<InteractionTrajectory> trajectories;
  std::string source_id;

  int size() const { return static_cast<int>(trajectories.size()); }
  const InteractionTrajectory& at(int i) const { return trajectories.at(static_cast<std::size_t>(i)); }

  void save(nn::Checkpoint& ck, const std::string& prefix) const;
  static TrajectoryLibrary load(const nn::Checkpoint& ck, const std::string& prefix);
};

// k-means (k-means++ seeding, at most 50 Lloyd iterations) over standardized
// flattened state|action vectors. Each centroid is replaced by its nearest
// buffer trajectory and duplicates are dropped, so the result can hold fewer
// than k entries when the buffer has fewer distinct trajectories.
TrajectoryLibrary build_library(const std::vector<InteractionTrajectory>& buffer, int k, SeededRng& rng);

// Per-step reward prediction for one trajectory under z.
using RewardModel = std::function<Vector(const InteractionTrajectory&, const InferredStrategy&)>;

RewardModel decoder_model(const model::RepresentationLearner& learner);

// Sum of predicted per-step rewards for every library entry.
std::vector<double> score_library(const RewardModel& model, const TrajectoryLibrary& lib, const InferredStrategy& z);

// Argmax, lowest index on ties. Throws NumericError on NaN.
int select_trajectory(const std::vector<double>& scores);

// Resets env with `truth` and replays the trajectory's actions.
InteractionExperience execute_open_loop(envs::Environment& env, const InteractionTrajectory& traj,
                                        const TrueStrategy& truth);

}  // namespace rili::transfer
