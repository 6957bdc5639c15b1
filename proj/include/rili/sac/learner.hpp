#pragma once

#include <optional>

#include "rili/core/history.hpp"
#include "rili/envs/environment.hpp"
#include "rili/model/representation.hpp"
#include "rili/sac/agent.hpp"
#include "rili/sac/replay.hpp"
#include "rili/sac/rollout.hpp"

namespace rili::sac {

struct LearnerConfig {
  Variant variant = Variant::kRili;
  SacConfig sac;
  model::RepresentationConfig representation;  // history_length is overridden by the variant
  int rili_history = kDefaultHistoryLength;
  int rep_updates_per_interaction = 1;
  double sili_beta = 10.0;
};

struct InteractionOutcome {
  InteractionExperience experience;
  InferredStrategy z;
  double rep_loss = 0.0;  // NaN when no representation update ran
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  int sac_updates = 0;
};

// The ego side of the repeated game: SAC policy, optional encoder/decoder,
// replay, and the history window. It never sees the partner's strategy except
// through the Oracle vector, which the caller supplies.
class Learner {
 public:
  Learner(const envs::EnvSpec& spec, LearnerConfig config, SeededRng& rng);

  const LearnerConfig& config() const { return config_; }
  Variant variant() const { return config_.variant; }
  const model::Featurizer& featurizer() const { return featurizer_; }
  SacAgent& agent() { return agent_; }
  const SacAgent& agent() const { return agent_; }
  model::RepresentationLearner& representation() { return rep_; }
  const model::RepresentationLearner& representation() const { return rep_; }
  const HistoryWindow& history() const { return window_; }
  const ReplayBuffer& replay() const { return replay_; }
  const model::RepresentationBuffer& representation_buffer() const { return rep_buffer_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t interactions() const { return next_index_; }

  // The strategy the policy will be conditioned on for the next interaction.
  InferredStrategy infer(const std::optional<Vector>& oracle = std::nullopt) const;

  // Plays one interaction in explore mode, stores it and runs the updates.
  InteractionOutcome train_interaction(envs::Environment& env, const TrueStrategy& truth,
                                       const std::optional<Vector>& oracle, SeededRng& rng);
  // Deterministic policy, no learning; the history still advances.
  InteractionOutcome eval_interaction(envs::Environment& env, const TrueStrategy& truth,
                                      const std::optional<Vector>& oracle, SeededRng& rng);

  // States and applied actions of the last n stored interactions, oldest
  // first.
  std::vector<InteractionTrajectory> recent_trajectories(std::size_t n) const;

  // Empties the history window (a new partner session starts).
  void reset_history();

  void save(nn::Checkpoint& ck) const;
  // Loads networks and optimizer state; replay and history stay as they are.
  void load(const nn::Checkpoint& ck);

 private:
  void record_history(const InteractionExperience& exp);

  LearnerConfig config_;
  envs::EnvSpec spec_;
  model::Featurizer featurizer_;
  SacAgent agent_;
  model::RepresentationLearner rep_;
  HistoryWindow window_;
  ReplayBuffer replay_;
  model::RepresentationBuffer rep_buffer_;
  std::int64_t env_steps_ = 0;
  std::int64_t next_index_ = 0;
};

}  // namespace rili::sac
