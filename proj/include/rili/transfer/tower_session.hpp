#pragma once

#include <array>
#include <string>
#include <vector>

#include "rili/transfer/transfer.hpp"

namespace rili::transfer {

// One completed round of the tower game.
struct TowerRecord {
  int interaction = 0;
  std::array<double, 4> distances{};
  TowerOrder order;
  double reward = 0.0;  // game score, 0 (correct) down to -800
};

inline constexpr const char* kTowerLogHeader =
    "session,interaction,distances_0,distances_1,distances_2,distances_3,order_0,order_1,order_2,order_3,reward";

std::string tower_log_line(const std::string& session, const TowerRecord& r);

// The RILI-Transfer side of the tower game with an external partner: the
// agent proposes a layout, the partner answers with the tower it built, the
// agent scores it against its hidden target and adapts. Whoever builds the
// towers (a scripted rule or a person over the wire) sees only layouts.
class TowerSession {
 public:
  TowerSession(const sac::LearnerConfig& learner, const nn::Checkpoint& checkpoint, TrajectoryLibrary library,
               TransferConfig transfer, TowerGeometry geometry, std::uint64_t seed, int max_interactions,
               double reward_scale = envs::default_reward_scale(EnvKind::kTower));

  int next_interaction() const { return static_cast<int>(records_.size()); }
  int max_interactions() const { return max_; }
  bool complete() const { return next_interaction() >= max_; }
  std::uint64_t seed() const { return seed_; }

  // Block distances for the pending interaction. ContractError once complete.
  std::array<double, 4> layout() const;

  // SequencingError unless interaction == next_interaction() and the session
  // is active; StructuralError unless order is a permutation. Neither
  // changes any state.
  const TowerRecord& submit(int interaction, const TowerOrder& order);

  const std::vector<TowerRecord>& records() const { return records_; }

 private:
  TowerGeometry geometry_;
  std::uint64_t seed_;
  int max_;
  SeededRng rng_;
  envs::TowerEnv env_;
  std::unique_ptr<TransferAgent> agent_;
  int pending_ = 0;
  std::vector<TowerRecord> records_;
};

}  // namespace rili::transfer
