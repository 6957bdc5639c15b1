#pragma once

#include "rili/sac/learner.hpp"
#include "rili/transfer/library.hpp"

namespace rili::transfer {

enum class TransferMode { kTransfer, kScratch, kResume };

std::string to_string(TransferMode m);
TransferMode parse_transfer_mode(std::string_view name);

struct TransferConfig {
  int library_size = 20;
  int rep_updates_per_interaction = 1;
  int rep_batch_size = 64;
};

// Frozen policy plus a live encoder/decoder. Acts by scoring the library
// under the inferred strategy and replaying the best entry open-loop.
class TransferAgent {
 public:
  TransferAgent(const envs::EnvSpec& spec, const sac::LearnerConfig& learner_config, const nn::Checkpoint& trained,
                TrajectoryLibrary library, TransferConfig config, SeededRng& rng);

  const TrajectoryLibrary& library() const { return library_; }
  const model::RepresentationLearner& representation() const { return learner_.representation(); }
  const HistoryWindow& history() const { return window_; }
  const model::RepresentationBuffer& buffer() const { return buffer_; }
  std::uint64_t policy_fingerprint() const { return learner_.agent().policy_fingerprint(); }

  InferredStrategy infer() const;
  std::vector<double> scores(const InferredStrategy& z) const;
  // Index of the trajectory the agent would play next.
  int choose() const;

  // Records a finished interaction (however it was executed), then runs the
  // representation update on the new-partner data. Returns the mean loss,
  // NaN when no update ran.
  double observe(InteractionExperience exp, SeededRng& rng);

  // choose + execute_open_loop + observe.
  sac::InteractionOutcome play(envs::Environment& env, const TrueStrategy& truth, SeededRng& rng);

  void save(nn::Checkpoint& ck) const;

 private:
  TransferConfig config_;
  sac::Learner learner_;
  TrajectoryLibrary library_;
  HistoryWindow window_;
  model::RepresentationBuffer buffer_;
  std::int64_t next_index_ = 0;
};

}  // namespace rili::transfer
