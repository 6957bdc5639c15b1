#include "rili/transfer/transfer.hpp"

#include <cmath>
#include <limits>

namespace rili::transfer {

std::string to_string(TransferMode m) {
  switch (m) {
    case TransferMode::kTransfer: return "transfer";
    case TransferMode::kScratch: return "scratch";
    case TransferMode::kResume: return "resume";
  }
  return "?";
}

TransferMode parse_transfer_mode(std::string_view name) {
  if (name == "transfer") return TransferMode::kTransfer;
  if (name == "scratch") return TransferMode::kScratch;
  if (name == "resume") return TransferMode::kResume;
  throw ConfigError("unknown transfer mode '" + std::string(name) + "'");
}

TransferAgent::TransferAgent(const envs::EnvSpec& spec, const sac::LearnerConfig& learner_config,
                             const nn::Checkpoint& trained, TrajectoryLibrary library, TransferConfig config,
                             SeededRng& rng)
    : config_(config),
      learner_(spec, learner_config, rng),
      library_(std::move(library)),
      window_(learner_.history().capacity(), spec.shape()),
      buffer_(learner_config.representation.buffer_capacity) {
  if (!sac::uses_encoder(learner_config.variant)) throw ConfigError("transfer needs an encoder variant");
  if (config_.library_size < kLibraryMin || config_.library_size > kLibraryMax) {
    throw ConfigError("library size must lie in [10, 80]");
  }
  if (library_.size() < 1) throw ConfigError("transfer library is empty");
  if (config_.rep_updates_per_interaction < 0 || config_.rep_batch_size < 1) {
    throw ConfigError("invalid transfer representation schedule");
  }
  learner_.load(trained);
  learner_.representation().reset_optimizers();
}

InferredStrategy TransferAgent::infer() const { return learner_.representation().predict(window_); }

std::vector<double> TransferAgent::scores(const InferredStrategy& z) const {
  return score_library(decoder_model(learner_.representation()), library_, z);
}

int TransferAgent::choose() const { return select_trajectory(scores(infer())); }

double TransferAgent::observe(InteractionExperience exp, SeededRng& rng) {
  exp.index = next_index_++;
  buffer_.add(learner_.featurizer(), window_, exp);
  window_.push(std::move(exp));
  if (config_.rep_updates_per_interaction == 0) return std::numeric_limits<double>::quiet_NaN();
  // The new-partner buffer starts tiny; batches grow with it.
  const int batch = std::min<int>(config_.rep_batch_size, static_cast<int>(buffer_.size()));
  return learner_.representation().train(buffer_, config_.rep_updates_per_interaction, batch, rng);
}

sac::InteractionOutcome TransferAgent::play(envs::Environment& env, const TrueStrategy& truth, SeededRng& rng) {
  sac::InteractionOutcome out;
  out.z = infer();
  const int pick = select_trajectory(scores(out.z));
  out.experience = execute_open_loop(env, library_.at(pick), truth);
  out.rep_loss = observe(out.experience, rng);
  out.experience.index = next_index_ - 1;
  out.critic_loss = out.actor_loss = std::numeric_limits<double>::quiet_NaN();
  out.alpha = learner_.agent().alpha();
  return out;
}

void TransferAgent::save(nn::Checkpoint& ck) const {
  learner_.save(ck);
  library_.save(ck, "library/");
}

}  // namespace rili::transfer
