#include "rili/sac/learner.hpp"

#include <cmath>
#include <limits>

namespace rili::sac {

namespace {

model::RepresentationConfig rep_config(const LearnerConfig& c) {
  auto r = c.representation;
  // Variants without an encoder still carry a one-slot window so that
  // checkpoints and history handling look the same.
  r.history_length = std::max(1, history_length_for(c.variant, c.rili_history));
  return r;
}

}  // namespace

Learner::Learner(const envs::EnvSpec& spec, LearnerConfig config, SeededRng& rng)
    : config_(std::move(config)),
      spec_(spec),
      featurizer_(spec.shape(), spec.action_low, spec.action_high, spec.reward_scale),
      agent_(spec.state_dim, spec.action_dim, config_.sac, rng),
      rep_(featurizer_, rep_config(config_), rng),
      window_(rep_config(config_).history_length, spec.shape()),
      replay_(config_.sac.replay_capacity),
      rep_buffer_(config_.representation.buffer_capacity) {
  if (config_.rep_updates_per_interaction < 0) throw ConfigError("representation updates must be >= 0");
  if (config_.sili_beta < 0) throw ConfigError("stability bonus weight must be >= 0");
}

InferredStrategy Learner::infer(const std::optional<Vector>& oracle) const {
  switch (config_.variant) {
    case Variant::kSac: return InferredStrategy{};
    case Variant::kOracle:
      if (!oracle) throw ContractError("the Oracle variant needs the true-strategy embedding");
      return InferredStrategy::from_vector(*oracle);
    default: return rep_.predict(window_);
  }
}

void Learner::record_history(const InteractionExperience& exp) {
  if (uses_encoder(config_.variant)) rep_buffer_.add(featurizer_, window_, exp);
  window_.push(exp);
}

InteractionOutcome Learner::train_interaction(envs::Environment& env, const TrueStrategy& truth,
                                              const std::optional<Vector>& oracle, SeededRng& rng) {
  InteractionOutcome out;
  out.z = infer(oracle);
  ReplayInteraction rec;
  if (uses_encoder(config_.variant)) rec.window = featurizer_.window_features(window_);
  const auto source = env_steps_ < config_.sac.warmup_steps ? ActionSource::kUniform : ActionSource::kPolicy;
  out.experience = run_interaction(agent_, env, featurizer_, out.z, truth, ActMode::kExplore, rng, source, &rec);
  out.experience.index = next_index_++;
  env_steps_ += static_cast<std::int64_t>(out.experience.size());
  record_history(out.experience);

  if (config_.variant == Variant::kSili) {
    // Reward the interaction for keeping the inferred strategy where it was.
    const auto z_next = rep_.predict(window_);
    rec.rewards(0, rec.rewards.cols() - 1) += static_cast<float>(stability_bonus(z_next, out.z, config_.sili_beta));
  }
  replay_.add(std::move(rec));

  out.rep_loss = std::numeric_limits<double>::quiet_NaN();
  const auto rep_batch = static_cast<std::size_t>(config_.representation.batch_size);
  if (uses_encoder(config_.variant) && config_.rep_updates_per_interaction > 0 && rep_buffer_.size() >= rep_batch) {
    out.rep_loss = rep_.train(rep_buffer_, config_.rep_updates_per_interaction, config_.representation.batch_size, rng);
  }

  out.critic_loss = out.actor_loss = std::numeric_limits<double>::quiet_NaN();
  out.alpha = agent_.alpha();
  if (env_steps_ >= config_.sac.warmup_steps) {
    const int n = static_cast<int>(out.experience.size()) * config_.sac.updates_per_step;
    ReplayBuffer::Encode encode = [this](const std::vector<Matrix<float>>& slots) {
      return rep_.predict_batch(slots);
    };
    const ReplayBuffer::Encode* enc = uses_encoder(config_.variant) ? &encode : nullptr;
    double cl = 0, al = 0;
    for (int u = 0; u < n; ++u) {
      const auto refs = replay_.sample(static_cast<std::size_t>(config_.sac.batch_size), rng);
      const auto report = agent_.update(replay_.gather(refs, enc), rng);
      cl += report.critic_loss;
      al += report.actor_loss;
    }
    if (n > 0) {
      out.critic_loss = cl / n;
      out.actor_loss = al / n;
      out.alpha = agent_.alpha();
    }
    out.sac_updates = n;
  }
  return out;
}

InteractionOutcome Learner::eval_interaction(envs::Environment& env, const TrueStrategy& truth,
                                             const std::optional<Vector>& oracle, SeededRng& rng) {
  InteractionOutcome out;
  out.z = infer(oracle);
  out.experience = run_interaction(agent_, env, featurizer_, out.z, truth, ActMode::kEval, rng);
  out.experience.index = next_index_++;
  window_.push(out.experience);
  out.rep_loss = out.critic_loss = out.actor_loss = std::numeric_limits<double>::quiet_NaN();
  out.alpha = agent_.alpha();
  return out;
}

std::vector<InteractionTrajectory> Learner::recent_trajectories(std::size_t n) const {
  const auto& items = replay_.items();
  const std::size_t start = items.size() > n ? items.size() - n : 0;
  std::vector<InteractionTrajectory> out;
  out.reserve(items.size() - start);
  for (std::size_t i = start; i < items.size(); ++i) {
    const auto& it = items[i];
    InteractionTrajectory t;
    for (Eigen::Index c = 0; c < it.actions.cols(); ++c) {
      t.points.push_back({it.states.col(c).cast<double>(), featurizer_.denormalize_action(it.actions.col(c).cast<double>())});
    }
    out.push_back(std::move(t));
  }
  return out;
}

void Learner::reset_history() {
  window_ = HistoryWindow(window_.capacity(), spec_.shape());
}

void Learner::save(nn::Checkpoint& ck) const {
  ck.put_text("learner/variant", to_string(config_.variant));
  ck.put_int("learner/env_steps", env_steps_);
  ck.put_int("learner/interactions", next_index_);
  agent_.save(ck, "sac/");
  rep_.save(ck, "rep/");
}

void Learner::load(const nn::Checkpoint& ck) {
  agent_.load(ck, "sac/");
  rep_.load(ck, "rep/");
  env_steps_ = ck.integer("learner/env_steps");
}

}  // namespace rili::sac
