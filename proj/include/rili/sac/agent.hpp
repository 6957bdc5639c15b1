#pragma once

#include <string>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/core/types.hpp"
#include "rili/nn/adam.hpp"
#include "rili/nn/checkpoint.hpp"
#include "rili/sac/losses.hpp"

namespace rili::sac {

struct SacConfig {
  std::vector<int> hidden{256, 256};
  double gamma = 0.99;
  double tau = 5e-3;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  double initial_alpha = 1.0;
  int batch_size = 256;
  int warmup_steps = 1000;
  std::size_t replay_capacity = 1000000;
  int updates_per_step = 1;
};

struct SacReport {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
};

enum class ActMode { kExplore, kEval };

// Strategy-conditioned SAC. The policy sees s | z and outputs actions in
// [-1, 1]; callers map them to the environment's box.
class SacAgent {
 public:
  SacAgent() = default;
  SacAgent(int state_dim, int action_dim, SacConfig config, SeededRng& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int obs_dim() const { return state_dim_ + kLatentDim; }
  const SacConfig& config() const { return config_; }
  SacConfig& config() { return config_; }

  double alpha() const;
  double target_entropy() const { return -static_cast<double>(action_dim_); }

  // Returns a unit-box action for one state.
  Vector select_action(const Vector& state, const InferredStrategy& z, ActMode mode, SeededRng& rng) const;
  // Deterministic squashed mean, batched: obs_dim x B -> action_dim x B.
  Matrix<float> mean_actions(const Matrix<float>& obs) const;

  SacReport update(const SacBatch<float>& batch, SeededRng& rng);

  const Mlp<float>& actor() const { return actor_; }
  const Mlp<float>& q1() const { return q1_; }
  const Mlp<float>& q2() const { return q2_; }
  const Mlp<float>& q1_target() const { return q1_targ_; }
  const Mlp<float>& q2_target() const { return q2_targ_; }
  Mlp<float>& actor() { return actor_; }
  Mlp<float>& q1() { return q1_; }
  Mlp<float>& q2() { return q2_; }

  // Hash over every learnable parameter (actor, critics, targets, alpha).
  std::uint64_t fingerprint() const;
  std::uint64_t policy_fingerprint() const { return actor_.params().fingerprint(); }

  void save(nn::Checkpoint& ck, const std::string& prefix) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);

 private:
  Matrix<float> noise(Eigen::Index cols, SeededRng& rng) const;

  int state_dim_ = 1;
  int action_dim_ = 1;
  SacConfig config_;
  Mlp<float> actor_, q1_, q2_, q1_targ_, q2_targ_;
  nn::ParamSet<float> log_alpha_;
  nn::Adam<float> actor_opt_, q1_opt_, q2_opt_, alpha_opt_;
};

}  // namespace rili::sac
