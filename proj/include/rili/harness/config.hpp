#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rili/core/env_kind.hpp"
#include "rili/core/kinematics.hpp"
#include "rili/sac/learner.hpp"
#include "rili/transfer/transfer.hpp"

namespace rili::harness {

struct TransferSettings {
  std::string new_dynamics = "new";
  int interactions = 500;
  int library_size = 20;
  int library_source = 5000;  // most recent training trajectories fed to k-means
  int rep_updates_per_interaction = 1;
  std::vector<std::string> modes{"scratch", "resume", "transfer"};
};

struct StudySettings {
  int sessions = 6;
  int interactions = 35;
  std::vector<std::string> partners{"top_down", "middle_out", "ends_in"};
  int last_n = 5;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::kCircle;
  sac::LearnerConfig learner;
  std::vector<std::string> pool;
  double switch_probability = 0.01;
  std::int64_t train_interactions = 30000;
  int eval_interactions = 50000;
  std::int64_t checkpoint_every = 0;  // 0: only at the end
  std::vector<std::uint64_t> seeds{0};
  std::optional<double> reward_scale;
  WorldGeometry geometry;
  TransferSettings transfer;
  StudySettings study;
  std::string output_dir = "runs/experiment";

  // Throws ConfigError on anything inconsistent.
  void validate() const;
  double effective_reward_scale() const;
};

// Defaults for one environment (pool, budgets, library size).
ExperimentConfig default_config(EnvKind env);

nlohmann::json to_json(const ExperimentConfig& cfg);
// Starts from default_config(env) and applies every key present. Unknown keys
// are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// output_dir, placed under $RILI_OUTPUT_ROOT when that is set and the
// directory is relative.
std::filesystem::path output_root(const ExperimentConfig& cfg);

}  // namespace rili::harness
