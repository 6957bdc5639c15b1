#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rili/harness/config.hpp"
#include "rili/harness/metrics.hpp"
#include "rili/nn/checkpoint.hpp"

namespace rili::harness {

// Named random streams forked from one seed.
enum Stream : std::uint64_t { kInit = 1, kScheduler, kPartner, kAgent, kEnv, kLibrary, kEval };

struct TrainResult {
  std::unique_ptr<sac::Learner> learner;
  std::vector<MetricsRow> rows;
  nn::Checkpoint checkpoint;  // learner, library (when built) and config echo
};

using ProgressFn = std::function<void(const MetricsRow&)>;

// Trains one seed against the switching partner pool. When `dir` is
// non-empty, metrics, timing, partner log and checkpoints are written there.
TrainResult train_changing_partners(const ExperimentConfig& cfg, std::uint64_t seed,
                                    const std::filesystem::path& dir = {}, const ProgressFn& progress = {});

// Rebuilds a learner from a training checkpoint.
std::unique_ptr<sac::Learner> load_learner(const ExperimentConfig& cfg, const nn::Checkpoint& ck, std::uint64_t seed);

struct DynamicsScore {
  std::string dynamics_id;
  double mean_cost = 0.0;
  double sem = 0.0;
};

struct EvalTable {
  std::vector<DynamicsScore> per_dynamics;
  double average = 0.0;  // mean of the per-dynamics means
  double average_sem = 0.0;
};

// Fixed-dynamics evaluation (no switching), deterministic policy, fresh
// history per dynamics. Costs are negated raw returns.
EvalTable evaluate_per_dynamics(const ExperimentConfig& cfg, const nn::Checkpoint& ck,
                                const std::vector<std::string>& dynamics, int n_eval, std::uint64_t seed);

// Mean cost of uniform random actions against the given dynamics.
double random_policy_cost(const ExperimentConfig& cfg, const std::string& dynamics, int n, std::uint64_t seed);

void write_eval_csv(const std::filesystem::path& path, const std::string& label, std::uint64_t seed,
                    const EvalTable& table, bool header);

struct TransferCurve {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<double> returns;
  double mean_first(std::size_t n) const;
};

// SCRATCH / RESUME / TRANSFER against cfg.transfer.new_dynamics. All modes of
// one seed see the same partner stream.
std::vector<TransferCurve> run_transfer_experiment(const ExperimentConfig& cfg, const nn::Checkpoint& ck,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   const std::filesystem::path& dir = {});

struct StudySession {
  std::string agent;    // "rili_transfer" or "sili"
  std::string partner;  // tower rule
  int session = 0;
  std::vector<double> rewards;
  double first_mean(int n) const;
  double last_mean(int n) const;
};

// Scripted-partner version of the tower study. `rili` must hold a RILI tower
// checkpoint with library; `sili` a SILI tower checkpoint, which keeps
// learning online during its sessions.
std::vector<StudySession> run_study_sim(const ExperimentConfig& cfg, const nn::Checkpoint& rili,
                                        const nn::Checkpoint& sili, std::uint64_t seed,
                                        const std::filesystem::path& dir = {});

// Seeds shared by the study simulation and anything replaying its sessions
// (for instance a scripted client of the partner service).
std::uint64_t study_session_seed(std::uint64_t seed, std::size_t partner, int session);
SeededRng study_partner_rng(std::uint64_t session_seed);

transfer::TransferConfig transfer_config(const ExperimentConfig& cfg);

// Trajectories for the transfer library from the learner's replay.
transfer::TrajectoryLibrary library_from_learner(const ExperimentConfig& cfg, const sac::Learner& learner,
                                                 std::uint64_t seed);

}  // namespace rili::harness
