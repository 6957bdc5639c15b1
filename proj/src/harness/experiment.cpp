#include "rili/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rili/core/log.hpp"
#include "rili/partners/scheduler.hpp"
#include "rili/transfer/tower_session.hpp"

namespace rili::harness {

namespace {

std::unique_ptr<envs::Environment> make_env(const ExperimentConfig& cfg, std::uint64_t seed) {
  return envs::make_environment(cfg.env, cfg.geometry, seed, cfg.effective_reward_scale());
}

std::optional<Vector> oracle_for(const ExperimentConfig& cfg, const TrueStrategy& truth) {
  if (cfg.learner.variant != sac::Variant::kOracle) return std::nullopt;
  return partners::oracle_embedding(truth);
}

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  end = std::min(end, v.size());
  if (begin >= end) return std::nan("");
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end),
                         0.0) /
         static_cast<double>(end - begin);
}

// Walks one partner through its dynamics, interaction by interaction.
class PartnerStream {
 public:
  PartnerStream(partners::LatentDynamics dyn, SeededRng rng) : dyn_(std::move(dyn)), rng_(rng) {}

  const TrueStrategy& next(const std::optional<InteractionExperience>& prev) {
    truth_ = prev ? dyn_.next_strategy(*prev, truth_, rng_) : dyn_.initial_strategy(rng_);
    return truth_;
  }

 private:
  partners::LatentDynamics dyn_;
  SeededRng rng_;
  TrueStrategy truth_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

SeededRng study_partner_rng(std::uint64_t session_seed) { return SeededRng(session_seed).fork(kPartner); }

transfer::TransferConfig transfer_config(const ExperimentConfig& cfg) {
  return {cfg.transfer.library_size, cfg.transfer.rep_updates_per_interaction, cfg.learner.representation.batch_size};
}

transfer::TrajectoryLibrary library_from_learner(const ExperimentConfig& cfg, const sac::Learner& learner,
                                                 std::uint64_t seed) {
  auto trajectories = learner.recent_trajectories(static_cast<std::size_t>(cfg.transfer.library_source));
  SeededRng rng = SeededRng(seed).fork(kLibrary);
  return transfer::build_library(trajectories, cfg.transfer.library_size, rng);
}

TrainResult train_changing_partners(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir,
                                    const ProgressFn& progress) {
  cfg.validate();
  const SeededRng root(seed);
  SeededRng init = root.fork(kInit), agent_rng = root.fork(kAgent), partner_rng = root.fork(kPartner);
  auto env = make_env(cfg, root.fork(kEnv).next_u64());

  TrainResult result;
  result.learner = std::make_unique<sac::Learner>(env->spec(), cfg.learner, init);
  auto& learner = *result.learner;

  std::vector<partners::LatentDynamics> pool;
  for (const auto& id : cfg.pool) pool.push_back(partners::make_dynamics(cfg.env, id, cfg.geometry));
  partners::PartnerScheduler scheduler(pool, cfg.switch_probability, root.fork(kScheduler));

  MetricsWriter writer;
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    writer = MetricsWriter(dir);
    write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
  }

  auto save_checkpoint = [&](nn::Checkpoint& ck) {
    learner.save(ck);
    ck.put_text("config", to_json(cfg).dump());
    ck.put_int("seed", static_cast<std::int64_t>(seed));
  };

  const auto start = std::chrono::steady_clock::now();
  TrueStrategy truth;
  std::optional<InteractionExperience> prev;
  for (std::int64_t i = 0; i < cfg.train_interactions; ++i) {
    const auto& dyn = i == 0 ? scheduler.active() : scheduler.schedule_next();
    truth = prev ? dyn.next_strategy(*prev, truth, partner_rng) : dyn.initial_strategy(partner_rng);
    auto out = learner.train_interaction(*env, truth, oracle_for(cfg, truth), agent_rng);

    MetricsRow row{seed,        i,           dyn.id,    out.experience.total_reward(), out.rep_loss,
                   out.critic_loss, out.actor_loss, out.alpha,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    if (writer.is_open()) writer.write(row);
    if (progress) progress(row);
    result.rows.push_back(std::move(row));
    prev = std::move(out.experience);

    if (!dir.empty() && cfg.checkpoint_every > 0 && (i + 1) % cfg.checkpoint_every == 0) {
      nn::Checkpoint ck;
      save_checkpoint(ck);
      ck.save(dir / ("checkpoint_" + std::to_string(i + 1) + ".bin"));
    }
  }

  save_checkpoint(result.checkpoint);
  if (learner.replay().interactions() >= static_cast<std::size_t>(cfg.transfer.library_size)) {
    library_from_learner(cfg, learner, seed).save(result.checkpoint, "library/");
  }
  if (!dir.empty()) {
    writer.flush();
    scheduler.write_log_csv(dir / "partner_log.csv");
    result.checkpoint.save(dir / "checkpoint.bin");
  }
  return result;
}

std::unique_ptr<sac::Learner> load_learner(const ExperimentConfig& cfg, const nn::Checkpoint& ck, std::uint64_t seed) {
  if (ck.has("learner/variant") && sac::parse_variant(ck.text("learner/variant")) != cfg.learner.variant) {
    throw ConfigError("checkpoint variant '" + ck.text("learner/variant") + "' differs from the config's");
  }
  auto env = make_env(cfg, seed);
  SeededRng init = SeededRng(seed).fork(kInit);
  auto learner = std::make_unique<sac::Learner>(env->spec(), cfg.learner, init);
  try {
    learner->load(ck);
  } catch (const StructuralError& e) {
    throw ConfigError(std::string("checkpoint does not match the environment: ") + e.what());
  }
  return learner;
}

EvalTable evaluate_per_dynamics(const ExperimentConfig& cfg, const nn::Checkpoint& ck,
                                const std::vector<std::string>& dynamics, int n_eval, std::uint64_t seed) {
  if (n_eval < 1) throw ConfigError("evaluation needs at least one interaction");
  auto learner = load_learner(cfg, ck, seed);
  EvalTable table;
  for (std::size_t d = 0; d < dynamics.size(); ++d) {
    const SeededRng root = SeededRng(seed).fork(kEval).fork(d);
    auto env = make_env(cfg, root.fork(kEnv).next_u64());
    SeededRng agent_rng = root.fork(kAgent);
    PartnerStream partner(partners::make_dynamics(cfg.env, dynamics[d], cfg.geometry), root.fork(kPartner));
    learner->reset_history();
    std::vector<double> costs;
    std::optional<InteractionExperience> prev;
    for (int i = 0; i < n_eval; ++i) {
      const auto& truth = partner.next(prev);
      auto out = learner->eval_interaction(*env, truth, oracle_for(cfg, truth), agent_rng);
      costs.push_back(-out.experience.total_reward());
      prev = std::move(out.experience);
    }
    const double m = mean(costs, 0, costs.size());
    double ss = 0;
    for (double c : costs) ss += (c - m) * (c - m);
    const double sem = costs.size() > 1 ? std::sqrt(ss / static_cast<double>(costs.size() - 1) /
                                                    static_cast<double>(costs.size()))
                                        : 0.0;
    table.per_dynamics.push_back({dynamics[d], m, sem});
  }
  double sum = 0, var = 0;
  for (const auto& s : table.per_dynamics) {
    sum += s.mean_cost;
    var += s.sem * s.sem;
  }
  const auto n = static_cast<double>(table.per_dynamics.size());
  table.average = sum / n;
  table.average_sem = std::sqrt(var) / n;
  return table;
}

double random_policy_cost(const ExperimentConfig& cfg, const std::string& dynamics, int n, std::uint64_t seed) {
  const SeededRng root(seed);
  auto env = make_env(cfg, root.fork(kEnv).next_u64());
  SeededRng rng = root.fork(kAgent);
  PartnerStream partner(partners::make_dynamics(cfg.env, dynamics, cfg.geometry), root.fork(kPartner));
  const auto& spec = env->spec();
  double total = 0;
  std::optional<InteractionExperience> prev;
  for (int i = 0; i < n; ++i) {
    const auto& truth = partner.next(prev);
    InteractionExperience exp;
    Vector obs = env->reset(truth);
    for (int t = 0; t < spec.horizon; ++t) {
      Vector a(spec.action_dim);
      for (int j = 0; j < spec.action_dim; ++j) a[j] = rng.uniform(spec.action_low[j], spec.action_high[j]);
      auto r = env->step(a);
      exp.steps.push_back({obs, r.applied_action, r.reward});
      obs = r.observation;
    }
    total += -exp.total_reward();
    prev = std::move(exp);
  }
  return total / n;
}

void write_eval_csv(const std::filesystem::path& path, const std::string& label, std::uint64_t seed,
                    const EvalTable& table, bool header) {
  std::ofstream out(path, header ? std::ios::trunc : std::ios::app);
  if (!out) throw ConfigError("cannot write " + path.string());
  if (header) out << "label,seed,dynamics,mean_cost,sem\n";
  for (const auto& s : table.per_dynamics) {
    out << label << ',' << seed << ',' << s.dynamics_id << ',' << format_double(s.mean_cost) << ','
        << format_double(s.sem) << '\n';
  }
  out << label << ',' << seed << ",average," << format_double(table.average) << ','
      << format_double(table.average_sem) << '\n';
}

double TransferCurve::mean_first(std::size_t n) const { return mean(returns, 0, n); }

std::vector<TransferCurve> run_transfer_experiment(const ExperimentConfig& cfg, const nn::Checkpoint& ck,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   const std::filesystem::path& dir) {
  cfg.validate();
  if (!ck.has("library/size")) throw ConfigError("checkpoint holds no trajectory library");
  const auto library = transfer::TrajectoryLibrary::load(ck, "library/");
  const auto dyn = partners::make_dynamics(cfg.env, cfg.transfer.new_dynamics, cfg.geometry);
  const auto n = cfg.transfer.interactions;
  std::vector<TransferCurve> curves;
  for (auto seed : seeds) {
    for (const auto& mode_name : cfg.transfer.modes) {
      const auto mode = transfer::parse_transfer_mode(mode_name);
      // Same partner and environment streams for every mode of this seed.
      const SeededRng root = SeededRng(seed).fork(kEval + 1);
      auto env = make_env(cfg, root.fork(kEnv).next_u64());
      PartnerStream partner(dyn, root.fork(kPartner));
      SeededRng agent_rng = root.fork(kAgent), init = root.fork(kInit);
      TransferCurve curve{mode_name, seed, {}};
      MetricsWriter writer;
      if (!dir.empty()) writer = MetricsWriter(dir / ("seed_" + std::to_string(seed)), mode_name);
      const auto start = std::chrono::steady_clock::now();

      std::unique_ptr<sac::Learner> learner;
      std::unique_ptr<transfer::TransferAgent> agent;
      if (mode == transfer::TransferMode::kTransfer) {
        agent = std::make_unique<transfer::TransferAgent>(env->spec(), cfg.learner, ck, library, transfer_config(cfg),
                                                          init);
      } else {
        learner = std::make_unique<sac::Learner>(env->spec(), cfg.learner, init);
        if (mode == transfer::TransferMode::kResume) learner->load(ck);
      }

      std::optional<InteractionExperience> prev;
      for (int i = 0; i < n; ++i) {
        const auto& truth = partner.next(prev);
        auto out = agent ? agent->play(*env, truth, agent_rng)
                         : learner->train_interaction(*env, truth, oracle_for(cfg, truth), agent_rng);
        curve.returns.push_back(out.experience.total_reward());
        if (writer.is_open()) {
          writer.write({seed, i, dyn.id, out.experience.total_reward(), out.rep_loss, out.critic_loss, out.actor_loss,
                        out.alpha, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
        }
        prev = std::move(out.experience);
      }
      log::info("transfer " + mode_name + " seed " + std::to_string(seed) +
                " mean return over first 100: " + format_double(curve.mean_first(100)));
      curves.push_back(std::move(curve));
    }
  }
  if (!dir.empty()) {
    std::ofstream out(dir / "transfer_summary.csv");
    out << "mode,seed,mean_first_100,mean_all\n";
    for (const auto& c : curves) {
      out << c.mode << ',' << c.seed << ',' << format_double(c.mean_first(100)) << ','
          << format_double(c.mean_first(c.returns.size())) << '\n';
    }
  }
  return curves;
}

double StudySession::first_mean(int n) const { return mean(rewards, 0, static_cast<std::size_t>(n)); }
double StudySession::last_mean(int n) const {
  return mean(rewards, rewards.size() - std::min<std::size_t>(rewards.size(), static_cast<std::size_t>(n)),
              rewards.size());
}

std::uint64_t study_session_seed(std::uint64_t seed, std::size_t partner, int session) {
  return SeededRng(seed).fork(100 + partner).fork(static_cast<std::uint64_t>(session)).next_u64();
}

std::vector<StudySession> run_study_sim(const ExperimentConfig& cfg, const nn::Checkpoint& rili,
                                        const nn::Checkpoint& sili, std::uint64_t seed,
                                        const std::filesystem::path& dir) {
  if (cfg.env != EnvKind::kTower) throw ConfigError("the study simulation runs on the tower environment");
  if (!rili.has("library/size")) throw ConfigError("RILI checkpoint holds no trajectory library");
  const auto library = transfer::TrajectoryLibrary::load(rili, "library/");
  auto rili_cfg = cfg.learner;
  rili_cfg.variant = sac::Variant::kRili;
  auto sili_cfg = cfg.learner;
  sili_cfg.variant = sac::Variant::kSili;
  const auto tc = transfer_config(cfg);
  const auto& g = cfg.geometry.tower;

  std::vector<StudySession> sessions;
  std::vector<std::pair<std::string, transfer::TowerRecord>> log;
  for (std::size_t p = 0; p < cfg.study.partners.size(); ++p) {
    const auto variant = partners::parse_tower_variant(cfg.study.partners[p]);
    for (int s = 0; s < cfg.study.sessions; ++s) {
      const std::uint64_t session_seed = study_session_seed(seed, p, s);
      // Both agents meet the same scripted partner noise in session s.
      for (const char* who : {"rili_transfer", "sili"}) {
        StudySession session{who, cfg.study.partners[p], s, {}};
        const std::string label = session.agent + "/" + session.partner + "/" + std::to_string(s);
        SeededRng partner_rng = study_partner_rng(session_seed);
        auto build = [&](const std::array<double, 4>& d) {
          return partners::tower_dynamics(variant, d, g.tie_threshold, partner_rng);
        };
        if (session.agent == "rili_transfer") {
          transfer::TowerSession game(rili_cfg, rili, library, tc, g, session_seed, cfg.study.interactions,
                                      cfg.effective_reward_scale());
          while (!game.complete()) {
            const auto& rec = game.submit(game.next_interaction(), build(game.layout()));
            session.rewards.push_back(rec.reward);
            log.emplace_back(label, rec);
          }
        } else {
          envs::TowerEnv env(g, session_seed);
          env.set_reward_scale(cfg.effective_reward_scale());
          TowerOrder built;
          env.set_assembler([&](const std::array<double, 4>& d) { return built = build(d); });
          SeededRng init = SeededRng(session_seed).fork(kInit), agent_rng = SeededRng(session_seed).fork(kAgent);
          sac::Learner learner(env.spec(), sili_cfg, init);
          learner.load(sili);
          for (int i = 0; i < cfg.study.interactions; ++i) {
            auto out = learner.train_interaction(env, TowerRule{variant}, std::nullopt, agent_rng);
            transfer::TowerRecord rec{i, env.distances(), built, envs::tower_reward(g.target, built)};
            session.rewards.push_back(rec.reward);
            log.emplace_back(label, rec);
          }
        }
        sessions.push_back(std::move(session));
      }
    }
  }
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "study_log.csv");
    out << transfer::kTowerLogHeader << '\n';
    for (const auto& [label, rec] : log) out << transfer::tower_log_line(label, rec) << '\n';
  }
  return sessions;
}

}  // namespace rili::harness
