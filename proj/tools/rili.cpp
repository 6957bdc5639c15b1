// Command-line front end: train, eval, transfer, study-sim, serve,
// grad-check, report.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rili/core/errors.hpp"
#include "rili/core/log.hpp"
#include "rili/harness/experiment.hpp"
#include "rili/harness/grad_check.hpp"
#include "rili/harness/report.hpp"
#include "rili/service/service.hpp"

using namespace rili;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string env;
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::int64_t interactions = -1;
  std::string output;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool with_interactions = true) {
  app->add_option("--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--env", c.env, "environment when no config is given: circle, driving, robot, tower");
  app->add_option("--variant", c.variant, "agent: rili, lili, sili, sac, oracle");
  app->add_option("--seed", c.seeds, "seed (repeatable)");
  if (with_interactions) app->add_option("--interactions", c.interactions, "override the interaction budget");
  app->add_option("--output", c.output, "output directory");
  app->add_flag("-v,--verbose", c.verbose, "log progress");
}

// Config from --config, else the one echoed in `ck`, else defaults for --env.
harness::ExperimentConfig resolve(const Common& c, const nn::Checkpoint* ck = nullptr) {
  harness::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    cfg = harness::load_config(c.config_path);
  } else if (ck != nullptr && ck->has("config")) {
    cfg = harness::config_from_json(nlohmann::json::parse(ck->text("config")));
  } else {
    cfg = harness::default_config(parse_env_kind(c.env.empty() ? "circle" : c.env));
  }
  if (!c.env.empty() && parse_env_kind(c.env) != cfg.env) throw ConfigError("--env disagrees with the config");
  if (!c.variant.empty()) cfg.learner.variant = sac::parse_variant(c.variant);
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  if (!c.output.empty()) cfg.output_dir = c.output;
  cfg.validate();
  return cfg;
}

void print_eval(const std::string& label, const harness::EvalTable& t) {
  std::printf("%-10s", label.c_str());
  for (const auto& d : t.per_dynamics) std::printf("  %s %.4f +- %.4f", d.dynamics_id.c_str(), d.mean_cost, d.sem);
  std::printf("  average %.4f +- %.4f\n", t.average, t.average_sem);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-strategy agents for repeated interaction with changing partners"};
  app.require_subcommand(1);

  Common train_c, eval_c, transfer_c, study_c, serve_c;

  auto* train = app.add_subcommand("train", "train with switching partners");
  add_common(train, train_c);

  auto* eval = app.add_subcommand("eval", "fixed-partner evaluation of a checkpoint");
  add_common(eval, eval_c);
  std::string eval_ck;
  std::vector<std::string> eval_dyn;
  eval->add_option("--checkpoint", eval_ck, "training checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--dynamics", eval_dyn, "dynamics ids (default: the training pool)");

  auto* transfer = app.add_subcommand("transfer", "scratch / resume / transfer against the new dynamics");
  add_common(transfer, transfer_c);
  std::string transfer_ck;
  transfer->add_option("--checkpoint", transfer_ck, "training checkpoint with library")
      ->required()
      ->check(CLI::ExistingFile);

  auto* study = app.add_subcommand("study-sim", "tower study with scripted partners");
  add_common(study, study_c, false);
  std::string study_rili, study_sili;
  study->add_option("--rili", study_rili, "RILI tower checkpoint")->required()->check(CLI::ExistingFile);
  study->add_option("--sili", study_sili, "SILI tower checkpoint")->required()->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "partner service for the tower game");
  add_common(serve, serve_c, false);
  std::string serve_ck, serve_host = "127.0.0.1", serve_journal;
  int serve_port = 8080, serve_max = 35;
  bool serve_reward = false;
  serve->add_option("--checkpoint", serve_ck, "RILI tower checkpoint with library")->required();
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "port")->check(CLI::Range(1, 65535));
  serve->add_option("--journal", serve_journal, "session journal directory");
  serve->add_option("--max-interactions", serve_max, "interactions per session")->check(CLI::PositiveNumber);
  serve->add_flag("--reward-visible", serve_reward, "show rewards to participants");

  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient checks");
  int grad_instances = 32;
  std::uint64_t grad_seed = 0;
  double grad_tol = 1e-4;
  grad->add_option("--instances", grad_instances, "random instances per network")->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_seed, "seed");
  grad->add_option("--tolerance", grad_tol, "maximum relative error");

  auto* report = app.add_subcommand("report", "summaries and plot-ready curves from metrics CSVs");
  std::string report_in, report_out;
  std::size_t report_window = 100;
  report->add_option("--input", report_in, "directory to scan")->required()->check(CLI::ExistingDirectory);
  report->add_option("--output", report_out, "where to write (default: <input>/report)");
  report->add_option("--window", report_window, "interactions per bin")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const Common* c : {&train_c, &eval_c, &transfer_c, &study_c, &serve_c}) {
      if (c->verbose) log::set_level(log::Level::kInfo);
    }

    if (*train) {
      auto cfg = resolve(train_c);
      if (train_c.interactions >= 0) cfg.train_interactions = train_c.interactions;
      for (auto seed : cfg.seeds) {
        const auto dir = harness::output_root(cfg) / sac::to_string(cfg.learner.variant) / ("seed_" + std::to_string(seed));
        auto progress = [&](const harness::MetricsRow& r) {
          if ((r.interaction + 1) % 500 == 0) log::info("seed ", seed, " interaction ", r.interaction + 1, " return ", r.ret);
        };
        harness::train_changing_partners(cfg, seed, dir, progress);
        std::cout << "trained seed " << seed << " -> " << dir.string() << '\n';
      }
    } else if (*eval) {
      const auto ck = nn::Checkpoint::load(eval_ck);
      auto cfg = resolve(eval_c, &ck);
      if (eval_c.interactions >= 0) cfg.eval_interactions = static_cast<int>(eval_c.interactions);
      if (eval_dyn.empty()) eval_dyn = cfg.pool;
      const auto out = harness::output_root(cfg) / ("eval_" + sac::to_string(cfg.learner.variant) + ".csv");
      fs::create_directories(out.parent_path());
      bool header = true;
      for (auto seed : cfg.seeds) {
        const auto table = harness::evaluate_per_dynamics(cfg, ck, eval_dyn, cfg.eval_interactions, seed);
        print_eval(sac::to_string(cfg.learner.variant), table);
        harness::write_eval_csv(out, sac::to_string(cfg.learner.variant), seed, table, header);
        header = false;
      }
    } else if (*transfer) {
      const auto ck = nn::Checkpoint::load(transfer_ck);
      auto cfg = resolve(transfer_c, &ck);
      if (transfer_c.interactions >= 0) cfg.transfer.interactions = static_cast<int>(transfer_c.interactions);
      const auto dir = harness::output_root(cfg) / "transfer";
      const auto curves = harness::run_transfer_experiment(cfg, ck, cfg.seeds, dir);
      for (const auto& c : curves) {
        std::printf("%-9s seed %llu  first-100 mean return %.4f  overall %.4f\n", c.mode.c_str(),
                    static_cast<unsigned long long>(c.seed), c.mean_first(100), c.mean_first(c.returns.size()));
      }
    } else if (*study) {
      const auto rili = nn::Checkpoint::load(study_rili);
      const auto sili = nn::Checkpoint::load(study_sili);
      auto cfg = resolve(study_c, &rili);
      const auto dir = harness::output_root(cfg) / "study";
      for (auto seed : cfg.seeds) {
        for (const auto& s : harness::run_study_sim(cfg, rili, sili, seed, dir / ("seed_" + std::to_string(seed)))) {
          std::printf("%-13s %-10s session %d  first-%d %.1f  last-%d %.1f\n", s.agent.c_str(), s.partner.c_str(),
                      s.session, cfg.study.last_n, s.first_mean(cfg.study.last_n), cfg.study.last_n,
                      s.last_mean(cfg.study.last_n));
        }
      }
    } else if (*serve) {
      service::ServiceConfig sc;
      std::optional<nn::Checkpoint> ck;
      if (fs::exists(serve_ck)) ck = nn::Checkpoint::load(serve_ck);
      sc.experiment = resolve(serve_c, ck ? &*ck : nullptr);
      sc.checkpoint = serve_ck;
      sc.journal_dir = serve_journal;
      sc.max_interactions = serve_max;
      sc.reward_visible = serve_reward;
      if (!serve_c.seeds.empty()) sc.seed = serve_c.seeds.front();
      log::set_level(log::Level::kInfo);
      service::PartnerService svc(sc);
      service::serve(svc, serve_host, serve_port);
    } else if (*grad) {
      bool ok = true;
      for (const auto& r : harness::run_gradient_checks(grad_instances, grad_seed)) {
        const bool pass = r.max_relative_error < grad_tol;
        ok = ok && pass;
        std::printf("%-12s max relative error %.3e over %zu entries, %d instances  %s\n", r.network.c_str(),
                    r.max_relative_error, r.checked, r.instances, pass ? "ok" : "FAIL");
      }
      return ok ? 0 : 1;
    } else if (*report) {
      const auto rep = harness::build_report(report_in, report_window);
      const fs::path out = report_out.empty() ? fs::path(report_in) / "report" : fs::path(report_out);
      harness::write_report(rep, out);
      std::cout << rep.runs.size() << " metrics files -> " << out.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
