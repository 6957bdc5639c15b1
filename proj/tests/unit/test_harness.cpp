#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "rili/core/errors.hpp"
#include "rili/harness/experiment.hpp"
#include "rili/harness/grad_check.hpp"
#include "rili/harness/report.hpp"
#include "rili/transfer/tower_session.hpp"

using namespace rili;
using namespace rili::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rili_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small enough to run in a second, large enough to exercise every update path.
ExperimentConfig small(EnvKind env, sac::Variant v) {
  auto cfg = default_config(env);
  cfg.learner.variant = v;
  cfg.train_interactions = 30;
  cfg.eval_interactions = 10;
  cfg.learner.sac.hidden = {16, 16};
  cfg.learner.sac.batch_size = 16;
  cfg.learner.sac.warmup_steps = 100;
  cfg.learner.representation.encoder_hidden = 8;
  cfg.learner.representation.decoder_hidden = {16};
  cfg.learner.representation.batch_size = 8;
  cfg.transfer.library_size = 10;
  cfg.transfer.library_source = 30;
  cfg.transfer.interactions = 15;
  return cfg;
}

}  // namespace

TEST_CASE("train: zero interactions leave the initialization untouched") {
  auto cfg = small(EnvKind::kCircle, sac::Variant::kRili);
  cfg.train_interactions = 0;
  const auto result = train_changing_partners(cfg, 5);
  CHECK(result.rows.empty());

  auto env = envs::make_environment(cfg.env, cfg.geometry, 0, cfg.effective_reward_scale());
  SeededRng init = SeededRng(5).fork(kInit);
  sac::Learner fresh(env->spec(), cfg.learner, init);
  nn::Checkpoint expect;
  fresh.save(expect);
  expect.put_text("config", to_json(cfg).dump());
  expect.put_int("seed", 5);
  CHECK(result.checkpoint == expect);
  CHECK_FALSE(result.checkpoint.has("library/size"));
}

TEST_CASE("train: metrics bytes are identical across reruns") {
  for (auto v : {sac::Variant::kRili, sac::Variant::kSili, sac::Variant::kOracle}) {
    auto cfg = small(EnvKind::kCircle, v);
    const auto a = scratch("det_a"), b = scratch("det_b");
    train_changing_partners(cfg, 2, a);
    train_changing_partners(cfg, 2, b);
    const auto text = slurp(a / "metrics.csv");
    CHECK(text == slurp(b / "metrics.csv"));
    CHECK(slurp(a / "partner_log.csv") == slurp(b / "partner_log.csv"));
    CHECK(slurp(a / "checkpoint.bin") == slurp(b / "checkpoint.bin"));
    // A different seed is a different run.
    const auto c = scratch("det_c");
    train_changing_partners(cfg, 3, c);
    CHECK(text != slurp(c / "metrics.csv"));
  }
}

TEST_CASE("train: metrics rows are consecutive and the header is the documented one") {
  auto cfg = small(EnvKind::kDriving, sac::Variant::kLili);
  const auto dir = scratch("rows");
  const auto result = train_changing_partners(cfg, 1, dir);
  const auto rows = read_metrics(dir / "metrics.csv");
  REQUIRE(rows.size() == 30);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].interaction == static_cast<std::int64_t>(i));
    CHECK(rows[i].ret == result.rows[i].ret);
  }
  std::ifstream in(dir / "metrics.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == kMetricsHeader);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(config_from_json(nlohmann::json::parse(slurp(dir / "config.json"))).train_interactions == 30);
}

TEST_CASE("metrics writer rejects gaps") {
  const auto dir = scratch("gap");
  MetricsWriter w(dir);
  w.write({0, 0, "d1", -1.0, 0, 0, 0, 1, 0});
  CHECK_THROWS_AS(w.write({0, 2, "d1", -1.0, 0, 0, 0, 1, 0}), SequencingError);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -3.0, 1e-300, 123456.789, 2.0 / 3.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("eval: average is the mean of the per-dynamics means, and reruns agree") {
  auto cfg = small(EnvKind::kCircle, sac::Variant::kLili);
  const auto ck = train_changing_partners(cfg, 4).checkpoint;
  const auto a = evaluate_per_dynamics(cfg, ck, cfg.pool, 12, 8);
  const auto b = evaluate_per_dynamics(cfg, ck, cfg.pool, 12, 8);
  REQUIRE(a.per_dynamics.size() == 3);
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    m += a.per_dynamics[i].mean_cost / 3.0;
    CHECK(a.per_dynamics[i].mean_cost == b.per_dynamics[i].mean_cost);
    CHECK(a.per_dynamics[i].sem >= 0.0);
  }
  CHECK(a.average == doctest::Approx(m).epsilon(1e-12));
  CHECK(a.average == b.average);
}

TEST_CASE("eval: a checkpoint from another environment or variant is a config error") {
  auto circle = small(EnvKind::kCircle, sac::Variant::kRili);
  const auto ck = train_changing_partners(circle, 1).checkpoint;
  auto driving = small(EnvKind::kDriving, sac::Variant::kRili);
  CHECK_THROWS_AS(evaluate_per_dynamics(driving, ck, driving.pool, 2, 0), ConfigError);
  auto sac_cfg = small(EnvKind::kCircle, sac::Variant::kSac);
  CHECK_THROWS_AS(evaluate_per_dynamics(sac_cfg, ck, sac_cfg.pool, 2, 0), ConfigError);
}

TEST_CASE("train: the oracle learns to chase a fixed-angle partner") {
  // The partner ignores the ego agent; knowing the angle, the agent should get
  // well under half the cost of acting at random.
  auto cfg = default_config(EnvKind::kCircle);
  cfg.learner.variant = sac::Variant::kOracle;
  cfg.pool = {"d3"};
  cfg.train_interactions = 1200;
  cfg.learner.sac.hidden = {64, 64};
  cfg.learner.sac.batch_size = 128;
  const auto result = train_changing_partners(cfg, 0);
  double cost = 0.0;
  for (std::size_t i = result.rows.size() - 100; i < result.rows.size(); ++i) cost -= result.rows[i].ret / 100.0;
  const double random = random_policy_cost(cfg, "d3", 500, 1);
  MESSAGE("oracle final-100 cost ", cost, ", random ", random);
  CHECK(cost <= 0.4 * random);
}

TEST_CASE("config: JSON round trip and strict keys") {
  for (auto env : {EnvKind::kCircle, EnvKind::kDriving, EnvKind::kRobot, EnvKind::kTower}) {
    auto cfg = default_config(env);
    cfg.seeds = {1, 2, 3};
    cfg.learner.sac.hidden = {32, 48};
    cfg.transfer.library_size = 33;
    const auto j = to_json(cfg);
    CHECK(to_json(config_from_json(j)) == j);
  }
  auto j = to_json(default_config(EnvKind::kCircle));
  j["learning_rat"] = 0.1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(default_config(EnvKind::kCircle));
  j["sac"]["hiden"] = {3};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = to_json(default_config(EnvKind::kCircle));
  j["pool"] = {"d1", "d9"};
  CHECK_THROWS(config_from_json(j).validate());
  j = to_json(default_config(EnvKind::kCircle));
  j["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(config_from_json(j).validate(), ConfigError);
}

TEST_CASE("config: output root override") {
  auto cfg = default_config(EnvKind::kRobot);
  cfg.output_dir = "runs/x";
  ::unsetenv("RILI_OUTPUT_ROOT");
  CHECK(output_root(cfg) == fs::path("runs/x"));
  ::setenv("RILI_OUTPUT_ROOT", "/tmp/elsewhere", 1);
  CHECK(output_root(cfg) == fs::path("/tmp/elsewhere/runs/x"));
  cfg.output_dir = "/abs/dir";
  CHECK(output_root(cfg) == fs::path("/abs/dir"));
  ::unsetenv("RILI_OUTPUT_ROOT");
}

TEST_CASE("transfer experiment: paired modes, one curve per mode and seed") {
  auto cfg = small(EnvKind::kCircle, sac::Variant::kRili);
  const auto ck = train_changing_partners(cfg, 6).checkpoint;
  REQUIRE(ck.has("library/size"));
  const auto dir = scratch("transfer");
  const auto curves = run_transfer_experiment(cfg, ck, {1, 2}, dir);
  REQUIRE(curves.size() == 6);
  for (const auto& c : curves) CHECK(c.returns.size() == 15);
  CHECK(fs::exists(dir / "transfer_summary.csv"));
  CHECK(fs::exists(dir / "seed_1" / "transfer.csv"));
  const auto again = run_transfer_experiment(cfg, ck, {1, 2});
  for (std::size_t i = 0; i < curves.size(); ++i) CHECK(curves[i].returns == again[i].returns);

  auto no_lib = cfg;
  no_lib.learner.variant = sac::Variant::kSac;
  CHECK_THROWS_AS(run_transfer_experiment(no_lib, train_changing_partners(no_lib, 6).checkpoint, {1}), ConfigError);
}

TEST_CASE("study sim: six sessions per partner and agent, logged in the tower schema") {
  auto cfg = small(EnvKind::kTower, sac::Variant::kRili);
  cfg.study.interactions = 5;
  cfg.study.last_n = 2;
  const auto rili = train_changing_partners(cfg, 1).checkpoint;
  auto sili_cfg = cfg;
  sili_cfg.learner.variant = sac::Variant::kSili;
  const auto sili = train_changing_partners(sili_cfg, 1).checkpoint;
  const auto dir = scratch("study");
  const auto sessions = run_study_sim(cfg, rili, sili, 0, dir);
  CHECK(sessions.size() == 3 * 6 * 2);
  for (const auto& s : sessions) {
    CHECK(s.rewards.size() == 5);
    for (double r : s.rewards) CHECK((r <= 0.0 && r >= -800.0 && std::fmod(r, 200.0) == 0.0));
  }
  std::ifstream in(dir / "study_log.csv");
  std::string line;
  int n = 0;
  std::getline(in, line);
  CHECK(line == transfer::kTowerLogHeader);
  while (std::getline(in, line)) ++n;
  CHECK(n == 3 * 6 * 2 * 5);
  CHECK_THROWS_AS(run_study_sim(small(EnvKind::kCircle, sac::Variant::kRili), rili, sili, 0), ConfigError);
}

TEST_CASE("report: groups seeds and bins costs") {
  auto cfg = small(EnvKind::kCircle, sac::Variant::kSac);
  const auto root = scratch("report");
  train_changing_partners(cfg, 1, root / "sac" / "seed_1");
  train_changing_partners(cfg, 2, root / "sac" / "seed_2");
  const auto rep = build_report(root, 10);
  REQUIRE(rep.runs.size() == 2);
  CHECK(rep.runs[0].group == "sac/metrics");
  REQUIRE(rep.curve.size() == 3);
  const auto r1 = read_metrics(root / "sac" / "seed_1" / "metrics.csv");
  const auto r2 = read_metrics(root / "sac" / "seed_2" / "metrics.csv");
  double bin0 = 0.0;
  for (int i = 0; i < 10; ++i) bin0 -= (r1[i].ret + r2[i].ret) / 20.0;
  CHECK(rep.curve[0].mean_cost == doctest::Approx(bin0).epsilon(1e-12));
  CHECK(rep.curve[2].interaction_end == 30);
  write_report(rep, root / "out");
  CHECK(fs::exists(root / "out" / "curve.csv"));
  CHECK(fs::exists(root / "out" / "groups.csv"));
  CHECK_THROWS_AS(build_report(root / "missing", 10), ConfigError);
}

TEST_CASE("gradient checks pass on a few instances") {
  const auto reports = run_gradient_checks(3, 1);
  CHECK(reports.size() == 4);
  for (const auto& r : reports) {
    CHECK(r.instances == 3);
    CHECK(r.checked > 0);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("agent code never sees partner internals") {
  // model, sac and transfer may only learn about partners through observed
  // trajectories; the partner module is off limits to them.
  const fs::path root = RILI_SOURCE_DIR;
  const std::regex forbidden(R"(#include\s+"rili/partners/)");
  int scanned = 0;
  for (const char* module : {"model", "sac", "transfer"}) {
    for (const auto& base : {root / "include" / "rili" / module, root / "src" / module}) {
      REQUIRE(fs::is_directory(base));
      for (const auto& e : fs::recursive_directory_iterator(base)) {
        if (!e.is_regular_file()) continue;
        ++scanned;
        CHECK_MESSAGE(!std::regex_search(slurp(e.path()), forbidden), e.path().string());
      }
    }
  }
  CHECK(scanned > 10);
}
