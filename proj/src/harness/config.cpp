#include "rili/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "rili/partners/dynamics.hpp"

namespace rili::harness {

using nlohmann::json;

namespace {

// Reads keys out of one JSON object and complains about leftovers.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json sac_json(const sac::SacConfig& c) {
  return {{"hidden", c.hidden},           {"gamma", c.gamma},
          {"tau", c.tau},                 {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},     {"alpha_lr", c.alpha_lr},
          {"initial_alpha", c.initial_alpha}, {"batch_size", c.batch_size},
          {"warmup_steps", c.warmup_steps}, {"replay_capacity", c.replay_capacity},
          {"updates_per_step", c.updates_per_step}};
}

void read_sac(const json& j, sac::SacConfig& c) {
  Reader r(j, "sac");
  r.get("hidden", c.hidden);
  r.get("gamma", c.gamma);
  r.get("tau", c.tau);
  r.get("actor_lr", c.actor_lr);
  r.get("critic_lr", c.critic_lr);
  r.get("alpha_lr", c.alpha_lr);
  r.get("initial_alpha", c.initial_alpha);
  r.get("batch_size", c.batch_size);
  r.get("warmup_steps", c.warmup_steps);
  r.get("replay_capacity", c.replay_capacity);
  r.get("updates_per_step", c.updates_per_step);
  r.finish();
}

json geometry_json(const WorldGeometry& g) {
  const auto& c = g.circle;
  const auto& d = g.driving;
  const auto& r = g.robot;
  return {{"circle",
           {{"radius", c.radius}, {"max_speed", c.max_speed}, {"horizon", c.horizon},
            {"partner_step", c.partner_step}, {"terminal_reward", c.terminal_reward}}},
          {"driving",
           {{"lanes", d.lanes}, {"horizon", d.horizon}, {"ego_speed", d.ego_speed},
            {"partner_speed", d.partner_speed}, {"partner_start", d.partner_start},
            {"max_lateral", d.max_lateral}, {"merge_trigger", d.merge_trigger},
            {"merge_steps", d.merge_steps}, {"car_length", d.car_length}, {"car_width", d.car_width},
            {"collision_penalty", d.collision_penalty}}},
          {"robot",
           {{"goal_x", r.goal_x}, {"goal_height", r.goal_height}, {"start_x", r.start_x},
            {"start_height", r.start_height}, {"max_speed", r.max_speed}, {"x_limit", r.x_limit},
            {"height_max", r.height_max}, {"horizon", r.horizon}, {"success_radius", r.success_radius},
            {"success_reward", r.success_reward}, {"bonus_reward", r.bonus_reward},
            {"bonus_goal", r.bonus_goal}, {"height_threshold", r.height_threshold}}},
          {"tower",
           {{"horizon", g.tower.horizon}, {"start_distance", g.tower.start_distance},
            {"tie_threshold", g.tower.tie_threshold}, {"target", g.tower.target.order}}}};
}

void read_geometry(const json& j, WorldGeometry& g) {
  Reader top(j, "geometry");
  if (const json* c = top.sub("circle")) {
    Reader r(*c, "geometry.circle");
    r.get("radius", g.circle.radius);
    r.get("max_speed", g.circle.max_speed);
    r.get("horizon", g.circle.horizon);
    r.get("partner_step", g.circle.partner_step);
    r.get("terminal_reward", g.circle.terminal_reward);
    r.finish();
  }
  if (const json* d = top.sub("driving")) {
    Reader r(*d, "geometry.driving");
    auto& x = g.driving;
    r.get("lanes", x.lanes);
    r.get("horizon", x.horizon);
    r.get("ego_speed", x.ego_speed);
    r.get("partner_speed", x.partner_speed);
    r.get("partner_start", x.partner_start);
    r.get("max_lateral", x.max_lateral);
    r.get("merge_trigger", x.merge_trigger);
    r.get("merge_steps", x.merge_steps);
    r.get("car_length", x.car_length);
    r.get("car_width", x.car_width);
    r.get("collision_penalty", x.collision_penalty);
    r.finish();
  }
  if (const json* b = top.sub("robot")) {
    Reader r(*b, "geometry.robot");
    auto& x = g.robot;
    r.get("goal_x", x.goal_x);
    r.get("goal_height", x.goal_height);
    r.get("start_x", x.start_x);
    r.get("start_height", x.start_height);
    r.get("max_speed", x.max_speed);
    r.get("x_limit", x.x_limit);
    r.get("height_max", x.height_max);
    r.get("horizon", x.horizon);
    r.get("success_radius", x.success_radius);
    r.get("success_reward", x.success_reward);
    r.get("bonus_reward", x.bonus_reward);
    r.get("bonus_goal", x.bonus_goal);
    r.get("height_threshold", x.height_threshold);
    r.finish();
  }
  if (const json* t = top.sub("tower")) {
    Reader r(*t, "geometry.tower");
    r.get("horizon", g.tower.horizon);
    r.get("start_distance", g.tower.start_distance);
    r.get("tie_threshold", g.tower.tie_threshold);
    r.get("target", g.tower.target.order);
    r.finish();
  }
  top.finish();
}

}  // namespace

ExperimentConfig default_config(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  c.pool = partners::training_dynamics_ids(env);
  switch (env) {
    case EnvKind::kCircle:
      c.train_interactions = 30000;
      c.eval_interactions = 50000;
      break;
    case EnvKind::kDriving:
      c.train_interactions = 10000;
      c.eval_interactions = 5000;
      c.transfer.library_size = 40;
      break;
    case EnvKind::kRobot:
      c.train_interactions = 5000;
      c.eval_interactions = 500;
      break;
    case EnvKind::kTower:
      c.train_interactions = 10000;
      c.eval_interactions = 500;
      c.transfer.new_dynamics = "ends_in";
      break;
  }
  c.output_dir = "runs/" + to_string(env);
  return c;
}

double ExperimentConfig::effective_reward_scale() const {
  return reward_scale ? *reward_scale : envs::default_reward_scale(env);
}

void ExperimentConfig::validate() const {
  if (pool.empty()) throw ConfigError("partner pool is empty");
  for (const auto& id : pool) partners::make_dynamics(env, id, geometry);
  partners::make_dynamics(env, transfer.new_dynamics, geometry);
  if (!(switch_probability >= 0.0 && switch_probability <= 1.0)) {
    throw ConfigError("switch probability must lie in [0, 1]");
  }
  if (train_interactions < 0 || eval_interactions < 0 || checkpoint_every < 0) {
    throw ConfigError("interaction counts must be >= 0");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (reward_scale && !(*reward_scale > 0.0)) throw ConfigError("reward scale must be positive");
  if (transfer.library_size < transfer::kLibraryMin || transfer.library_size > transfer::kLibraryMax) {
    throw ConfigError("library size must lie in [10, 80]");
  }
  if (transfer.library_source < transfer.library_size) throw ConfigError("library source smaller than K");
  if (transfer.interactions < 0 || transfer.rep_updates_per_interaction < 0) {
    throw ConfigError("transfer settings must be >= 0");
  }
  for (const auto& m : transfer.modes) transfer::parse_transfer_mode(m);
  if (study.sessions < 1 || study.interactions < 1 || study.last_n < 1 || study.last_n > study.interactions) {
    throw ConfigError("invalid study settings");
  }
  if (env == EnvKind::kTower) {
    for (const auto& p : study.partners) partners::make_dynamics(env, p, geometry);
  }
  const auto& s = learner.sac;
  if (s.hidden.empty() || s.batch_size < 1 || s.warmup_steps < 0 || s.updates_per_step < 0 ||
      !(s.gamma >= 0.0 && s.gamma <= 1.0) || !(s.tau > 0.0 && s.tau <= 1.0)) {
    throw ConfigError("invalid SAC settings");
  }
  const auto& r = learner.representation;
  if (learner.rili_history < 1 || r.encoder_hidden < 1 || r.batch_size < 1 || r.decoder_hidden.empty()) {
    throw ConfigError("invalid representation settings");
  }
}

json to_json(const ExperimentConfig& c) {
  const auto& r = c.learner.representation;
  json seeds = json::array();
  for (auto s : c.seeds) seeds.push_back(s);
  return {
      {"env", to_string(c.env)},
      {"variant", sac::to_string(c.learner.variant)},
      {"pool", c.pool},
      {"switch_probability", c.switch_probability},
      {"train_interactions", c.train_interactions},
      {"eval_interactions", c.eval_interactions},
      {"checkpoint_every", c.checkpoint_every},
      {"seeds", seeds},
      {"reward_scale", c.effective_reward_scale()},
      {"sac", sac_json(c.learner.sac)},
      {"representation",
       {{"history_length", c.learner.rili_history},
        {"encoder_hidden", r.encoder_hidden},
        {"decoder_hidden", r.decoder_hidden},
        {"learning_rate", r.adam.learning_rate},
        {"batch_size", r.batch_size},
        {"buffer_capacity", r.buffer_capacity},
        {"updates_per_interaction", c.learner.rep_updates_per_interaction}}},
      {"sili_beta", c.learner.sili_beta},
      {"transfer",
       {{"new_dynamics", c.transfer.new_dynamics},
        {"interactions", c.transfer.interactions},
        {"library_size", c.transfer.library_size},
        {"library_source", c.transfer.library_source},
        {"rep_updates_per_interaction", c.transfer.rep_updates_per_interaction},
        {"modes", c.transfer.modes}}},
      {"study",
       {{"sessions", c.study.sessions},
        {"interactions", c.study.interactions},
        {"partners", c.study.partners},
        {"last_n", c.study.last_n}}},
      {"geometry", geometry_json(c.geometry)},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object() || !j.contains("env")) throw ConfigError("config needs an 'env' key");
  ExperimentConfig c = default_config(parse_env_kind(j.at("env").get<std::string>()));
  Reader top(j, "config");
  std::string env_name, variant;
  top.get("env", env_name);
  if (j.contains("variant")) {
    top.get("variant", variant);
    c.learner.variant = sac::parse_variant(variant);
  }
  top.get("pool", c.pool);
  top.get("switch_probability", c.switch_probability);
  top.get("train_interactions", c.train_interactions);
  top.get("eval_interactions", c.eval_interactions);
  top.get("checkpoint_every", c.checkpoint_every);
  top.get("seeds", c.seeds);
  if (j.contains("reward_scale") && !j.at("reward_scale").is_null()) {
    double s = 0;
    top.get("reward_scale", s);
    c.reward_scale = s;
  } else {
    top.sub("reward_scale");
  }
  top.get("sili_beta", c.learner.sili_beta);
  top.get("output_dir", c.output_dir);
  if (const json* s = top.sub("sac")) read_sac(*s, c.learner.sac);
  if (const json* s = top.sub("representation")) {
    Reader r(*s, "representation");
    auto& rep = c.learner.representation;
    r.get("history_length", c.learner.rili_history);
    r.get("encoder_hidden", rep.encoder_hidden);
    r.get("decoder_hidden", rep.decoder_hidden);
    r.get("learning_rate", rep.adam.learning_rate);
    r.get("batch_size", rep.batch_size);
    r.get("buffer_capacity", rep.buffer_capacity);
    r.get("updates_per_interaction", c.learner.rep_updates_per_interaction);
    r.finish();
  }
  if (const json* s = top.sub("transfer")) {
    Reader r(*s, "transfer");
    r.get("new_dynamics", c.transfer.new_dynamics);
    r.get("interactions", c.transfer.interactions);
    r.get("library_size", c.transfer.library_size);
    r.get("library_source", c.transfer.library_source);
    r.get("rep_updates_per_interaction", c.transfer.rep_updates_per_interaction);
    r.get("modes", c.transfer.modes);
    r.finish();
  }
  if (const json* s = top.sub("study")) {
    Reader r(*s, "study");
    r.get("sessions", c.study.sessions);
    r.get("interactions", c.study.interactions);
    r.get("partners", c.study.partners);
    r.get("last_n", c.study.last_n);
    r.finish();
  }
  if (const json* g = top.sub("geometry")) read_geometry(*g, c.geometry);
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::filesystem::path output_root(const ExperimentConfig& cfg) {
  std::filesystem::path p(cfg.output_dir);
  if (const char* root = std::getenv("RILI_OUTPUT_ROOT"); root != nullptr && *root != '\0' && p.is_relative()) {
    return std::filesystem::path(root) / p;
  }
  return p;
}

}  // namespace rili::harness
