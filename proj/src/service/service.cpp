#include "rili/service/service.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "rili/core/log.hpp"

namespace rili::service {

using nlohmann::json;

namespace {

Response error(int status, const std::string& message) { return {status, json{{"error", message}}.dump()}; }

Response ok(int status, const json& body) { return {status, body.dump()}; }

json layout_json(const std::string& id, const transfer::TowerSession& game) {
  const auto d = game.layout();
  return {{"session_id", id},
          {"interaction", game.next_interaction()},
          {"distances", d},
          {"colors", kBlockColors}};
}

json record_json(const transfer::TowerRecord& r, bool reward_visible) {
  json j{{"interaction", r.interaction}, {"distances", r.distances}, {"order", r.order.order}};
  if (reward_visible) j["reward"] = r.reward;
  return j;
}

std::string hex_id(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return "s" + s.str();
}

}  // namespace

PartnerService::PartnerService(ServiceConfig config, std::function<Clock::time_point()> now)
    : config_(std::move(config)), now_(std::move(now)), id_rng_(config_.seed) {
  if (config_.experiment.env != EnvKind::kTower) throw ConfigError("the partner service needs a tower config");
  if (config_.max_interactions < 1) throw ConfigError("max interactions must be >= 1");
  try {
    checkpoint_ = nn::Checkpoint::load(config_.checkpoint);
    if (!checkpoint_->has("library/size")) throw ConfigError("checkpoint holds no trajectory library");
    library_ = transfer::TrajectoryLibrary::load(*checkpoint_, "library/");
  } catch (const std::exception& e) {
    // Sessions cannot start; requests report it as a server error.
    checkpoint_.reset();
    load_error_ = e.what();
    log::warn("partner service: ", load_error_);
  }
  if (!config_.journal_dir.empty()) {
    std::filesystem::create_directories(config_.journal_dir);
    if (checkpoint_) recover();
  }
}

std::size_t PartnerService::active_sessions() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sessions_.size();
}

std::shared_ptr<PartnerService::Session> PartnerService::open_session(const std::string& id, std::uint64_t seed,
                                                                      bool reward_visible) {
  auto learner = config_.experiment.learner;
  learner.variant = sac::Variant::kRili;
  auto s = std::make_shared<Session>();
  s->id = id;
  s->reward_visible = reward_visible;
  s->last_seen = now_();
  s->game = std::make_unique<transfer::TowerSession>(learner, *checkpoint_, *library_,
                                                     harness::transfer_config(config_.experiment),
                                                     config_.experiment.geometry.tower, seed,
                                                     config_.max_interactions,
                                                     config_.experiment.effective_reward_scale());
  return s;
}

void PartnerService::journal(const std::string& id, const std::string& line) const {
  if (config_.journal_dir.empty()) return;
  std::ofstream out(config_.journal_dir / (id + ".jsonl"), std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw ConfigError("cannot write session journal for " + id);
}

void PartnerService::recover() {
  for (const auto& entry : std::filesystem::directory_iterator(config_.journal_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::shared_ptr<Session> s;
    try {
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        if (j.at("type") == "start") {
          s = open_session(j.at("session_id"), j.at("seed").get<std::uint64_t>(), j.at("reward_visible"));
        } else if (s && j.at("type") == "submit") {
          TowerOrder order;
          order.order = j.at("order").get<std::array<int, 4>>();
          s->game->submit(j.at("interaction").get<int>(), order);
        }
      }
    } catch (const std::exception& e) {
      log::warn("skipping unreadable journal ", entry.path().string(), ": ", e.what());
      continue;
    }
    if (s) {
      sessions_[s->id] = s;
      ++recovered_;
    }
  }
}

void PartnerService::expire_idle() {
  const auto t = now_();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (t - it->second->last_seen > config_.idle_timeout) {
      if (!config_.journal_dir.empty()) {
        const auto p = config_.journal_dir / (it->first + ".jsonl");
        std::error_code ec;
        std::filesystem::rename(p, p.string() + ".expired", ec);
      }
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<PartnerService::Session> PartnerService::find(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  expire_idle();
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Response PartnerService::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex session_re(R"(^/api/sessions/([A-Za-z0-9_-]+)$)");
  static const std::regex submit_re(R"(^/api/sessions/([A-Za-z0-9_-]+)/submissions$)");
  static const std::regex export_re(R"(^/api/sessions/([A-Za-z0-9_-]+)/export$)");
  std::smatch m;
  try {
    if (path == "/api/sessions") {
      if (method != "POST") return error(405, "use POST to create a session");
      return create(body);
    }
    if (std::regex_match(path, m, submit_re)) {
      if (method != "POST") return error(405, "use POST to submit a tower");
      return submit(m[1], body);
    }
    if (std::regex_match(path, m, export_re)) {
      if (method != "GET") return error(405, "use GET to export");
      return export_csv(m[1]);
    }
    if (std::regex_match(path, m, session_re)) {
      if (method != "GET") return error(405, "use GET to fetch a session");
      return state(m[1]);
    }
    return error(404, "no such endpoint");
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response PartnerService::create(const std::string& body) {
  if (!checkpoint_) return error(500, "no usable checkpoint: " + load_error_);
  const json req = body.empty() ? json::object() : json::parse(body);
  if (!req.is_object()) return error(400, "request body must be a JSON object");
  bool visible = config_.reward_visible;
  if (req.contains("reward_visible")) visible = req.at("reward_visible").get<bool>();
  std::string id;
  std::uint64_t seed = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    expire_idle();
    do {
      id = hex_id(id_rng_.next_u64());
    } while (sessions_.count(id));
    seed = req.contains("seed") ? req.at("seed").get<std::uint64_t>() : id_rng_.next_u64();
  }
  auto s = open_session(id, seed, visible);
  journal(id, json{{"type", "start"}, {"session_id", id}, {"seed", seed}, {"reward_visible", visible}}.dump());
  json out{{"session_id", id},
           {"max_interactions", config_.max_interactions},
           {"reward_visible", visible},
           {"layout", layout_json(id, *s->game)}};
  {
    std::lock_guard<std::mutex> lock(mu_);
    sessions_[id] = s;
  }
  return ok(201, out);
}

Response PartnerService::submit(const std::string& id, const std::string& body) {
  auto s = find(id);
  if (!s) return error(404, "unknown or expired session " + id);
  const json req = json::parse(body);
  if (!req.is_object() || !req.contains("interaction") || !req.contains("order")) {
    return error(400, "submission needs 'interaction' and 'order'");
  }
  if (req.contains("session_id") && req.at("session_id") != id) return error(400, "session id mismatch");
  const auto& o = req.at("order");
  if (!o.is_array() || o.size() != 4) return error(400, "order must list the four block ids");
  TowerOrder order;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!o[i].is_number_integer()) return error(400, "block ids must be integers");
    order.order[i] = o[i].get<int>();
  }
  if (!req.at("interaction").is_number_integer()) return error(400, "interaction must be an integer");
  const int interaction = req.at("interaction").get<int>();

  std::lock_guard<std::mutex> lock(s->mu);
  s->last_seen = now_();
  auto& game = *s->game;
  if (game.complete()) return error(409, "session is complete");
  if (interaction != game.next_interaction()) {
    return error(409, "expected interaction " + std::to_string(game.next_interaction()));
  }
  if (!is_permutation(order)) return error(400, "order is not a permutation of the block ids 0-3");
  // Write ahead, then apply.
  journal(id, json{{"type", "submit"}, {"interaction", interaction}, {"order", order.order}}.dump());
  const auto& rec = game.submit(interaction, order);
  json out{{"session_id", id},
           {"interaction", interaction},
           {"interaction_complete", true},
           {"session_complete", game.complete()}};
  if (s->reward_visible) out["reward"] = rec.reward;
  if (!game.complete()) out["next_layout"] = layout_json(id, game);
  return ok(200, out);
}

Response PartnerService::state(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown or expired session " + id);
  std::lock_guard<std::mutex> lock(s->mu);
  s->last_seen = now_();
  const auto& game = *s->game;
  json history = json::array();
  for (const auto& r : game.records()) history.push_back(record_json(r, s->reward_visible));
  json out{{"session_id", id},
           {"status", game.complete() ? "complete" : "active"},
           {"interaction", game.next_interaction()},
           {"max_interactions", game.max_interactions()},
           {"reward_visible", s->reward_visible},
           {"history", history}};
  if (!game.complete()) out["layout"] = layout_json(id, game);
  return ok(200, out);
}

Response PartnerService::export_csv(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown or expired session " + id);
  std::lock_guard<std::mutex> lock(s->mu);
  s->last_seen = now_();
  std::ostringstream csv;
  csv << transfer::kTowerLogHeader << '\n';
  for (const auto& r : s->game->records()) csv << transfer::tower_log_line(id, r) << '\n';
  return {200, csv.str(), "text/csv"};
}

void install_routes(httplib::Server& server, PartnerService& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/api/.*)", forward);
  server.Post(R"(/api/.*)", forward);
}

void serve(PartnerService& service, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, service);
  log::info("partner service listening on ", host, ":", port);
  if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace rili::service
