#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rili/harness/config.hpp"
#include "rili/harness/experiment.hpp"
#include "rili/transfer/tower_session.hpp"

namespace httplib {
class Server;
}

namespace rili::service {

using Clock = std::chrono::steady_clock;

struct ServiceConfig {
  harness::ExperimentConfig experiment;  // tower config: learner, geometry, transfer settings
  std::filesystem::path checkpoint;      // RILI tower checkpoint with a library
  std::filesystem::path journal_dir;     // empty: no persistence
  std::chrono::seconds idle_timeout{30 * 60};
  int max_interactions = 35;
  bool reward_visible = false;
  std::uint64_t seed = 0;  // drives session ids and default session seeds
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline constexpr std::array<const char*, 4> kBlockColors{"purple", "red", "green", "yellow"};

// The tower game over HTTP+JSON, transport-independent. Endpoints:
//   POST /api/sessions                     {seed?, reward_visible?} -> 201
//   POST /api/sessions/{id}/submissions    {interaction, order}     -> 200
//   GET  /api/sessions/{id}                                          -> 200
//   GET  /api/sessions/{id}/export                                   -> 200 text/csv
// Errors are {"error": message} with 400 (malformed), 404 (unknown or
// expired), 409 (out of sequence) or 500 (no usable checkpoint).
class PartnerService {
 public:
  explicit PartnerService(ServiceConfig config, std::function<Clock::time_point()> now = Clock::now);

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  std::size_t active_sessions() const;
  // Sessions restored from journals at construction.
  std::size_t recovered() const { return recovered_; }

 private:
  struct Session {
    std::string id;
    std::unique_ptr<transfer::TowerSession> game;
    bool reward_visible = false;
    Clock::time_point last_seen;
    std::mutex mu;
  };

  Response create(const std::string& body);
  Response submit(const std::string& id, const std::string& body);
  Response state(const std::string& id);
  Response export_csv(const std::string& id);

  std::shared_ptr<Session> find(const std::string& id);
  std::shared_ptr<Session> open_session(const std::string& id, std::uint64_t seed, bool reward_visible);
  void expire_idle();
  void journal(const std::string& id, const std::string& line) const;
  void recover();

  ServiceConfig config_;
  std::function<Clock::time_point()> now_;
  std::optional<nn::Checkpoint> checkpoint_;
  std::optional<transfer::TrajectoryLibrary> library_;
  std::string load_error_;
  mutable std::mutex mu_;
  SeededRng id_rng_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t recovered_ = 0;
};

// Routes /api/* on `server` to `service`.
void install_routes(httplib::Server& server, PartnerService& service);

// Blocks serving `service` on host:port until the process is stopped.
void serve(PartnerService& service, const std::string& host, int port);

}  // namespace rili::service
