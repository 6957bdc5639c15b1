#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/partners/dynamics.hpp"

namespace rili::partners {

struct ScheduleEvent {
  std::int64_t boundary = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  bool switched = false;
};

// Picks which scripted partner is active. At each interaction boundary the
// active partner is replaced, with probability p_switch, by one of the other
// N-1 partners. Events stay inside this object; nothing here is meant for the
// agent.
class PartnerScheduler {
 public:
  PartnerScheduler(std::vector<LatentDynamics> pool, double p_switch, SeededRng rng,
                   std::size_t initial_index = 0);

  const LatentDynamics& schedule_next();
  const LatentDynamics& active() const { return pool_[active_]; }
  std::size_t active_index() const { return active_; }
  std::size_t pool_size() const { return pool_.size(); }
  double switch_probability() const { return p_switch_; }
  const std::vector<ScheduleEvent>& events() const { return events_; }
  std::int64_t switch_count() const { return switches_; }

  void write_log_csv(const std::filesystem::path& path) const;

 private:
  std::vector<LatentDynamics> pool_;
  double p_switch_;
  SeededRng rng_;
  std::size_t active_;
  std::vector<ScheduleEvent> events_;
  std::int64_t switches_ = 0;
};

}  // namespace rili::partners
