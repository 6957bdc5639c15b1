#include "rili/partners/scheduler.hpp"

#include <fstream>

#include "rili/core/errors.hpp"

namespace rili::partners {

PartnerScheduler::PartnerScheduler(std::vector<LatentDynamics> pool, double p_switch, SeededRng rng,
                                   std::size_t initial_index)
    : pool_(std::move(pool)), p_switch_(p_switch), rng_(rng), active_(initial_index) {
  if (pool_.empty()) throw ConfigError("partner pool is empty");
  if (!(p_switch >= 0.0 && p_switch <= 1.0)) throw ConfigError("switch probability must be in [0, 1]");
  if (initial_index >= pool_.size()) throw ConfigError("initial partner index out of range");
}

const LatentDynamics& PartnerScheduler::schedule_next() {
  ScheduleEvent ev;
  ev.boundary = static_cast<std::int64_t>(events_.size());
  ev.from = active_;
  if (pool_.size() > 1 && rng_.bernoulli(p_switch_)) {
    // Uniform over the other N-1 partners.
    auto j = static_cast<std::size_t>(rng_.uniform_index(pool_.size() - 1));
    if (j >= active_) ++j;
    active_ = j;
    ev.switched = true;
    ++switches_;
  }
  ev.to = active_;
  events_.push_back(ev);
  return pool_[active_];
}

void PartnerScheduler::write_log_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "boundary,from,to,switched\n";
  for (const auto& e : events_) {
    out << e.boundary << ',' << pool_[e.from].id << ',' << pool_[e.to].id << ',' << (e.switched ? 1 : 0) << '\n';
  }
}

}  // namespace rili::partners
