#include "rili/transfer/tower_session.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace rili::transfer {

namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string tower_log_line(const std::string& session, const TowerRecord& r) {
  std::ostringstream s;
  s << session << ',' << r.interaction;
  for (double d : r.distances) s << ',' << num(d);
  for (int b : r.order.order) s << ',' << b;
  s << ',' << num(r.reward);
  return s.str();
}

TowerSession::TowerSession(const sac::LearnerConfig& learner, const nn::Checkpoint& checkpoint,
                           TrajectoryLibrary library, TransferConfig transfer, TowerGeometry geometry,
                           std::uint64_t seed, int max_interactions, double reward_scale)
    : geometry_(geometry), seed_(seed), max_(max_interactions), rng_(seed), env_(geometry, seed) {
  if (max_ < 1) throw ConfigError("a session needs at least one interaction");
  env_.set_reward_scale(reward_scale);
  SeededRng init = rng_.fork(1);
  agent_ = std::make_unique<TransferAgent>(env_.spec(), learner, checkpoint, std::move(library), transfer, init);
  pending_ = agent_->choose();
}

std::array<double, 4> TowerSession::layout() const {
  if (complete()) throw ContractError("session is complete");
  const auto& traj = agent_->library().at(pending_);
  std::array<double, 4> d{};
  for (std::size_t i = 0; i < d.size() && i < traj.size(); ++i) d[i] = std::clamp(traj.points[i].action[0], 0.0, 1.0);
  return d;
}

const TowerRecord& TowerSession::submit(int interaction, const TowerOrder& order) {
  if (complete()) throw SequencingError("session is complete");
  if (interaction != next_interaction()) {
    throw SequencingError("expected interaction " + std::to_string(next_interaction()) + ", got " +
                          std::to_string(interaction));
  }
  if (!is_permutation(order)) throw StructuralError("tower order is not a permutation of the four blocks");
  TowerRecord rec;
  rec.interaction = interaction;
  rec.distances = layout();
  rec.order = order;
  // The submitted tower stands in for the partner's strategy.
  auto exp = execute_open_loop(env_, agent_->library().at(pending_), order);
  rec.reward = envs::tower_reward(geometry_.target, order);
  agent_->observe(std::move(exp), rng_);
  records_.push_back(rec);
  if (!complete()) pending_ = agent_->choose();
  return records_.back();
}

}  // namespace rili::transfer
