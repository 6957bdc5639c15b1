#include "rili/sac/replay.hpp"

#include "rili/core/errors.hpp"

namespace rili::sac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::add(ReplayInteraction it) {
  const auto h = it.actions.cols();
  if (h < 1 || it.states.cols() != h + 1 || it.rewards.cols() != h || it.rewards.rows() != 1) {
    throw StructuralError("replay interaction has inconsistent lengths");
  }
  if (it.z.rows() != kLatentDim || it.z.cols() != 1) throw StructuralError("replay z must be a latent vector");
  if (!items_.empty()) {
    const auto& a = items_.front();
    if (a.actions.cols() != h || a.states.rows() != it.states.rows() || a.actions.rows() != it.actions.rows() ||
        a.window.rows() != it.window.rows() || a.window.cols() != it.window.cols()) {
      throw StructuralError("replay interaction shape differs from the buffer's");
    }
  }
  transitions_ += static_cast<std::size_t>(h);
  items_.push_back(std::move(it));
  while (transitions_ > capacity_ && items_.size() > 1) {
    transitions_ -= static_cast<std::size_t>(items_.front().actions.cols());
    items_.pop_front();
  }
}

std::vector<TransitionRef> ReplayBuffer::sample(std::size_t n, SeededRng& rng) const {
  if (items_.empty()) throw ContractError("sampling from an empty replay buffer");
  const auto h = static_cast<std::uint64_t>(items_.front().actions.cols());
  std::vector<TransitionRef> refs(n);
  for (auto& r : refs) {
    const auto flat = rng.uniform_index(items_.size() * h);
    r.interaction = static_cast<std::size_t>(flat / h);
    r.step = static_cast<int>(flat % h);
  }
  return refs;
}

SacBatch<float> ReplayBuffer::gather(const std::vector<TransitionRef>& refs, const Encode* encode) const {
  if (refs.empty()) throw ContractError("empty replay batch");
  const auto& first = items_.at(refs[0].interaction);
  const auto sd = first.states.rows(), ad = first.actions.rows(), h = first.actions.cols();
  const auto b = static_cast<Eigen::Index>(refs.size());

  Matrix<float> z(kLatentDim, b);
  if (encode != nullptr && first.window.size() > 0) {
    const auto k = first.window.cols();
    std::vector<Matrix<float>> slots(static_cast<std::size_t>(k), Matrix<float>(first.window.rows(), b));
    for (Eigen::Index j = 0; j < b; ++j) {
      const auto& w = items_.at(refs[static_cast<std::size_t>(j)].interaction).window;
      for (Eigen::Index s = 0; s < k; ++s) slots[static_cast<std::size_t>(s)].col(j) = w.col(s);
    }
    z = (*encode)(slots);
  } else {
    for (Eigen::Index j = 0; j < b; ++j) z.col(j) = items_.at(refs[static_cast<std::size_t>(j)].interaction).z;
  }

  SacBatch<float> out;
  out.obs.resize(sd + kLatentDim, b);
  out.next_obs.resize(sd + kLatentDim, b);
  out.actions.resize(ad, b);
  out.rewards.resize(1, b);
  out.dones.resize(1, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& r = refs[static_cast<std::size_t>(j)];
    const auto& it = items_.at(r.interaction);
    out.obs.col(j) << it.states.col(r.step), z.col(j);
    out.next_obs.col(j) << it.states.col(r.step + 1), z.col(j);
    out.actions.col(j) = it.actions.col(r.step);
    out.rewards(0, j) = it.rewards(0, r.step);
    out.dones(0, j) = r.step + 1 == h ? 1.0f : 0.0f;
  }
  return out;
}

}  // namespace rili::sac
