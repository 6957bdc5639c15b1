#include "rili/model/representation.hpp"

#include <cmath>
#include <limits>

#include "rili/core/errors.hpp"

namespace rili::model {

RepresentationBuffer::RepresentationBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("representation buffer capacity must be positive");
}

void RepresentationBuffer::add(const Featurizer& f, const HistoryWindow& window, const InteractionExperience& next) {
  if (window.capacity() < 1) throw StructuralError("empty history window");
  const auto last = window.last_index();
  if (last ? *last + 1 != next.index : next.index != 0) {
    throw SequencingError("history window does not immediately precede interaction " + std::to_string(next.index));
  }
  RepresentationSample s;
  s.window = f.window_features(window);
  s.steps = f.trajectory_features(next.trajectory());
  s.rewards = f.scaled_rewards(next);
  s.index = next.index;
  add(std::move(s));
}

void RepresentationBuffer::add(RepresentationSample sample) {
  if (!samples_.empty()) {
    const auto& a = samples_.front();
    if (sample.window.rows() != a.window.rows() || sample.window.cols() != a.window.cols() ||
        sample.steps.rows() != a.steps.rows() || sample.steps.cols() != a.steps.cols()) {
      throw StructuralError("representation sample shape differs from the buffer's");
    }
  }
  if (sample.rewards.size() != sample.steps.cols()) throw StructuralError("reward count differs from H");
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.push_back(std::move(sample));
}

std::vector<std::size_t> RepresentationBuffer::sample_indices(std::size_t n, SeededRng& rng) const {
  if (samples_.empty()) throw ContractError("sampling from an empty representation buffer");
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(samples_.size()));
  return idx;
}

template <typename T>
RepresentationBatch<T> RepresentationBuffer::gather(const std::vector<std::size_t>& idx) const {
  if (idx.empty()) throw ContractError("empty batch");
  const auto& first = samples_.at(idx[0]);
  const auto in = first.window.rows(), k = first.window.cols();
  const auto sd = first.steps.rows(), h = first.steps.cols();
  const auto b = static_cast<Eigen::Index>(idx.size());
  RepresentationBatch<T> out;
  out.slots.assign(static_cast<std::size_t>(k), Matrix<T>(in, b));
  out.steps.resize(sd, h * b);
  out.rewards.resize(h, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& s = samples_.at(idx[static_cast<std::size_t>(j)]);
    for (Eigen::Index c = 0; c < k; ++c) out.slots[static_cast<std::size_t>(c)].col(j) = s.window.col(c).cast<T>();
    out.steps.middleCols(j * h, h) = s.steps.cast<T>();
    out.rewards.col(j) = s.rewards.cast<T>();
  }
  return out;
}

template RepresentationBatch<float> RepresentationBuffer::gather<float>(const std::vector<std::size_t>&) const;
template RepresentationBatch<double> RepresentationBuffer::gather<double>(const std::vector<std::size_t>&) const;

RepresentationLearner::RepresentationLearner(Featurizer featurizer, RepresentationConfig config, SeededRng& rng)
    : featurizer_(std::move(featurizer)),
      config_(std::move(config)),
      encoder_(featurizer_.encoder_input_dim(), config_.history_length, config_.encoder_hidden, rng),
      decoder_(featurizer_.step_dim(), config_.decoder_hidden, rng) {
  reset_optimizers();
}

void RepresentationLearner::reset_optimizers() {
  enc_opt_ = nn::Adam<float>(encoder_.params(), config_.adam);
  dec_opt_ = nn::Adam<float>(decoder_.params(), config_.adam);
}

void RepresentationLearner::set_learning_rate(double lr) {
  config_.adam.learning_rate = lr;
  enc_opt_.config().learning_rate = lr;
  dec_opt_.config().learning_rate = lr;
}

InferredStrategy RepresentationLearner::predict(const HistoryWindow& window) const {
  if (window.capacity() != config_.history_length) throw StructuralError("history window has the wrong length");
  const MatrixF z = encoder_.predict(featurizer_.window_features(window));
  return InferredStrategy::from_vector(z.col(0).cast<double>());
}

MatrixF RepresentationLearner::predict_batch(const std::vector<MatrixF>& slots) const {
  Tape<float> tape;
  return tape.value(encoder_.forward(tape, slots, false));
}

VectorF RepresentationLearner::decode_features(const MatrixF& steps, const InferredStrategy& z) const {
  const MatrixF zf = z.value().cast<float>();
  return decoder_.predict(steps, zf).col(0);
}

VectorF RepresentationLearner::decode(const InteractionTrajectory& traj, const InferredStrategy& z) const {
  return decode_features(featurizer_.trajectory_features(traj), z);
}

double RepresentationLearner::loss(const RepresentationBatch<float>& batch) const {
  Tape<float> tape;
  return static_cast<double>(tape.scalar(representation_loss(tape, encoder_, decoder_, batch)));
}

double RepresentationLearner::train_on(const RepresentationBatch<float>& batch) {
  Tape<float> tape;
  auto l = representation_loss(tape, encoder_, decoder_, batch);
  tape.backward(l);
  enc_opt_.step(encoder_.params(), tape.gradients(encoder_.params()));
  dec_opt_.step(decoder_.params(), tape.gradients(decoder_.params()));
  return static_cast<double>(tape.scalar(l));
}

double RepresentationLearner::train(const RepresentationBuffer& buffer, int steps, int batch_size, SeededRng& rng) {
  if (steps < 0 || batch_size < 1) throw ContractError("invalid representation training request");
  if (steps == 0) return std::numeric_limits<double>::quiet_NaN();
  if (buffer.size() < static_cast<std::size_t>(batch_size)) {
    throw ContractError("representation buffer holds fewer samples than one batch");
  }
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    auto batch = buffer.gather<float>(buffer.sample_indices(static_cast<std::size_t>(batch_size), rng));
    total += train_on(batch);
  }
  return total / steps;
}

void RepresentationLearner::save(nn::Checkpoint& ck, const std::string& prefix) const {
  ck.put_params(prefix + "encoder", encoder_.params());
  ck.put_params(prefix + "decoder", decoder_.params());
  ck.put_adam(prefix + "encoder_opt", enc_opt_);
  ck.put_adam(prefix + "decoder_opt", dec_opt_);
  ck.put_int(prefix + "history_length", config_.history_length);
}

void RepresentationLearner::load(const nn::Checkpoint& ck, const std::string& prefix) {
  if (ck.integer(prefix + "history_length") != config_.history_length) {
    throw ConfigError("checkpoint history length differs from the configuration");
  }
  ck.get_params(prefix + "encoder", encoder_.params());
  ck.get_params(prefix + "decoder", decoder_.params());
  ck.get_adam(prefix + "encoder_opt", enc_opt_);
  ck.get_adam(prefix + "decoder_opt", dec_opt_);
}

}  // namespace rili::model
