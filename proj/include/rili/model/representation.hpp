#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/model/features.hpp"
#include "rili/nn/adam.hpp"
#include "rili/nn/checkpoint.hpp"
#include "rili/nn/gru.hpp"
#include "rili/nn/mlp.hpp"

namespace rili::model {

using nn::Matrix;
using nn::Tape;

// GRU over the k most recent interactions -> latent strategy.
template <typename T>
class Encoder {
 public:
  using Var = typename Tape<T>::Var;

  Encoder() = default;
  Encoder(int input_dim, int k, int hidden) : k_(k), gru_(nn::GruSpec{input_dim, hidden, kLatentDim}) { check_k(); }
  Encoder(int input_dim, int k, int hidden, SeededRng& rng)
      : k_(k), gru_(nn::GruSpec{input_dim, hidden, kLatentDim}, rng) {
    check_k();
  }

  int history_length() const { return k_; }
  int input_dim() const { return gru_.spec().input_dim; }
  nn::ParamSet<T>& params() { return gru_.params(); }
  const nn::ParamSet<T>& params() const { return gru_.params(); }
  const nn::Gru<T>& gru() const { return gru_; }

  // slots[s] is input_dim x B for history slot s (oldest first).
  Var forward(Tape<T>& tape, const std::vector<Matrix<T>>& slots, bool trainable = true) const {
    if (static_cast<int>(slots.size()) != k_) throw StructuralError("encoder expects exactly k history slots");
    std::vector<Var> xs;
    xs.reserve(slots.size());
    for (const auto& m : slots) xs.push_back(tape.constant(m));
    return gru_.forward(tape, xs, trainable);
  }

  // window: input_dim x k for a single history.
  Matrix<T> predict(const Matrix<T>& window) const {
    std::vector<Matrix<T>> slots;
    for (Eigen::Index s = 0; s < window.cols(); ++s) slots.push_back(window.col(s));
    Tape<T> tape;
    return tape.value(forward(tape, slots, false));
  }

 private:
  void check_k() const {
    if (k_ < 1) throw StructuralError("history length must be >= 1");
  }
  int k_ = 1;
  nn::Gru<T> gru_;
};

// Per-timestep reward model r_t = D(s_t, a_t, z).
template <typename T>
class Decoder {
 public:
  using Var = typename Tape<T>::Var;

  Decoder() = default;
  Decoder(int step_dim, std::vector<int> hidden) : net_(spec(step_dim, std::move(hidden))) {}
  Decoder(int step_dim, std::vector<int> hidden, SeededRng& rng) : net_(spec(step_dim, std::move(hidden)), rng) {}

  int step_dim() const { return net_.spec().input_dim - kLatentDim; }
  nn::ParamSet<T>& params() { return net_.params(); }
  const nn::ParamSet<T>& params() const { return net_.params(); }
  const nn::Mlp<T>& mlp() const { return net_; }

  // steps: step_dim x (H*B), column b*H + t; z: kLatentDim x B. Returns H x B.
  Var forward(Tape<T>& tape, Var steps, Var z, Eigen::Index horizon, bool trainable = true) const {
    // Copy the shapes out: tape references move as nodes are added.
    const Eigen::Index s_rows = tape.value(steps).rows(), s_cols = tape.value(steps).cols();
    const Eigen::Index z_rows = tape.value(z).rows(), batch = tape.value(z).cols();
    if (s_rows != step_dim() || z_rows != kLatentDim || s_cols != horizon * batch) {
      throw StructuralError("decoder input shapes are inconsistent");
    }
    auto in = tape.concat_rows({steps, tape.repeat_cols(z, horizon)});
    auto out = net_.forward(tape, in, trainable);
    return tape.reshape(out, horizon, batch);
  }

  // steps: step_dim x H for one trajectory, z: kLatentDim x 1 -> H rewards.
  Matrix<T> predict(const Matrix<T>& steps, const Matrix<T>& z) const {
    Tape<T> tape;
    return tape.value(forward(tape, tape.constant(steps), tape.constant(z), steps.cols(), false));
  }

 private:
  static nn::MlpSpec spec(int step_dim, std::vector<int> hidden) {
    return nn::MlpSpec{step_dim + kLatentDim, std::move(hidden), 1};
  }
  nn::Mlp<T> net_;
};

template <typename T>
struct RepresentationBatch {
  std::vector<Matrix<T>> slots;  // k x (input_dim x B)
  Matrix<T> steps;               // step_dim x (H*B)
  Matrix<T> rewards;             // H x B
  Eigen::Index size() const { return rewards.cols(); }
};

// Mean over the batch of the L2 norm of each interaction's reward residual.
template <typename T>
typename Tape<T>::Var representation_loss(Tape<T>& tape, const Encoder<T>& enc, const Decoder<T>& dec,
                                          const RepresentationBatch<T>& batch) {
  if (batch.size() == 0) throw ContractError("representation loss needs a non-empty batch");
  auto z = enc.forward(tape, batch.slots);
  auto pred = dec.forward(tape, tape.constant(batch.steps), z, batch.rewards.rows());
  return tape.mean(tape.col_norm(tape.sub(pred, tape.constant(batch.rewards))));
}

// One representation training tuple: the window that preceded an interaction, and that
// interaction's trajectory and rewards (all featurized).
struct RepresentationSample {
  MatrixF window;   // input_dim x k
  MatrixF steps;    // step_dim x H
  VectorF rewards;  // H
  std::int64_t index = 0;
};

class RepresentationBuffer {
 public:
  explicit RepresentationBuffer(std::size_t capacity = 50000);

  // window must end with the interaction immediately before next.
  void add(const Featurizer& f, const HistoryWindow& window, const InteractionExperience& next);
  void add(RepresentationSample sample);

  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  const RepresentationSample& at(std::size_t i) const { return samples_.at(i); }
  void clear() { samples_.clear(); }

  template <typename T>
  RepresentationBatch<T> gather(const std::vector<std::size_t>& idx) const;
  std::vector<std::size_t> sample_indices(std::size_t n, SeededRng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<RepresentationSample> samples_;
};

struct RepresentationConfig {
  int history_length = kDefaultHistoryLength;
  int encoder_hidden = 64;
  std::vector<int> decoder_hidden{64, 64};
  nn::AdamConfig adam{3e-4};
  int batch_size = 64;
  std::size_t buffer_capacity = 50000;
};

// Encoder + decoder trained jointly to predict the next interaction from the window.
class RepresentationLearner {
 public:
  RepresentationLearner() = default;
  RepresentationLearner(Featurizer featurizer, RepresentationConfig config, SeededRng& rng);

  const Featurizer& featurizer() const { return featurizer_; }
  const RepresentationConfig& config() const { return config_; }
  int history_length() const { return config_.history_length; }
  Encoder<float>& encoder() { return encoder_; }
  const Encoder<float>& encoder() const { return encoder_; }
  Decoder<float>& decoder() { return decoder_; }
  const Decoder<float>& decoder() const { return decoder_; }

  InferredStrategy predict(const HistoryWindow& window) const;
  // windows: k matrices of input_dim x B -> kLatentDim x B
  MatrixF predict_batch(const std::vector<MatrixF>& slots) const;
  // Predicted (scaled) per-step rewards of a trajectory under z.
  VectorF decode(const InteractionTrajectory& traj, const InferredStrategy& z) const;
  VectorF decode_features(const MatrixF& steps, const InferredStrategy& z) const;

  double loss(const RepresentationBatch<float>& batch) const;
  // `steps` Adam updates on uniformly sampled minibatches; returns the mean
  // loss over the updates (NaN when steps == 0).
  double train(const RepresentationBuffer& buffer, int steps, int batch_size, SeededRng& rng);
  double train_on(const RepresentationBatch<float>& batch);

  void save(nn::Checkpoint& ck, const std::string& prefix) const;
  void load(const nn::Checkpoint& ck, const std::string& prefix);
  // Fresh optimizer state (used when transfer starts adapting).
  void reset_optimizers();
  void set_learning_rate(double lr);

 private:
  Featurizer featurizer_;
  RepresentationConfig config_;
  Encoder<float> encoder_;
  Decoder<float> decoder_;
  nn::Adam<float> enc_opt_;
  nn::Adam<float> dec_opt_;
};

}  // namespace rili::model
