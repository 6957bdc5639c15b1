#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/nn/tape.hpp"

namespace rili::nn {

enum class Activation { kIdentity, kRelu, kTanh };

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int output_dim = 1;
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  void validate() const {
    if (input_dim < 1 || output_dim < 1) throw StructuralError("MlpSpec: dims must be >= 1");
    for (int h : hidden_dims) {
      if (h < 1) throw StructuralError("MlpSpec: hidden dims must be >= 1");
    }
  }
  bool operator==(const MlpSpec&) const = default;
};

template <typename T>
Matrix<T> uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, SeededRng& rng) {
  Matrix<T> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<T>(rng.uniform(-bound, bound));
  }
  return m;
}

template <typename T>
typename Tape<T>::Var apply_activation(Tape<T>& tape, typename Tape<T>::Var x, Activation act) {
  switch (act) {
    case Activation::kRelu: return tape.relu(x);
    case Activation::kTanh: return tape.tanh(x);
    case Activation::kIdentity: break;
  }
  return x;
}

// Fully connected network. Parameters are stored as W0, b0, W1, b1, ... with
// W_l of shape (out x in); inputs are (input_dim x batch).
template <typename T>
class Mlp {
 public:
  using Var = typename Tape<T>::Var;

  Mlp() = default;

  // Zero-initialized.
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    int in = spec_.input_dim;
    auto dims = spec_.hidden_dims;
    dims.push_back(spec_.output_dim);
    for (std::size_t l = 0; l < dims.size(); ++l) {
      params_.add("W" + std::to_string(l), Matrix<T>::Zero(dims[l], in));
      params_.add("b" + std::to_string(l), Matrix<T>::Zero(dims[l], 1));
      in = dims[l];
    }
  }

  // Fan-in scaled uniform initialization.
  Mlp(MlpSpec spec, SeededRng& rng) : Mlp(std::move(spec)) {
    for (std::size_t i = 0; i < params_.size(); i += 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(params_.value(i).cols()));
      params_.value(i) = uniform_matrix<T>(params_.value(i).rows(), params_.value(i).cols(), bound, rng);
      params_.value(i + 1) = uniform_matrix<T>(params_.value(i + 1).rows(), 1, bound, rng);
    }
  }

  Mlp(MlpSpec spec, ParamSet<T> params) : spec_(std::move(spec)), params_(std::move(params)) {
    Mlp shape_ref(spec_);
    if (!shape_ref.params_.same_shapes(params_)) throw StructuralError("Mlp: parameter shapes do not match spec");
  }

  const MlpSpec& spec() const { return spec_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  std::size_t num_layers() const { return params_.size() / 2; }

  Var forward(Tape<T>& tape, Var x, bool trainable = true) const {
    if (tape.value(x).rows() != spec_.input_dim) {
      throw StructuralError("Mlp: input has " + std::to_string(tape.value(x).rows()) + " rows, expected " +
                            std::to_string(spec_.input_dim));
    }
    Var h = x;
    const std::size_t layers = num_layers();
    for (std::size_t l = 0; l < layers; ++l) {
      Var w = tape.param(params_, 2 * l, trainable);
      Var b = tape.param(params_, 2 * l + 1, trainable);
      h = tape.add_bias(tape.matmul(w, h), b);
      h = apply_activation(tape, h, l + 1 < layers ? spec_.hidden_activation : spec_.output_activation);
    }
    return h;
  }

  Matrix<T> predict(const Matrix<T>& x) const {
    Tape<T> tape;
    return tape.value(forward(tape, tape.constant(x), false));
  }

 private:
  MlpSpec spec_;
  ParamSet<T> params_;
};

}  // namespace rili::nn
