#pragma once

// Gated recurrent unit with a linear head, used as the history encoder.
//
// For input x_t and previous state h_{t-1}, with s(.) the logistic sigmoid:
//   r_t = s(W_r x_t + U_r h_{t-1} + b_r)          reset gate
//   u_t = s(W_u x_t + U_u h_{t-1} + b_u)          update gate
//   n_t = tanh(W_n x_t + r_t * (U_n h_{t-1}) + b_n)
//   h_t = (1 - u_t) * n_t + u_t * h_{t-1}
// h_0 = 0 and the output is W_o h_T + b_o.
//
// With u_t saturated at 1 the state never moves from h_0; with all
// parameters zero, n_t = 0 and h stays at zero.

#include <span>

#include "rili/core/types.hpp"
#include "rili/nn/mlp.hpp"

namespace rili::nn {

struct GruSpec {
  int input_dim = 1;
  int hidden_dim = 64;
  int output_dim = kLatentDim;

  void validate() const {
    if (input_dim < 1 || hidden_dim < 1) throw StructuralError("GruSpec: dims must be >= 1");
    if (output_dim != kLatentDim) throw StructuralError("GruSpec: head must output the latent dimension");
  }
  bool operator==(const GruSpec&) const = default;
};

template <typename T>
class Gru {
 public:
  using Var = typename Tape<T>::Var;

  // Parameter indices, in storage order.
  enum : std::size_t { kWr, kUr, kBr, kWu, kUu, kBu, kWn, kUn, kBn, kWo, kBo, kCount };

  Gru() = default;

  explicit Gru(GruSpec spec) : spec_(spec) {
    spec_.validate();
    const int in = spec_.input_dim, hid = spec_.hidden_dim;
    for (const char* g : {"r", "u", "n"}) {
      params_.add(std::string("W_") + g, Matrix<T>::Zero(hid, in));
      params_.add(std::string("U_") + g, Matrix<T>::Zero(hid, hid));
      params_.add(std::string("b_") + g, Matrix<T>::Zero(hid, 1));
    }
    params_.add("W_o", Matrix<T>::Zero(spec_.output_dim, hid));
    params_.add("b_o", Matrix<T>::Zero(spec_.output_dim, 1));
  }

  // Plain scaled-uniform initialization, bound 1/sqrt(hidden) for the
  // recurrent cell and 1/sqrt(hidden) fan-in for the head.
  Gru(GruSpec spec, SeededRng& rng) : Gru(spec) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_dim));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& v = params_.value(i);
      v = uniform_matrix<T>(v.rows(), v.cols(), bound, rng);
    }
  }

  Gru(GruSpec spec, ParamSet<T> params) : spec_(spec), params_(std::move(params)) {
    Gru shape_ref(spec_);
    if (!shape_ref.params_.same_shapes(params_)) throw StructuralError("Gru: parameter shapes do not match spec");
  }

  const GruSpec& spec() const { return spec_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  // sequence[t] is (input_dim x batch); returns (output_dim x batch).
  Var forward(Tape<T>& tape, std::span<const Var> sequence, bool trainable = true) const {
    if (sequence.empty()) throw ContractError("Gru: empty input sequence");
    const auto batch = tape.value(sequence[0]).cols();
    auto p = [&](std::size_t i) { return tape.param(params_, i, trainable); };
    Var h = tape.constant(Matrix<T>::Zero(spec_.hidden_dim, batch));
    for (Var x : sequence) {
      if (tape.value(x).rows() != spec_.input_dim || tape.value(x).cols() != batch) {
        throw StructuralError("Gru: sequence element has wrong shape");
      }
      Var r = tape.sigmoid(tape.add_bias(tape.add(tape.matmul(p(kWr), x), tape.matmul(p(kUr), h)), p(kBr)));
      Var u = tape.sigmoid(tape.add_bias(tape.add(tape.matmul(p(kWu), x), tape.matmul(p(kUu), h)), p(kBu)));
      Var n = tape.tanh(
          tape.add_bias(tape.add(tape.matmul(p(kWn), x), tape.mul(r, tape.matmul(p(kUn), h))), p(kBn)));
      h = tape.add(tape.mul(tape.one_minus(u), n), tape.mul(u, h));
    }
    return tape.add_bias(tape.matmul(p(kWo), h), p(kBo));
  }

  Matrix<T> predict(const std::vector<Matrix<T>>& sequence) const {
    Tape<T> tape;
    std::vector<Var> xs;
    xs.reserve(sequence.size());
    for (const auto& m : sequence) xs.push_back(tape.constant(m));
    return tape.value(forward(tape, xs, false));
  }

 private:
  GruSpec spec_;
  ParamSet<T> params_;
};

}  // namespace rili::nn
