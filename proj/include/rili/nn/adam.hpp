#pragma once

#include <cmath>
#include <cstdint>

#include "rili/nn/param_set.hpp"

namespace rili::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are shaped like the parameter set the
// optimizer was built for.
template <typename T>
class Adam {
 public:
  Adam() = default;

  Adam(const ParamSet<T>& params, AdamConfig config) : config_(config) {
    for (const auto& e : params.entries()) {
      m_.push_back(Matrix<T>::Zero(e.value.rows(), e.value.cols()));
      v_.push_back(Matrix<T>::Zero(e.value.rows(), e.value.cols()));
    }
  }

  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }
  std::int64_t steps() const { return steps_; }
  const Gradients<T>& first_moments() const { return m_; }
  const Gradients<T>& second_moments() const { return v_; }

  void restore(std::int64_t steps, Gradients<T> m, Gradients<T> v) {
    if (m.size() != m_.size() || v.size() != v_.size()) throw StructuralError("Adam: moment count mismatch");
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  void step(ParamSet<T>& params, const Gradients<T>& grads) {
    if (grads.size() != params.size() || m_.size() != params.size()) {
      throw StructuralError("Adam: gradient/parameter count mismatch");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
      if (grads[i].rows() != params.value(i).rows() || grads[i].cols() != params.value(i).cols()) {
        throw StructuralError("Adam: gradient shape mismatch for " + params.name(i));
      }
      if (!grads[i].allFinite()) throw NumericError("Adam: non-finite gradient for " + params.name(i));
    }
    ++steps_;
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    const T lr = static_cast<T>(config_.learning_rate);
    const T eps = static_cast<T>(config_.epsilon);
    const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);
    for (std::size_t i = 0; i < grads.size(); ++i) {
      m_[i] = b1 * m_[i] + (T(1) - b1) * grads[i];
      v_[i] = b2 * v_[i] + (T(1) - b2) * grads[i].cwiseAbs2();
      if (lr == T(0)) continue;
      params.value(i).array() -=
          lr * (m_[i].array() * inv_c1) / ((v_[i].array() * inv_c2).sqrt() + eps);
      if (!params.value(i).allFinite()) throw NumericError("Adam: update produced non-finite " + params.name(i));
    }
    params.bump_version();
  }

 private:
  AdamConfig config_;
  Gradients<T> m_, v_;
  std::int64_t steps_ = 0;
};

}  // namespace rili::nn
