#pragma once

// Central finite-difference gradient checks for anything built on Tape.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rili/core/rng.hpp"
#include "rili/nn/tape.hpp"

namespace rili::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

// |a - n| / max(|a|, |n|), falling back to the absolute error when both are
// below `floor` (gradients that are numerically zero).
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return denom < floor ? diff : diff / denom;
}

using LossBuilder = std::function<Tape<double>::Var(Tape<double>&)>;

// Compares tape gradients of `build` w.r.t. `params` with central differences
// of step h. Checks up to `per_tensor` randomly chosen entries of every
// parameter tensor (all entries when the tensor is smaller). Coordinates whose
// perturbation flips a relu/clamp/min branch are skipped and counted.
// Gradients below 1e-6 * max(1, |loss|) are compared by absolute error: at
// that size the central difference is dominated by round-off (~eps |L| / h).
inline GradCheckResult check_param_gradients(ParamSet<double>& params, const LossBuilder& build,
                                             SeededRng& rng, std::size_t per_tensor = 8, double h = 1e-5) {
  GradCheckResult result;
  Tape<double> tape;
  auto loss = build(tape);
  tape.backward(loss);
  const auto grads = tape.gradients(params);
  const std::uint64_t base_sig = tape.kink_signature();
  const double floor = 1e-6 * std::max(1.0, std::abs(tape.scalar(loss)));

  auto eval = [&](std::uint64_t& sig) {
    Tape<double> t;
    auto l = build(t);
    sig = t.kink_signature();
    return t.scalar(l);
  };

  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& m = params.value(p);
    std::vector<Eigen::Index> coords;
    if (static_cast<std::size_t>(m.size()) <= per_tensor) {
      for (Eigen::Index i = 0; i < m.size(); ++i) coords.push_back(i);
    } else {
      for (std::size_t j = 0; j < per_tensor; ++j) {
        coords.push_back(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(m.size()))));
      }
    }
    for (Eigen::Index i : coords) {
      const double orig = m.data()[i];
      std::uint64_t sig_plus = 0, sig_minus = 0;
      m.data()[i] = orig + h;
      const double plus = eval(sig_plus);
      m.data()[i] = orig - h;
      const double minus = eval(sig_minus);
      m.data()[i] = orig;
      if (sig_plus != base_sig || sig_minus != base_sig) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(grads[p].data()[i], numeric, floor));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace rili::nn
