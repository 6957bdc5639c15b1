#pragma once

// Soft actor-critic losses built on the tape, templated so the same code runs
// in float for training and in double for gradient checks.
//
// Observations are (obs_dim x B) with obs = s | z; actions live in [-1, 1].

#include <cmath>
#include <numbers>

#include "rili/nn/mlp.hpp"

namespace rili::sac {

using nn::Matrix;
using nn::Mlp;
using nn::Tape;

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

template <typename T>
struct SacBatch {
  Matrix<T> obs;       // obs_dim x B
  Matrix<T> actions;   // action_dim x B, in [-1, 1]
  Matrix<T> rewards;   // 1 x B
  Matrix<T> next_obs;  // obs_dim x B
  Matrix<T> dones;     // 1 x B, 1 where the transition ends the interaction
  Eigen::Index size() const { return obs.cols(); }
};

template <typename T>
struct PolicySample {
  typename Tape<T>::Var action;    // tanh-squashed, action_dim x B
  typename Tape<T>::Var log_prob;  // 1 x B
  typename Tape<T>::Var mean;      // pre-squash mean
};

// Reparameterized squashed Gaussian: a = tanh(mu + sigma * eps).
// log pi(a) = sum N(eps) - sum log sigma - sum log(1 - tanh(u)^2), with the
// last term computed as 2 (log 2 - u - softplus(-2u)).
template <typename T>
PolicySample<T> sample_policy(Tape<T>& tape, const Mlp<T>& actor, typename Tape<T>::Var obs, const Matrix<T>& eps,
                              bool trainable = true) {
  const auto ad = eps.rows();
  auto out = actor.forward(tape, obs, trainable);
  auto mean = tape.slice_rows(out, 0, ad);
  auto log_std = tape.clamp(tape.slice_rows(out, ad, ad), T(kLogStdMin), T(kLogStdMax));
  auto e = tape.constant(eps);
  auto u = tape.add(mean, tape.mul(tape.exp(log_std), e));
  auto a = tape.tanh(u);
  const T half_log_2pi = static_cast<T>(0.5 * std::log(2.0 * std::numbers::pi));
  auto gauss = tape.sub(tape.scale(tape.square(e), T(-0.5)), log_std);
  auto log_det = tape.scale(
      tape.add_scalar(tape.add(u, tape.softplus(tape.scale(u, T(-2)))), -static_cast<T>(std::log(2.0))), T(-2));
  auto lp = tape.add_scalar(tape.col_sum(tape.sub(gauss, log_det)), -half_log_2pi * static_cast<T>(ad));
  return {a, lp, mean};
}

template <typename T>
typename Tape<T>::Var q_value(Tape<T>& tape, const Mlp<T>& critic, typename Tape<T>::Var obs,
                              typename Tape<T>::Var action, bool trainable = true) {
  return critic.forward(tape, tape.concat_rows({obs, action}), trainable);
}

// Entropy-regularized Bellman target; no gradient flows through it.
template <typename T>
Matrix<T> critic_target(const Mlp<T>& actor, const Mlp<T>& q1_target, const Mlp<T>& q2_target,
                        const SacBatch<T>& batch, const Matrix<T>& eps_next, T alpha, T gamma) {
  Tape<T> tape;
  auto next = tape.constant(batch.next_obs);
  auto pi = sample_policy(tape, actor, next, eps_next, false);
  auto q1 = q_value(tape, q1_target, next, pi.action, false);
  auto q2 = q_value(tape, q2_target, next, pi.action, false);
  const Matrix<T> soft = tape.value(q1).cwiseMin(tape.value(q2)) - alpha * tape.value(pi.log_prob);
  return batch.rewards + (gamma * (Matrix<T>::Ones(1, batch.size()) - batch.dones)).cwiseProduct(soft);
}

// mean (Q1 - y)^2 + mean (Q2 - y)^2
template <typename T>
typename Tape<T>::Var critic_loss(Tape<T>& tape, const Mlp<T>& q1, const Mlp<T>& q2, const SacBatch<T>& batch,
                                  const Matrix<T>& target) {
  auto obs = tape.constant(batch.obs);
  auto act = tape.constant(batch.actions);
  auto y = tape.constant(target);
  auto l1 = tape.mean(tape.square(tape.sub(q_value(tape, q1, obs, act), y)));
  auto l2 = tape.mean(tape.square(tape.sub(q_value(tape, q2, obs, act), y)));
  return tape.add(l1, l2);
}

// mean (alpha log pi(a|s) - min(Q1, Q2)(s, a)), critics frozen.
template <typename T>
typename Tape<T>::Var actor_loss(Tape<T>& tape, const Mlp<T>& actor, const Mlp<T>& q1, const Mlp<T>& q2,
                                 const SacBatch<T>& batch, const Matrix<T>& eps, T alpha,
                                 typename Tape<T>::Var* log_prob_out = nullptr) {
  auto obs = tape.constant(batch.obs);
  auto pi = sample_policy(tape, actor, obs, eps);
  auto qa = q_value(tape, q1, obs, pi.action, false);
  auto qb = q_value(tape, q2, obs, pi.action, false);
  if (log_prob_out != nullptr) *log_prob_out = pi.log_prob;
  return tape.mean(tape.sub(tape.scale(pi.log_prob, alpha), tape.minimum(qa, qb)));
}

}  // namespace rili::sac
