#include "rili/sac/agent.hpp"

#include <cmath>

#include "rili/core/errors.hpp"

namespace rili::sac {

namespace {

nn::MlpSpec actor_spec(int obs_dim, int action_dim, const SacConfig& c) {
  return nn::MlpSpec{obs_dim, c.hidden, 2 * action_dim};
}

nn::MlpSpec critic_spec(int obs_dim, int action_dim, const SacConfig& c) {
  return nn::MlpSpec{obs_dim + action_dim, c.hidden, 1};
}

}  // namespace

SacAgent::SacAgent(int state_dim, int action_dim, SacConfig config, SeededRng& rng)
    : state_dim_(state_dim), action_dim_(action_dim), config_(std::move(config)) {
  if (state_dim < 1 || action_dim < 1) throw StructuralError("SAC: dimensions must be >= 1");
  if (!(config_.initial_alpha > 0.0)) throw ConfigError("SAC: initial alpha must be positive");
  const int od = obs_dim();
  actor_ = Mlp<float>(actor_spec(od, action_dim, config_), rng);
  q1_ = Mlp<float>(critic_spec(od, action_dim, config_), rng);
  q2_ = Mlp<float>(critic_spec(od, action_dim, config_), rng);
  q1_targ_ = q1_;
  q2_targ_ = q2_;
  log_alpha_.add("log_alpha", Matrix<float>::Constant(1, 1, static_cast<float>(std::log(config_.initial_alpha))));
  actor_opt_ = nn::Adam<float>(actor_.params(), {config_.actor_lr});
  q1_opt_ = nn::Adam<float>(q1_.params(), {config_.critic_lr});
  q2_opt_ = nn::Adam<float>(q2_.params(), {config_.critic_lr});
  alpha_opt_ = nn::Adam<float>(log_alpha_, {config_.alpha_lr});
}

double SacAgent::alpha() const { return std::exp(static_cast<double>(log_alpha_.value(0)(0, 0))); }

Matrix<float> SacAgent::noise(Eigen::Index cols, SeededRng& rng) const {
  Matrix<float> e(action_dim_, cols);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = static_cast<float>(rng.normal());
  return e;
}

Vector SacAgent::select_action(const Vector& state, const InferredStrategy& z, ActMode mode, SeededRng& rng) const {
  if (state.size() != state_dim_) throw StructuralError("SAC: state has the wrong dimension");
  Matrix<float> obs(obs_dim(), 1);
  obs.topRows(state_dim_) = state.cast<float>();
  obs.bottomRows(kLatentDim) = z.value().cast<float>();
  if (mode == ActMode::kEval) return mean_actions(obs).col(0).cast<double>();
  Tape<float> tape;
  auto pi = sample_policy(tape, actor_, tape.constant(obs), noise(1, rng), false);
  return tape.value(pi.action).col(0).cast<double>();
}

Matrix<float> SacAgent::mean_actions(const Matrix<float>& obs) const {
  const Matrix<float> out = actor_.predict(obs);
  return out.topRows(action_dim_).array().tanh().matrix();
}

SacReport SacAgent::update(const SacBatch<float>& batch, SeededRng& rng) {
  if (batch.size() == 0) throw ContractError("SAC update needs a non-empty batch");
  if (batch.obs.rows() != obs_dim() || batch.actions.rows() != action_dim_) {
    throw StructuralError("SAC batch has the wrong dimensions");
  }
  SacReport report;
  const float alpha = static_cast<float>(this->alpha());
  report.alpha = alpha;

  // Critics.
  const Matrix<float> y =
      critic_target(actor_, q1_targ_, q2_targ_, batch, noise(batch.size(), rng), alpha, static_cast<float>(config_.gamma));
  {
    Tape<float> tape;
    auto l = critic_loss(tape, q1_, q2_, batch, y);
    tape.backward(l);
    report.critic_loss = tape.scalar(l);
    q1_opt_.step(q1_.params(), tape.gradients(q1_.params()));
    q2_opt_.step(q2_.params(), tape.gradients(q2_.params()));
  }

  // Actor, against the freshly updated critics.
  Matrix<float> log_prob;
  {
    Tape<float> tape;
    typename Tape<float>::Var lp;
    auto l = actor_loss(tape, actor_, q1_, q2_, batch, noise(batch.size(), rng), alpha, &lp);
    tape.backward(l);
    report.actor_loss = tape.scalar(l);
    log_prob = tape.value(lp);
    actor_opt_.step(actor_.params(), tape.gradients(actor_.params()));
  }
  report.entropy = -static_cast<double>(log_prob.mean());

  // Temperature: d/d log_alpha of -log_alpha * mean(log pi + target_entropy).
  const float g = -(log_prob.array() + static_cast<float>(target_entropy())).mean();
  alpha_opt_.step(log_alpha_, {Matrix<float>::Constant(1, 1, g)});

  q1_targ_.params().soft_update_from(q1_.params(), static_cast<float>(config_.tau));
  q2_targ_.params().soft_update_from(q2_.params(), static_cast<float>(config_.tau));

  if (!std::isfinite(report.critic_loss) || !std::isfinite(report.actor_loss) || !actor_.params().all_finite() ||
      !q1_.params().all_finite() || !q2_.params().all_finite()) {
    throw NumericError("SAC update produced non-finite values (critic loss " + std::to_string(report.critic_loss) +
                       ", actor loss " + std::to_string(report.actor_loss) + ", alpha " + std::to_string(alpha) + ")");
  }
  return report;
}

std::uint64_t SacAgent::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint64_t part : {actor_.params().fingerprint(), q1_.params().fingerprint(), q2_.params().fingerprint(),
                             q1_targ_.params().fingerprint(), q2_targ_.params().fingerprint(), log_alpha_.fingerprint()}) {
    h ^= part;
    h *= 1099511628211ULL;
  }
  return h;
}

void SacAgent::save(nn::Checkpoint& ck, const std::string& prefix) const {
  ck.put_int(prefix + "state_dim", state_dim_);
  ck.put_int(prefix + "action_dim", action_dim_);
  ck.put_params(prefix + "actor", actor_.params());
  ck.put_params(prefix + "q1", q1_.params());
  ck.put_params(prefix + "q2", q2_.params());
  ck.put_params(prefix + "q1_target", q1_targ_.params());
  ck.put_params(prefix + "q2_target", q2_targ_.params());
  ck.put_params(prefix + "log_alpha", log_alpha_);
  ck.put_adam(prefix + "actor_opt", actor_opt_);
  ck.put_adam(prefix + "q1_opt", q1_opt_);
  ck.put_adam(prefix + "q2_opt", q2_opt_);
  ck.put_adam(prefix + "alpha_opt", alpha_opt_);
}

void SacAgent::load(const nn::Checkpoint& ck, const std::string& prefix) {
  if (ck.integer(prefix + "state_dim") != state_dim_ || ck.integer(prefix + "action_dim") != action_dim_) {
    throw ConfigError("SAC checkpoint dimensions differ from the environment");
  }
  ck.get_params(prefix + "actor", actor_.params());
  ck.get_params(prefix + "q1", q1_.params());
  ck.get_params(prefix + "q2", q2_.params());
  ck.get_params(prefix + "q1_target", q1_targ_.params());
  ck.get_params(prefix + "q2_target", q2_targ_.params());
  ck.get_params(prefix + "log_alpha", log_alpha_);
  ck.get_adam(prefix + "actor_opt", actor_opt_);
  ck.get_adam(prefix + "q1_opt", q1_opt_);
  ck.get_adam(prefix + "q2_opt", q2_opt_);
  ck.get_adam(prefix + "alpha_opt", alpha_opt_);
}

}  // namespace rili::sac
