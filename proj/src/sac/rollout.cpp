#include "rili/sac/rollout.hpp"

#include "rili/core/errors.hpp"

namespace rili::sac {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kRili: return "rili";
    case Variant::kLili: return "lili";
    case Variant::kSili: return "sili";
    case Variant::kSac: return "sac";
    case Variant::kOracle: return "oracle";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "rili") return Variant::kRili;
  if (name == "lili") return Variant::kLili;
  if (name == "sili") return Variant::kSili;
  if (name == "sac") return Variant::kSac;
  if (name == "oracle") return Variant::kOracle;
  throw ConfigError("unknown agent variant '" + std::string(name) + "'");
}

bool uses_encoder(Variant v) { return v == Variant::kRili || v == Variant::kLili || v == Variant::kSili; }

int history_length_for(Variant v, int rili_k) {
  switch (v) {
    case Variant::kRili: return rili_k;
    case Variant::kLili:
    case Variant::kSili: return 1;
    case Variant::kSac:
    case Variant::kOracle: return 0;
  }
  return 0;
}

double stability_bonus(const InferredStrategy& z_curr, const InferredStrategy& z_prev, double beta) {
  if (beta == 0.0) return 0.0;
  return -beta * (z_curr.value() - z_prev.value()).squaredNorm();
}

InteractionExperience run_interaction(const SacAgent& agent, envs::Environment& env, const model::Featurizer& features,
                                      const InferredStrategy& z, const TrueStrategy& truth, ActMode mode,
                                      SeededRng& rng, ActionSource source, ReplayInteraction* record) {
  const auto& spec = env.spec();
  if (spec.state_dim != agent.state_dim() || spec.action_dim != agent.action_dim()) {
    throw StructuralError("agent and environment dimensions differ");
  }
  const int h = spec.horizon;
  InteractionExperience exp;
  exp.steps.reserve(static_cast<std::size_t>(h));
  if (record != nullptr) {
    record->states.resize(spec.state_dim, h + 1);
    record->actions.resize(spec.action_dim, h);
    record->rewards.resize(1, h);
    record->z = z.value().cast<float>();
  }
  Vector obs = env.reset(truth);
  for (int t = 0; t < h; ++t) {
    Vector unit;
    if (source == ActionSource::kUniform) {
      unit.resize(spec.action_dim);
      for (int i = 0; i < spec.action_dim; ++i) unit[i] = rng.uniform(-1.0, 1.0);
    } else {
      unit = agent.select_action(obs, z, mode, rng);
    }
    auto r = env.step(features.denormalize_action(unit));
    if (record != nullptr) {
      record->states.col(t) = obs.cast<float>();
      record->actions.col(t) = features.normalize_action(r.applied_action).cast<float>();
      record->rewards(0, t) = static_cast<float>(r.reward * spec.reward_scale);
    }
    exp.steps.push_back({obs, r.applied_action, r.reward});
    obs = r.observation;
  }
  if (record != nullptr) record->states.col(h) = obs.cast<float>();
  return exp;
}

}  // namespace rili::sac
