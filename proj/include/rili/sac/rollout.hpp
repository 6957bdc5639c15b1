#pragma once

#include <string>
#include <string_view>

#include "rili/envs/environment.hpp"
#include "rili/model/features.hpp"
#include "rili/sac/agent.hpp"
#include "rili/sac/replay.hpp"

namespace rili::sac {

// Where the policy's z comes from.
//   kRili   GRU encoder over the last k interactions (k = 4)
//   kLili   the same encoder with k = 1
//   kSili   k = 1 encoder plus a stability bonus on the inferred strategy
//   kSac    z = 0 always
//   kOracle an embedding of the partner's true strategy
enum class Variant { kRili, kLili, kSili, kSac, kOracle };

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);
bool uses_encoder(Variant v);
// History length of the variant's encoder (0 when it has none).
int history_length_for(Variant v, int rili_k = kDefaultHistoryLength);

// -beta * ||z_curr - z_prev||^2
double stability_bonus(const InferredStrategy& z_curr, const InferredStrategy& z_prev, double beta);

enum class ActionSource { kPolicy, kUniform };

// Plays one interaction with z fixed throughout. The environment is reset with
// `truth`; the agent only ever sees observations and z. When `record` is set
// it receives states, unit-box actions and scaled rewards for replay.
InteractionExperience run_interaction(const SacAgent& agent, envs::Environment& env, const model::Featurizer& features,
                                      const InferredStrategy& z, const TrueStrategy& truth, ActMode mode,
                                      SeededRng& rng, ActionSource source = ActionSource::kPolicy,
                                      ReplayInteraction* record = nullptr);

}  // namespace rili::sac
