#include "rili/harness/grad_check.hpp"

#include <algorithm>

#include "rili/model/representation.hpp"
#include "rili/nn/gradcheck.hpp"
#include "rili/sac/losses.hpp"

namespace rili::harness {

namespace {

using MatD = nn::Matrix<double>;

MatD gaussian(Eigen::Index r, Eigen::Index c, SeededRng& rng, double scale = 1.0) {
  MatD m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

void merge(GradReport& into, const nn::GradCheckResult& r) {
  into.max_relative_error = std::max(into.max_relative_error, r.max_relative_error);
  into.checked += r.checked;
}

}  // namespace

std::vector<GradReport> run_gradient_checks(int instances, std::uint64_t seed) {
  SeededRng rng(seed);
  GradReport enc_r{"gru_encoder"}, dec_r{"decoder"}, actor_r{"actor"}, critic_r{"critics"};
  for (int inst = 0; inst < instances; ++inst) {
    // Encoder and decoder through the representation loss.
    {
      const int in = 7, k = 3, h = 4, b = 3, step_dim = 3;
      model::Encoder<double> enc(in, k, 6, rng);
      model::Decoder<double> dec(step_dim, {8, 8}, rng);
      model::RepresentationBatch<double> batch;
      for (int s = 0; s < k; ++s) batch.slots.push_back(gaussian(in, b, rng));
      batch.steps = gaussian(step_dim, h * b, rng);
      batch.rewards = gaussian(h, b, rng);
      auto build = [&](nn::Tape<double>& t) { return model::representation_loss(t, enc, dec, batch); };
      merge(enc_r, nn::check_param_gradients(enc.params(), build, rng, 6));
      merge(dec_r, nn::check_param_gradients(dec.params(), build, rng, 6));
    }
    // Actor and critics through the SAC losses.
    {
      const int od = 2 + kLatentDim, ad = 2, b = 5;
      nn::Mlp<double> actor(nn::MlpSpec{od, {8, 8}, 2 * ad}, rng);
      nn::Mlp<double> q1(nn::MlpSpec{od + ad, {8, 8}, 1}, rng), q2(nn::MlpSpec{od + ad, {8, 8}, 1}, rng);
      sac::SacBatch<double> batch{gaussian(od, b, rng), gaussian(ad, b, rng, 0.5).array().tanh().matrix(),
                                  gaussian(1, b, rng), gaussian(od, b, rng), MatD::Zero(1, b)};
      const MatD y = gaussian(1, b, rng), eps = gaussian(ad, b, rng);
      auto critic = [&](nn::Tape<double>& t) { return sac::critic_loss(t, q1, q2, batch, y); };
      auto act = [&](nn::Tape<double>& t) { return sac::actor_loss(t, actor, q1, q2, batch, eps, 0.2); };
      merge(critic_r, nn::check_param_gradients(q1.params(), critic, rng, 6));
      merge(critic_r, nn::check_param_gradients(q2.params(), critic, rng, 6));
      merge(actor_r, nn::check_param_gradients(actor.params(), act, rng, 6));
    }
  }
  std::vector<GradReport> out{enc_r, dec_r, actor_r, critic_r};
  for (auto& r : out) r.instances = instances;
  return out;
}

}  // namespace rili::harness
