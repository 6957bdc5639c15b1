#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rili/core/errors.hpp"
#include "rili/model/representation.hpp"
#include "rili/nn/gradcheck.hpp"

using namespace rili;
using namespace rili::model;

namespace {

const ExperienceShape kShape{3, 2, 1};

Featurizer featurizer() { return Featurizer(kShape, Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), 1.0); }

// Synthetic partner: rewards are sign * (s0 - s1 + a); the sign is the hidden
// "dynamics" and only shows up in rewards.
InteractionExperience synthetic(SeededRng& rng, double sign, std::int64_t index) {
  InteractionExperience e;
  e.index = index;
  for (int t = 0; t < kShape.horizon; ++t) {
    StepRecord s;
    s.state = Vector(2);
    s.state << rng.uniform(-1, 1), rng.uniform(-1, 1);
    s.action = Vector::Constant(1, rng.uniform(-1, 1));
    s.reward = sign * (s.state[0] - s.state[1] + s.action[0]);
    e.steps.push_back(s);
  }
  return e;
}

// One training tuple with k real predecessors from the same synthetic partner.
void add_sample(RepresentationBuffer& buf, const Featurizer& f, int k, SeededRng& rng, double sign) {
  HistoryWindow w(k, kShape);
  for (int i = 0; i < k; ++i) w.push(synthetic(rng, sign, i));
  buf.add(f, w, synthetic(rng, sign, k));
}

RepresentationConfig small_config(int k) {
  RepresentationConfig c;
  c.history_length = k;
  c.encoder_hidden = 24;
  c.decoder_hidden = {32, 32};
  c.adam.learning_rate = 3e-3;
  return c;
}

// Two-phase schedule: fast, then fine.
void fit(RepresentationLearner& learner, const RepresentationBuffer& buf, SeededRng& rng) {
  learner.set_learning_rate(3e-3);
  learner.train(buf, 6000, 64, rng);
  learner.set_learning_rate(3e-4);
  learner.train(buf, 4000, 64, rng);
}

void fit_long(RepresentationLearner& learner, const RepresentationBuffer& buf, SeededRng& rng) {
  learner.set_learning_rate(3e-3);
  learner.train(buf, 12000, 64, rng);
  learner.set_learning_rate(3e-4);
  learner.train(buf, 6000, 64, rng);
  learner.set_learning_rate(3e-5);
  learner.train(buf, 4000, 64, rng);
}

double held_out_loss(const RepresentationLearner& learner, const RepresentationBuffer& buf) {
  std::vector<std::size_t> all(buf.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return learner.loss(buf.gather<float>(all));
}

}  // namespace

TEST_CASE("featurizer: encoder input carries rewards, decoder input does not") {
  auto f = featurizer();
  CHECK(f.encoder_input_dim() == kShape.flat_size() + 1);
  CHECK(f.step_dim() == kShape.state_dim + kShape.action_dim);
  SeededRng rng(1);
  auto e = synthetic(rng, 1.0, 0);
  auto x = f.experience_features(e);
  CHECK(x[3] == doctest::Approx(e.steps[0].reward));
  CHECK(x[kShape.flat_size()] == 0.0f);
  CHECK(f.trajectory_features(e.trajectory()).rows() == 3);
  Featurizer box(kShape, Vector::Constant(1, -0.2), Vector::Constant(1, 0.2), 0.5);
  CHECK(box.normalize_action(Vector::Constant(1, 0.2))[0] == doctest::Approx(1.0));
  CHECK(box.denormalize_action(Vector::Constant(1, -1.0))[0] == doctest::Approx(-0.2));
  CHECK(box.scaled_rewards(e)[1] == doctest::Approx(0.5 * e.steps[1].reward));
}

TEST_CASE("predict_strategy: zero parameters give zero; repeated calls agree") {
  auto f = featurizer();
  Encoder<float> zero(f.encoder_input_dim(), 4, 16);
  SeededRng rng(2);
  HistoryWindow w(4, kShape);
  w.push(synthetic(rng, 1.0, 0));
  CHECK(zero.predict(f.window_features(w)).isZero(0.0f));

  RepresentationLearner learner(f, small_config(4), rng);
  auto a = learner.predict(w), b = learner.predict(w);
  CHECK(a.value() == b.value());
  CHECK_THROWS_AS(learner.predict(HistoryWindow(2, kShape)), StructuralError);
}

TEST_CASE("decode_rewards: zero parameters, shape and H = 1") {
  Decoder<float> zero(3, {8, 8});
  MatrixF steps = MatrixF::Random(3, 5);
  MatrixF z = MatrixF::Random(kLatentDim, 1);
  auto out = zero.predict(steps, z);
  CHECK(out.rows() == 5);
  CHECK(out.cols() == 1);
  CHECK(out.isZero(0.0f));
  SeededRng rng(3);
  Decoder<float> one(3, {8, 8}, rng);
  CHECK(one.predict(MatrixF::Random(3, 1), z).size() == 1);
}

TEST_CASE("representation_loss: exact reconstruction gives zero; zero nets on zero rewards give zero") {
  SeededRng rng(4);
  Encoder<double> enc(7, 2, 5, rng);
  Decoder<double> dec(3, {4});
  // Decoder with zero weights and output bias c predicts c everywhere.
  dec.params().value(dec.params().size() - 1).setConstant(0.75);
  RepresentationBatch<double> batch;
  batch.slots = {Matrix<double>::Random(7, 6), Matrix<double>::Random(7, 6)};
  batch.steps = Matrix<double>::Random(3, 4 * 6);
  batch.rewards = Matrix<double>::Constant(4, 6, 0.75);
  Tape<double> t;
  CHECK(t.scalar(representation_loss(t, enc, dec, batch)) == doctest::Approx(0.0));

  Encoder<double> zenc(7, 2, 5);
  Decoder<double> zdec(3, {4});
  batch.rewards.setZero();
  Tape<double> t2;
  CHECK(t2.scalar(representation_loss(t2, zenc, zdec, batch)) == 0.0);
  batch.rewards.resize(4, 0);
  batch.steps.resize(3, 0);
  for (auto& s : batch.slots) s.resize(7, 0);
  Tape<double> t3;
  CHECK_THROWS_AS(representation_loss(t3, zenc, zdec, batch), ContractError);
}

TEST_CASE("representation_loss: L2 norm of the residual averaged over the batch") {
  Encoder<double> enc(7, 1, 3);
  Decoder<double> dec(3, {4});
  RepresentationBatch<double> batch;
  batch.slots = {Matrix<double>::Zero(7, 2)};
  batch.steps = Matrix<double>::Zero(3, 2 * 2);
  batch.rewards.resize(2, 2);
  batch.rewards << 3, 1, 4, 1;  // columns (3,4) and (1,1)
  Tape<double> t;
  CHECK(t.scalar(representation_loss(t, enc, dec, batch)) == doctest::Approx((5.0 + std::sqrt(2.0)) / 2));
}

TEST_CASE("representation_loss gradients match finite differences") {
  SeededRng rng(5);
  double worst = 0;
  for (int inst = 0; inst < 8; ++inst) {
    Encoder<double> enc(7, 3, 5, rng);
    Decoder<double> dec(3, {6, 6}, rng);
    RepresentationBatch<double> batch;
    for (int s = 0; s < 3; ++s) batch.slots.push_back(Matrix<double>::Random(7, 4));
    batch.steps = Matrix<double>::Random(3, 2 * 4);
    batch.rewards = Matrix<double>::Random(2, 4);
    auto build = [&](Tape<double>& t) { return representation_loss(t, enc, dec, batch); };
    auto re = nn::check_param_gradients(enc.params(), build, rng, 4);
    auto rd = nn::check_param_gradients(dec.params(), build, rng, 6);
    worst = std::max({worst, re.max_relative_error, rd.max_relative_error});
    CHECK(re.checked > 0);
    CHECK(rd.checked > 0);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("representation_loss is invariant to batch order") {
  auto f = featurizer();
  SeededRng rng(6);
  RepresentationBuffer buf;
  for (int i = 0; i < 16; ++i) add_sample(buf, f, 2, rng, i % 2 ? 1.0 : -1.0);
  RepresentationLearner learner(f, small_config(2), rng);
  std::vector<std::size_t> idx(16);
  for (std::size_t i = 0; i < 16; ++i) idx[i] = i;
  const double a = learner.loss(buf.gather<float>(idx));
  std::reverse(idx.begin(), idx.end());
  std::swap(idx[3], idx[9]);
  CHECK(learner.loss(buf.gather<float>(idx)) == doctest::Approx(a).epsilon(1e-5));
}

TEST_CASE("representation_loss decreases on a fixed batch over 200 Adam steps") {
  SeededRng rng(7);
  Encoder<double> enc(7, 2, 8, rng);
  Decoder<double> dec(3, {16, 16}, rng);
  RepresentationBatch<double> batch;
  for (int s = 0; s < 2; ++s) batch.slots.push_back(Matrix<double>::Random(7, 16));
  batch.steps = Matrix<double>::Random(3, 3 * 16);
  batch.rewards = Matrix<double>::Random(3, 16);
  nn::Adam<double> eo(enc.params(), {1e-3}), d_o(dec.params(), {1e-3});
  double prev = INFINITY;
  int violations = 0;
  for (int step = 0; step < 200; ++step) {
    Tape<double> t;
    auto l = representation_loss(t, enc, dec, batch);
    const double v = t.scalar(l);
    if (v > prev - 0.0 && v - prev > 1e-9) ++violations;
    prev = v;
    t.backward(l);
    eo.step(enc.params(), t.gradients(enc.params()));
    d_o.step(dec.params(), t.gradients(dec.params()));
  }
  CHECK(violations == 0);
}

TEST_CASE("train_representation: zero steps leave parameters unchanged; too little data is a contract error") {
  auto f = featurizer();
  SeededRng rng(8);
  RepresentationLearner learner(f, small_config(2), rng);
  RepresentationBuffer buf;
  for (int i = 0; i < 4; ++i) add_sample(buf, f, 2, rng, 1.0);
  const auto fe = learner.encoder().params().fingerprint(), fd = learner.decoder().params().fingerprint();
  CHECK(std::isnan(learner.train(buf, 0, 4, rng)));
  CHECK(learner.encoder().params().fingerprint() == fe);
  CHECK(learner.decoder().params().fingerprint() == fd);
  CHECK_THROWS_AS(learner.train(buf, 1, 8, rng), ContractError);
}

TEST_CASE("representation buffer: FIFO capacity and temporal consistency") {
  auto f = featurizer();
  SeededRng rng(9);
  RepresentationBuffer buf(3);
  for (int i = 0; i < 5; ++i) add_sample(buf, f, 2, rng, 1.0);
  CHECK(buf.size() == 3);
  HistoryWindow w(2, kShape);
  w.push(synthetic(rng, 1.0, 0));
  CHECK_THROWS_AS(buf.add(f, w, synthetic(rng, 1.0, 5)), SequencingError);
  CHECK_NOTHROW(buf.add(f, w, synthetic(rng, 1.0, 1)));
  HistoryWindow empty(2, kShape);
  CHECK_NOTHROW(buf.add(f, empty, synthetic(rng, 1.0, 0)));
}

TEST_CASE("train_representation: history-independent linear rewards are learned") {
  auto f = featurizer();
  SeededRng rng(10);
  RepresentationBuffer train, test;
  for (int i = 0; i < 512; ++i) add_sample(train, f, 1, rng, 1.0);
  for (int i = 0; i < 128; ++i) add_sample(test, f, 1, rng, 1.0);
  RepresentationLearner learner(f, small_config(1), rng);
  fit(learner, train, rng);
  CHECK(held_out_loss(learner, test) < 1e-2);
  MESSAGE("linear held-out loss " << held_out_loss(learner, test));
}

TEST_CASE("decode_rewards: held-out MSE below 10% of the reward variance") {
  auto f = featurizer();
  SeededRng rng(11);
  RepresentationBuffer train, test;
  for (int i = 0; i < 4096; ++i) add_sample(train, f, 2, rng, i % 2 ? 1.0 : -1.0);
  for (int i = 0; i < 128; ++i) add_sample(test, f, 2, rng, i % 2 ? 1.0 : -1.0);
  RepresentationLearner learner(f, small_config(2), rng);
  fit(learner, train, rng);
  double se = 0, sum = 0, sumsq = 0;
  int n = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& s = test.at(i);
    const MatrixF z = learner.encoder().predict(s.window);
    const VectorF pred = learner.decode_features(s.steps, InferredStrategy::from_vector(z.col(0).cast<double>()));
    for (Eigen::Index t = 0; t < pred.size(); ++t) {
      se += std::pow(pred[t] - s.rewards[t], 2);
      sum += s.rewards[t];
      sumsq += s.rewards[t] * s.rewards[t];
      ++n;
    }
  }
  const double var = sumsq / n - std::pow(sum / n, 2);
  MESSAGE("mse " << se / n << " variance " << var);
  CHECK(se / n < 0.1 * var);
}

TEST_CASE("two dynamics: per-dynamics held-out loss within 2x of single-dynamics training, embeddings separate") {
  auto f = featurizer();
  SeededRng rng(12);
  RepresentationBuffer single, mixed, test_pos, test_neg;
  for (int i = 0; i < 16384; ++i) add_sample(single, f, 2, rng, 1.0);
  for (int i = 0; i < 32768; ++i) add_sample(mixed, f, 2, rng, i % 2 ? 1.0 : -1.0);
  for (int i = 0; i < 128; ++i) add_sample(test_pos, f, 2, rng, 1.0);
  for (int i = 0; i < 128; ++i) add_sample(test_neg, f, 2, rng, -1.0);

  auto cfg = small_config(2);
  cfg.encoder_hidden = 64;
  cfg.decoder_hidden = {64, 64};
  RepresentationLearner one(f, cfg, rng);
  fit_long(one, single, rng);
  const double single_loss = held_out_loss(one, single);

  RepresentationLearner both(f, cfg, rng);
  fit_long(both, mixed, rng);
  const double pos = held_out_loss(both, test_pos), neg = held_out_loss(both, test_neg);
  MESSAGE("single " << single_loss << " pos " << pos << " neg " << neg << " mixed train " << held_out_loss(both, mixed));
  CHECK(pos < 2.0 * single_loss);
  CHECK(neg < 2.0 * single_loss);

  // Mean embedding distance across dynamics exceeds the within-dynamics one.
  std::vector<Eigen::VectorXf> zp, zn;
  for (std::size_t i = 0; i < 64; ++i) {
    zp.push_back(both.encoder().predict(test_pos.at(i).window).col(0));
    zn.push_back(both.encoder().predict(test_neg.at(i).window).col(0));
  }
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::size_t i = 0; i < zp.size(); ++i) {
    for (std::size_t j = 0; j < zp.size(); ++j) {
      if (i != j) {
        within += (zp[i] - zp[j]).norm() + (zn[i] - zn[j]).norm();
        nw += 2;
      }
      across += (zp[i] - zn[j]).norm();
      ++na;
    }
  }
  CHECK(across / na > within / nw);
}

TEST_CASE("representation learner checkpoint round trip") {
  auto f = featurizer();
  SeededRng rng(13);
  RepresentationLearner a(f, small_config(2), rng);
  RepresentationBuffer buf;
  for (int i = 0; i < 8; ++i) add_sample(buf, f, 2, rng, 1.0);
  a.train(buf, 3, 4, rng);
  nn::Checkpoint ck;
  a.save(ck, "rep/");
  RepresentationLearner b(f, small_config(2), rng);
  b.load(ck, "rep/");
  CHECK(b.encoder().params().fingerprint() == a.encoder().params().fingerprint());
  CHECK(b.decoder().params().fingerprint() == a.decoder().params().fingerprint());
  RepresentationLearner c(f, small_config(3), rng);
  CHECK_THROWS_AS(c.load(ck, "rep/"), ConfigError);
}
