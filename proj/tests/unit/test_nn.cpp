#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rili/nn/adam.hpp"
#include "rili/nn/checkpoint.hpp"
#include "rili/nn/gradcheck.hpp"
#include "rili/nn/gru.hpp"
#include "rili/nn/mlp.hpp"
#include "rili/nn/tape.hpp"

using namespace rili;
using namespace rili::nn;
using MatD = Matrix<double>;

namespace {

MatD random_matrix(Eigen::Index r, Eigen::Index c, SeededRng& rng) {
  MatD m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("backward: x^2 at 3 has gradient 6") {
  Tape<double> tape;
  auto x = tape.variable(MatD::Constant(1, 1, 3.0));
  auto loss = tape.square(x);
  tape.backward(loss);
  CHECK(tape.grad(x)(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("backward: unused parameter gets exactly zero gradient") {
  ParamSet<double> ps;
  ps.add("used", MatD::Constant(1, 1, 2.0));
  ps.add("unused", MatD::Constant(2, 2, 5.0));
  Tape<double> tape;
  auto loss = tape.sum(tape.square(tape.param(ps, 0)));
  tape.backward(loss);
  auto g = tape.gradients(ps);
  CHECK(g[0](0, 0) == doctest::Approx(4.0));
  CHECK(g[1].isZero(0.0));
}

TEST_CASE("backward: non-finite loss is a numeric error") {
  Tape<double> tape;
  auto x = tape.variable(MatD::Constant(1, 1, -1.0));
  auto loss = tape.log(x);
  CHECK_THROWS_AS(tape.backward(loss), NumericError);
}

TEST_CASE("backward: ||Wx - y||^2 matches finite differences on 32 instances") {
  SeededRng rng(3);
  for (int inst = 0; inst < 32; ++inst) {
    ParamSet<double> ps;
    ps.add("W", random_matrix(3, 4, rng));
    const MatD x = random_matrix(4, 1, rng), y = random_matrix(3, 1, rng);
    auto build = [&](Tape<double>& t) {
      auto r = t.sub(t.matmul(t.param(ps, 0), t.constant(x)), t.constant(y));
      return t.sum(t.square(r));
    };
    auto res = check_param_gradients(ps, build, rng, 100);
    CHECK(res.checked == 12);
    CHECK(res.max_relative_error < 1e-4);
    // analytic form: 2 (Wx - y) x^T
    Tape<double> t;
    auto l = build(t);
    t.backward(l);
    MatD expected = 2.0 * (ps.value(0) * x - y) * x.transpose();
    CHECK((t.gradients(ps)[0] - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tape ops match finite differences") {
  SeededRng rng(5);
  ParamSet<double> ps;
  ps.add("a", random_matrix(3, 4, rng));
  ps.add("b", random_matrix(3, 4, rng));
  ps.add("bias", random_matrix(3, 1, rng));
  ps.add("s", MatD::Constant(1, 1, 0.7));
  auto build = [&](Tape<double>& t) {
    auto a = t.param(ps, 0), b = t.param(ps, 1);
    auto x = t.add_bias(t.mul(t.tanh(a), t.sigmoid(b)), t.param(ps, 2));
    auto y = t.softplus(t.sub(x, t.exp(t.scale(b, 0.3))));
    auto z = t.concat_rows({y, t.slice_rows(a, 1, 2)});
    auto r = t.reshape(t.repeat_cols(t.col_sum(z), 2), 2, 4);
    auto n = t.col_norm(t.add(r, t.one_minus(t.slice_rows(b, 0, 2))));
    auto m = t.minimum(t.clamp(a, -0.5, 0.8), t.relu(b));
    return t.add(t.scale_by(t.mean(n), t.param(ps, 3)), t.mean(t.log(t.add_scalar(t.square(m), 1.0))));
  };
  auto res = check_param_gradients(ps, build, rng, 100);
  CHECK(res.checked > 20);
  CHECK(res.max_relative_error < 1e-6);
}

TEST_CASE("mlp_forward: zero weights give zero output; identity layer passes input") {
  Mlp<double> zero(MlpSpec{3, {5, 5}, 2});
  MatD x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK(zero.predict(x).isZero(0.0));

  Mlp<double> ident(MlpSpec{3, {}, 3});
  ident.params().value(0) = MatD::Identity(3, 3);
  CHECK(ident.predict(x) == x);
  CHECK_THROWS_AS(ident.predict(MatD::Zero(2, 1)), StructuralError);
}

TEST_CASE("mlp_forward: deterministic bitwise across calls") {
  SeededRng rng(1);
  Mlp<float> net(MlpSpec{6, {32, 32}, 4}, rng);
  Matrix<float> x = Matrix<float>::Random(6, 7);
  auto a = net.predict(x), b = net.predict(x);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0);
}

TEST_CASE("MlpSpec validation") {
  CHECK_THROWS_AS(Mlp<double>(MlpSpec{0, {4}, 1}), StructuralError);
  CHECK_THROWS_AS(Mlp<double>(MlpSpec{2, {0}, 1}), StructuralError);
}

TEST_CASE("gru_forward: zero parameters give zero output") {
  Gru<double> gru(GruSpec{4, 8, kLatentDim});
  std::vector<MatD> seq{MatD::Random(4, 3), MatD::Random(4, 3)};
  auto out = gru.predict(seq);
  CHECK(out.rows() == kLatentDim);
  CHECK(out.isZero(0.0));
  CHECK_THROWS_AS(gru.predict({}), ContractError);
}

TEST_CASE("gru_forward: saturated update gate keeps the initial hidden state") {
  SeededRng rng(8);
  Gru<double> gru(GruSpec{4, 8, kLatentDim}, rng);
  gru.params().value(Gru<double>::kBu).setConstant(1e3);
  gru.params().value(Gru<double>::kWu).setZero();
  gru.params().value(Gru<double>::kUu).setZero();
  const MatD x = random_matrix(4, 1, rng);
  auto one = gru.predict({x});
  auto many = gru.predict({x, x, x, x, x});
  // h stays at h0 = 0, so the output is the head applied to zero: b_o.
  CHECK((one - gru.params().value(Gru<double>::kBo)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((many - one).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru gradients match finite differences (32 instances)") {
  SeededRng rng(21);
  double worst = 0.0;
  for (int inst = 0; inst < 32; ++inst) {
    Gru<double> gru(GruSpec{5, 6, kLatentDim}, rng);
    std::vector<MatD> seq;
    for (int t = 0; t < 4; ++t) seq.push_back(random_matrix(5, 3, rng));
    const MatD target = random_matrix(kLatentDim, 3, rng);
    auto build = [&](Tape<double>& t) {
      std::vector<Tape<double>::Var> xs;
      for (const auto& m : seq) xs.push_back(t.constant(m));
      return t.mean(t.square(t.sub(gru.forward(t, xs), t.constant(target))));
    };
    auto res = check_param_gradients(gru.params(), build, rng, 6);
    worst = std::max(worst, res.max_relative_error);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("adam_step: first step moves by about the learning rate") {
  ParamSet<double> ps;
  ps.add("x", MatD::Constant(1, 1, 1.0));
  Adam<double> opt(ps, AdamConfig{0.01, 0.9, 0.999, 1e-12});
  opt.step(ps, {MatD::Constant(1, 1, 1.0)});
  CHECK(ps.value(0)(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
  CHECK(opt.steps() == 1);
}

TEST_CASE("adam_step: zero gradients leave parameters unchanged") {
  ParamSet<double> ps;
  ps.add("x", MatD::Constant(2, 2, 3.0));
  Adam<double> opt(ps, AdamConfig{});
  for (int i = 0; i < 10; ++i) opt.step(ps, {MatD::Zero(2, 2)});
  CHECK(ps.value(0) == MatD::Constant(2, 2, 3.0));
}

TEST_CASE("adam_step: shape mismatch and non-finite gradients are rejected") {
  ParamSet<double> ps;
  ps.add("x", MatD::Zero(2, 2));
  Adam<double> opt(ps, AdamConfig{});
  CHECK_THROWS_AS(opt.step(ps, {MatD::Zero(3, 2)}), StructuralError);
  CHECK_THROWS_AS(opt.step(ps, {}), StructuralError);
  CHECK_THROWS_AS(opt.step(ps, {MatD::Constant(2, 2, NAN)}), NumericError);
}

TEST_CASE("adam_step: quadratic bowl converges") {
  SeededRng rng(2);
  ParamSet<double> ps;
  ps.add("x", random_matrix(5, 1, rng) * 3.0);
  const MatD center = random_matrix(5, 1, rng);
  Adam<double> opt(ps, AdamConfig{0.02});
  auto loss_of = [&] { return (ps.value(0) - center).squaredNorm(); };
  const double initial = loss_of();
  double prev = initial;
  int increases_after_warmup = 0;
  for (int step = 0; step < 500; ++step) {
    Tape<double> t;
    auto l = t.sum(t.square(t.sub(t.param(ps, 0), t.constant(center))));
    t.backward(l);
    opt.step(ps, t.gradients(ps));
    const double now = loss_of();
    if (step > 10 && now > prev + 1e-12 * initial) ++increases_after_warmup;
    prev = now;
  }
  CHECK(loss_of() < 1e-3 * initial);
  CHECK(increases_after_warmup == 0);
}

TEST_CASE("checkpoint round trip is bit exact") {
  SeededRng rng(4);
  Mlp<float> net(MlpSpec{3, {8}, 2}, rng);
  Adam<float> opt(net.params(), AdamConfig{1e-3});
  Tape<float> t;
  auto l = t.sum(net.forward(t, t.constant(Matrix<float>::Random(3, 4))));
  t.backward(l);
  opt.step(net.params(), t.gradients(net.params()));

  Checkpoint ck;
  ck.put_params("net", net.params());
  ck.put_adam("opt", opt);
  ck.put_text("meta", "{\"k\":4}");
  ck.put_tensor("dbl", MatD(MatD::Constant(2, 3, 1.0 / 3.0)));
  const auto path = std::filesystem::temp_directory_path() / "rili_ckpt_test.bin";
  ck.save(path);
  auto back = Checkpoint::load(path);
  CHECK(back == ck);

  Mlp<float> restored(MlpSpec{3, {8}, 2});
  back.get_params("net", restored.params());
  CHECK(restored.params().fingerprint() == net.params().fingerprint());
  Adam<float> opt2(restored.params(), AdamConfig{});
  back.get_adam("opt", opt2);
  CHECK(opt2.steps() == 1);
  CHECK(opt2.config().learning_rate == 1e-3);
  CHECK(back.text("meta") == "{\"k\":4}");
  CHECK_THROWS_AS(back.tensor<float>("missing"), ConfigError);
  CHECK_THROWS_AS(back.tensor<float>("dbl"), StructuralError);
  std::filesystem::remove(path);
}
