#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "trajgan/adam.hpp"
#include "trajgan/gradcheck.hpp"
#include "trajgan/gradcheck_suite.hpp"
#include "trajgan/layers.hpp"

using namespace trajgan;
using testutil::random_tensor;

TEST_SUITE("numcore") {

TEST_CASE("fully_connected hand examples") {
  CHECK(fully_connected(Tensor::vector({0}), Tensor::matrix({{0}}), Tensor::vector({0}),
                        Activation::sigmoid)[0] == 0.5);
  const Tensor id = fully_connected(Tensor::vector({1, 2}), Tensor::matrix({{1, 0}, {0, 1}}),
                                    Tensor::vector({0, 0}), Activation::identity);
  CHECK(id == Tensor::vector({1, 2}));
  const double elu = fully_connected(Tensor::vector({-1}), Tensor::matrix({{1}}), Tensor::vector({0}),
                                     Activation::elu)[0];
  CHECK(elu == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
  CHECK(elu == doctest::Approx(-0.632121).epsilon(1e-6));
}

TEST_CASE("fully_connected shape mismatch names both shapes") {
  try {
    fully_connected(Tensor::vector({1, 2, 3}), Tensor::matrix({{1, 0}}), Tensor::vector({0}),
                    Activation::identity);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[3]") != std::string::npos);
    CHECK(msg.find("[1x2]") != std::string::npos);
  }
}

TEST_CASE("softplus and sigmoid stay finite at extremes") {
  CHECK(softplus(800.0) == 800.0);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("conv1d hand examples") {
  Tensor x({1, 3}, {1, 2, 3});
  CHECK(conv1d(x, Tensor({1, 1, 1}, {1}), Tensor::vector({0}), 1) == Tensor({1, 3}, {1, 2, 3}));
  Tensor ones({1, 4}, 1.0);
  CHECK(conv1d(ones, Tensor({1, 1, 2}, {1, 1}), Tensor::vector({0}), 2) == Tensor({1, 2}, {2, 2}));

  Rng rng = make_stream(3, "test");
  const Tensor any = random_tensor({2, 9}, rng);
  const Tensor out = conv1d(any, Tensor({3, 2, 4}), Tensor::vector({0.25, 0.25, 0.25}), 2);
  CHECK(out.shape() == std::vector<std::size_t>{3, 3});
  for (double v : out.data()) CHECK(v == 0.25);
}

TEST_CASE("conv1d unit-width identity kernel is exact on random input") {
  Rng rng = make_stream(4, "test");
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({1, 16}, rng, 100.0);
    CHECK(conv1d(x, Tensor({1, 1, 1}, {1}), Tensor::vector({0}), 1) == x);
  }
}

TEST_CASE("conv1d rejects windows longer than the input") {
  CHECK_THROWS_AS(conv1d(Tensor({1, 2}), Tensor({1, 1, 3}), Tensor::vector({0}), 1),
                  std::invalid_argument);
  CHECK(conv1d_output_length(100, 5, 2) == 48);
}

TEST_CASE("dropout") {
  Rng rng = make_stream(5, "dropout");
  const Tensor x = random_tensor({4, 8}, rng);
  CHECK(dropout(x, 0.5, Mode::eval, rng) == x);
  CHECK(dropout(x, 0.0, Mode::train, rng) == x);
  CHECK_THROWS(dropout(x, 1.0, Mode::train, rng));
  CHECK_THROWS(dropout(x, -0.1, Mode::train, rng));

  Tensor ones({100000}, 1.0);
  const Tensor out = dropout(ones, 0.5, Mode::train, rng);
  double mean = 0.0;
  for (double v : out.data()) {
    CHECK((v == 0.0 || v == 2.0));
    mean += v;
  }
  mean /= 100000.0;
  CHECK(mean >= 0.98);
  CHECK(mean <= 1.02);

  Rng a = make_stream(9, "dropout"), b = make_stream(9, "dropout");
  CHECK(dropout(x, 0.3, Mode::train, a) == dropout(x, 0.3, Mode::train, b));
}

TEST_CASE("adam examples") {
  AdamConfig cfg{0.001, 0.9, 0.999, 1e-8};
  Parameter still("p", Tensor::vector({1.0}));
  adam_step(still, cfg);
  CHECK(still.value[0] == 1.0);
  CHECK(still.adam_m[0] == 0.0);
  CHECK(still.adam_v[0] == 0.0);

  Parameter p("p", Tensor::vector({1.0}));
  p.grad[0] = 1.0;
  adam_step(p, cfg);
  CHECK(p.value[0] == doctest::Approx(0.999).epsilon(1e-9));
  CHECK(p.grad[0] == 0.0);
  const double after_one = p.value[0];
  p.grad[0] = 1.0;
  adam_step(p, cfg);
  CHECK(p.value[0] < after_one);
  CHECK(p.adam_v[0] >= 0.0);
  CHECK(p.step_count == 2);

  CHECK_THROWS(adam_step(p, AdamConfig{0.0, 0.9, 0.999, 1e-8}));
  CHECK_THROWS(adam_step(p, AdamConfig{1e-3, 1.0, 0.999, 1e-8}));
}

TEST_CASE("adam matches a scalar reference over several steps") {
  AdamConfig cfg{0.01, 0.5, 0.999, 1e-8};
  Parameter p("p", Tensor::vector({2.0}));
  double value = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2.0 * value;  // d/dx x^2
    p.grad[0] = 2.0 * p.value[0];
    adam_step(p, cfg);
    m = 0.5 * m + 0.5 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.5, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    value -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p.value[0] == doctest::Approx(value).epsilon(1e-14));
  }
}

TEST_CASE("grad_check examples") {
  Parameter p("p", Tensor::vector({3.0}));
  auto sq = grad_check([&] { return p.value[0] * p.value[0]; }, [&] { p.grad[0] = 2.0 * p.value[0]; },
                       std::vector<Parameter*>{&p});
  CHECK(sq.analytic == 6.0);
  CHECK(sq.numeric == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(sq.max_rel_error < 1e-10);
  CHECK(p.value[0] == 3.0);

  auto flat = grad_check([] { return 4.0; }, [] {}, std::vector<Parameter*>{&p});
  CHECK(flat.analytic == 0.0);
  CHECK(flat.numeric == 0.0);
  CHECK(flat.max_rel_error == 0.0);

  auto wrong = grad_check([&] { return p.value[0] * p.value[0]; }, [&] { p.grad[0] = 5.0; },
                          std::vector<Parameter*>{&p});
  CHECK(wrong.max_rel_error > 0.1);
  CHECK(wrong.worst_parameter == "p");
}

TEST_CASE("randomized backward checks, 100 trials per layer") {
  Rng rng = make_stream(2024, "numcore-trials");
  std::uniform_int_distribution<std::size_t> extent(1, 16);
  std::uniform_int_distribution<int> act_pick(0, 4);
  const Activation acts[] = {Activation::tanh, Activation::elu, Activation::sigmoid,
                             Activation::softplus, Activation::identity};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = extent(rng), out = extent(rng);
    const Activation act = acts[act_pick(rng)];
    Parameter x("x", random_tensor({in}, rng));
    Parameter w("w", random_tensor({out, in}, rng, 0.5));
    Parameter b("b", random_tensor({out}, rng, 0.5));
    const Tensor r = random_tensor({out}, rng);
    auto f = [&] {
      const Tensor y = fully_connected(x.value, w.value, b.value, act);
      double s = 0.0;
      for (std::size_t i = 0; i < out; ++i) s += r[i] * y[i];
      return s;
    };
    auto back = [&] {
      DenseTrace t;
      fully_connected(x.value, w.value, b.value, act, &t);
      x.grad = fully_connected_backward(t, w.value, r, &w.grad, &b.grad);
    };
    worst = std::max(worst, grad_check(f, back, std::vector<Parameter*>{&x, &w, &b}).max_rel_error);
  }
  CHECK(worst < 1e-4);

  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cin = extent(rng), cout = extent(rng);
    const std::size_t width = 1 + extent(rng) % 5, stride = 1 + extent(rng) % 3;
    const std::size_t len = width + extent(rng);
    Parameter x("x", random_tensor({cin, len}, rng));
    Parameter k("k", random_tensor({cout, cin, width}, rng, 0.5));
    Parameter b("b", random_tensor({cout}, rng));
    const Tensor r = random_tensor({cout, conv1d_output_length(len, width, stride)}, rng);
    auto f = [&] {
      const Tensor y = conv1d(x.value, k.value, b.value, stride);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
      return s;
    };
    auto back = [&] {
      ConvTrace t;
      conv1d(x.value, k.value, b.value, stride, &t);
      x.grad = conv1d_backward(t, k.value, r, &k.grad, &b.grad);
    };
    worst = std::max(worst, grad_check(f, back, std::vector<Parameter*>{&x, &k, &b}).max_rel_error);
  }
  CHECK(worst < 1e-4);

  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = extent(rng);
    const Activation act = acts[act_pick(rng)];
    const std::uint64_t mask_seed = rng();
    Parameter x("x", random_tensor({n}, rng));
    const Tensor r = random_tensor({n}, rng);
    auto f = [&] {
      Rng m = make_stream(mask_seed, "mask");
      const Tensor y = dropout(apply_activation(x.value, act), 0.4, Mode::train, m);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r[i] * y[i];
      return s;
    };
    auto back = [&] {
      Rng m = make_stream(mask_seed, "mask");
      ActivationTrace at;
      DropoutTrace dt;
      dropout(apply_activation(x.value, act, &at), 0.4, Mode::train, m, &dt);
      x.grad = apply_activation_backward(at, dropout_backward(dt, r));
    };
    worst = std::max(worst, grad_check(f, back, std::vector<Parameter*>{&x}).max_rel_error);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient-check suite passes and catches an injected fault") {
  const auto entries = run_gradcheck_suite(1);
  CHECK(entries.size() >= 10);
  for (const auto& e : entries) {
    INFO(e.name);
    CHECK(e.result.max_rel_error < kGradCheckTolerance);
  }
  const auto again = run_gradcheck_suite(1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].result.max_rel_error == again[i].result.max_rel_error);
  }
  bool caught = false;
  for (const auto& e : run_gradcheck_suite(1, true)) caught = caught || !e.passed();
  CHECK(caught);
}

TEST_CASE("checksum distinguishes single-bit changes") {
  Parameter a("a", Tensor::vector({1.0, 2.0}));
  std::vector<const Parameter*> ps{&a};
  const auto before = checksum(ps);
  a.value[1] = std::nextafter(2.0, 3.0);
  CHECK(checksum(ps) != before);
}

TEST_CASE("named streams are reproducible and independent") {
  Rng a = make_stream(1, "noise"), b = make_stream(1, "noise");
  Rng c = make_stream(1, "dropout"), d = make_stream(1, "noise", 1);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
}

}  // TEST_SUITE
