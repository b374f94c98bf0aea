#include "trajgan/gradcheck_suite.hpp"

#include <array>
#include <random>

#include "trajgan/discriminator.hpp"
#include "trajgan/generator.hpp"
#include "trajgan/layers.hpp"
#include "trajgan/rng.hpp"
#include "trajgan/trainer.hpp"

namespace trajgan {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = g(rng);
  return t;
}

double weighted_sum(const Tensor& t, const Tensor& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * weights[i];
  return s;
}

NormStats test_norm() {
  NormStats n;
  n.mean = {25.0, 0.5, 50.0};
  n.stddev = {3.0, 0.8, 5.0};
  return n;
}

std::vector<Coordinate> random_coords(std::size_t n, const NormStats& norm, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Coordinate> out(n);
  for (auto& p : out) {
    for (std::size_t c = 0; c < 3; ++c) p[c] = norm.mean[c] + norm.stddev[c] * g(rng);
  }
  return out;
}

GradCheckEntry check_dense(Activation act, Rng& rng, bool fault) {
  Parameter x("x", random_tensor({5}, rng));
  Parameter w("w", random_tensor({4, 5}, rng, 0.5));
  Parameter b("b", random_tensor({4}, rng, 0.5));
  const Tensor r = random_tensor({4}, rng);
  auto value = [&] { return weighted_sum(fully_connected(x.value, w.value, b.value, act), r); };
  auto backward = [&] {
    DenseTrace trace;
    fully_connected(x.value, w.value, b.value, act, &trace);
    x.grad = fully_connected_backward(trace, w.value, r, &w.grad, &b.grad);
    if (fault) w.grad[0] *= 1.01;
  };
  std::vector<Parameter*> params{&x, &w, &b};
  return {"fully_connected/" + std::string(to_string(act)), grad_check(value, backward, params, kGradCheckStep)};
}

GradCheckEntry check_conv(Rng& rng) {
  Parameter x("x", random_tensor({3, 11}, rng));
  Parameter k("kernels", random_tensor({4, 3, 3}, rng, 0.5));
  Parameter b("bias", random_tensor({4}, rng, 0.5));
  const std::size_t out_len = conv1d_output_length(11, 3, 2);
  const Tensor r = random_tensor({4, out_len}, rng);
  auto value = [&] { return weighted_sum(conv1d(x.value, k.value, b.value, 2), r); };
  auto backward = [&] {
    ConvTrace trace;
    conv1d(x.value, k.value, b.value, 2, &trace);
    x.grad = conv1d_backward(trace, k.value, r, &k.grad, &b.grad);
  };
  std::vector<Parameter*> params{&x, &k, &b};
  return {"conv1d", grad_check(value, backward, params, kGradCheckStep)};
}

GradCheckEntry check_dropout(Rng& rng) {
  Parameter x("x", random_tensor({3, 7}, rng));
  const Tensor r = random_tensor({3, 7}, rng);
  auto value = [&] {
    Rng mask_rng = make_stream(7, "mask");
    return weighted_sum(dropout(x.value, 0.5, Mode::train, mask_rng), r);
  };
  auto backward = [&] {
    Rng mask_rng = make_stream(7, "mask");
    DropoutTrace trace;
    dropout(x.value, 0.5, Mode::train, mask_rng, &trace);
    x.grad = dropout_backward(trace, r);
  };
  std::vector<Parameter*> params{&x};
  return {"dropout", grad_check(value, backward, params, kGradCheckStep)};
}

GradCheckEntry check_elu(Rng& rng) {
  Parameter x("x", random_tensor({2, 9}, rng));
  const Tensor r = random_tensor({2, 9}, rng);
  auto value = [&] { return weighted_sum(apply_activation(x.value, Activation::elu), r); };
  auto backward = [&] {
    ActivationTrace trace;
    apply_activation(x.value, Activation::elu, &trace);
    x.grad = apply_activation_backward(trace, r);
  };
  std::vector<Parameter*> params{&x};
  return {"elu", grad_check(value, backward, params, kGradCheckStep)};
}

GeneratorParams small_generator(Rng& rng) {
  GeneratorConfig cfg;
  cfg.k = 4;
  cfg.h1 = 8;
  cfg.h2 = 8;
  auto gen = GeneratorParams::initialized(cfg, test_norm(), rng, {0.3, 0.2, 0.3});
  // The default init zeroes the mean head and shrinks the sigma head; give both
  // real weights so every path carries signal.
  gen.w_mu.value = random_tensor(gen.w_mu.value.shape(), rng, 0.3);
  gen.b_mu.value = random_tensor({3}, rng, 0.1);
  for (double& v : gen.w_sigma.value.data()) v *= 5.0;
  return gen;
}

GradCheckEntry check_src(Rng& rng) {
  GeneratorParams gen = small_generator(rng);
  const auto history = random_coords(4, gen.norm, rng);
  const Noise noise{0.7, -1.2, 0.4};
  const Coordinate weights{0.3, -0.8, 0.5};
  auto value = [&] {
    const auto out = src_step(gen, history, noise);
    return weights.r * out.next.r + weights.theta * out.next.theta + weights.z * out.next.z;
  };
  auto backward = [&] {
    SrcTrace trace;
    src_step(gen, history, noise, &trace);
    src_step_backward(gen, trace, weights);
  };
  return {"src_step", grad_check(value, backward, gen.parameters(), kGradCheckStep)};
}

GradCheckEntry check_segment(Rng& rng) {
  GeneratorParams gen = small_generator(rng);
  const auto seed = random_coords(4, gen.norm, rng);
  std::vector<Noise> noise(6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& n : noise) {
    for (double& v : n) v = g(rng);
  }
  // mean of every generated coordinate value
  const double scale = 1.0 / (3.0 * 6.0);
  auto value = [&] {
    const Trajectory t = generate_segment(gen, seed, noise);
    double s = 0.0;
    for (std::size_t i = 4; i < t.size(); ++i) s += t.coords[i].r + t.coords[i].theta + t.coords[i].z;
    return s * scale;
  };
  auto backward = [&] {
    SegmentTrace trace;
    generate_segment(gen, seed, noise, &trace);
    std::vector<Coordinate> grad(10);
    for (std::size_t i = 4; i < 10; ++i) grad[i] = {scale, scale, scale};
    generate_segment_backward(gen, trace, grad);
  };
  return {"generate_segment", grad_check(value, backward, gen.parameters(), kGradCheckStep)};
}

DiscriminatorConfig small_disc_config() {
  DiscriminatorConfig cfg;
  cfg.segment_len = 12;
  cfg.layers = {{{4, 3, 1}, {4, 3, 1}, {4, 3, 2}}};
  cfg.dropout_rate = 0.5;
  return cfg;
}

GradCheckEntry check_discriminator(Rng& rng, bool wrt_input) {
  DiscriminatorParams disc = DiscriminatorParams::initialized(small_disc_config(), test_norm(), rng);
  const auto segment = random_coords(12, disc.norm, rng);
  Parameter input("segment", Tensor({12, 3}));
  for (std::size_t t = 0; t < 12; ++t) {
    for (std::size_t c = 0; c < 3; ++c) input.value.at(t, c) = segment[t][c];
  }
  auto coords = [&] {
    std::vector<Coordinate> out(12);
    for (std::size_t t = 0; t < 12; ++t) {
      for (std::size_t c = 0; c < 3; ++c) out[t][c] = input.value.at(t, c);
    }
    return out;
  };
  auto value = [&] {
    Rng drop = make_stream(11, "dropout");
    return std::log(discriminate(disc, coords(), Mode::train, drop));
  };
  auto backward = [&] {
    Rng drop = make_stream(11, "dropout");
    DiscriminatorTrace trace;
    const double d = discriminate(disc, coords(), Mode::train, drop, &trace);
    const auto g = discriminate_backward(disc, trace, 1.0 / d,
                                         wrt_input ? ParamGrads::skip : ParamGrads::accumulate);
    for (std::size_t t = 0; t < 12; ++t) {
      for (std::size_t c = 0; c < 3; ++c) input.grad.at(t, c) = g[t][c];
    }
  };
  if (wrt_input) {
    std::vector<Parameter*> params{&input};
    return {"log_discriminate/input", grad_check(value, backward, params, kGradCheckStep)};
  }
  return {"log_discriminate/params", grad_check(value, backward, disc.parameters(), kGradCheckStep)};
}

std::vector<GradCheckEntry> check_objectives(Rng& rng) {
  GeneratorParams gen = small_generator(rng);
  DiscriminatorParams disc = DiscriminatorParams::initialized(small_disc_config(), gen.norm, rng);
  std::vector<std::vector<Coordinate>> real = {random_coords(12, gen.norm, rng),
                                               random_coords(12, gen.norm, rng)};
  std::vector<std::vector<Noise>> noise(2, std::vector<Noise>(8));
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& seq : noise) {
    for (auto& n : seq) {
      for (double& v : n) v = g(rng);
    }
  }
  std::vector<GradCheckEntry> out;
  for (auto objective : {GeneratorObjective::saturating, GeneratorObjective::non_saturating}) {
    TrainConfig cfg;
    cfg.segment_len = 12;
    cfg.objective = objective;
    const std::string suffix = objective == GeneratorObjective::saturating ? "" : "/non_saturating";
    auto run = [&](bool gen_grads, bool disc_grads) {
      Rng drop = make_stream(13, "dropout");
      return adversarial_gradients(gen, disc, real, noise, drop, cfg, gen_grads, disc_grads);
    };
    out.push_back({"J_G/generator" + suffix,
                   grad_check([&] { return run(false, false).JG; }, [&] { run(true, false); },
                              gen.parameters(), kGradCheckStep)});
    if (objective == GeneratorObjective::saturating) {
      out.push_back({"J_D/discriminator",
                     grad_check([&] { return run(false, false).JD; }, [&] { run(false, true); },
                                disc.parameters(), kGradCheckStep)});
    }
  }
  return out;
}

}  // namespace

std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed, bool inject_fault) {
  Rng rng = make_stream(seed, "gradcheck");
  std::vector<GradCheckEntry> out;
  for (auto act : {Activation::tanh, Activation::elu, Activation::sigmoid, Activation::softplus,
                   Activation::identity}) {
    out.push_back(check_dense(act, rng, inject_fault && act == Activation::tanh));
  }
  out.push_back(check_conv(rng));
  out.push_back(check_elu(rng));
  out.push_back(check_dropout(rng));
  out.push_back(check_src(rng));
  out.push_back(check_segment(rng));
  out.push_back(check_discriminator(rng, false));
  out.push_back(check_discriminator(rng, true));
  for (auto& e : check_objectives(rng)) out.push_back(std::move(e));
  return out;
}

}  // namespace trajgan
