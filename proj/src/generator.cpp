#include "trajgan/generator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajgan {

namespace {

Tensor xavier(std::size_t out_dim, std::size_t in_dim, Rng& rng, double gain = 1.0) {
  const double a = gain * std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor w({out_dim, in_dim});
  for (double& v : w.data()) v = u(rng);
  return w;
}

void check_finite(const Tensor& t, const char* layer) {
  if (!t.all_finite()) {
    throw std::runtime_error(std::string("src_step: non-finite values in ") + layer);
  }
}

double inverse_softplus(double y) { return std::log(std::expm1(y)); }

std::size_t input_dim(const GeneratorConfig& c) { return 3 * c.k; }

void validate(const GeneratorConfig& c) {
  if (c.k == 0 || c.h1 == 0 || c.h2 == 0) {
    throw std::invalid_argument("generator: k, h1 and h2 must be positive");
  }
}

void validate(const NormStats& norm) {
  for (double sd : norm.stddev) {
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw std::invalid_argument("generator: norm_stats standard deviations must be positive");
    }
  }
}

}  // namespace

GeneratorParams GeneratorParams::zeros(const GeneratorConfig& config, const NormStats& norm) {
  validate(config);
  validate(norm);
  const std::size_t in = input_dim(config);
  GeneratorParams p;
  p.config = config;
  p.norm = norm;
  p.w1 = Parameter("gen.w1", Tensor({config.h1, in}));
  p.b1 = Parameter("gen.b1", Tensor({config.h1}));
  p.w2 = Parameter("gen.w2", Tensor({config.h2, in + config.h1}));
  p.b2 = Parameter("gen.b2", Tensor({config.h2}));
  p.w_mu = Parameter("gen.w_mu", Tensor({3, config.h2}));
  p.b_mu = Parameter("gen.b_mu", Tensor({3}));
  p.w_sigma = Parameter("gen.w_sigma", Tensor({3, config.h2}));
  p.b_sigma = Parameter("gen.b_sigma", Tensor({3}));
  return p;
}

GeneratorParams GeneratorParams::initialized(const GeneratorConfig& config, const NormStats& norm,
                                             Rng& rng, const std::array<double, 3>& initial_sigma) {
  for (double s : initial_sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("generator: initial_sigma must be positive");
  }
  GeneratorParams p = zeros(config, norm);
  const std::size_t in = input_dim(config);
  p.w1.value = xavier(config.h1, in, rng);
  p.w2.value = xavier(config.h2, in + config.h1, rng);
  // The mean head starts at zero: any initial bias is a drift that compounds over
  // a thousand autoregressive steps.
  p.w_sigma.value = xavier(3, config.h2, rng, 0.1);
  for (std::size_t c = 0; c < 3; ++c) p.b_sigma.value[c] = inverse_softplus(initial_sigma[c]);
  return p;
}

std::array<double, 3> increment_scale(std::span<const Trajectory> trajs, const NormStats& norm) {
  std::array<double, 3> sum{};
  std::size_t n = 0;
  for (const auto& t : trajs) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = (t.coords[i + 1][c] - t.coords[i][c]) / norm.stddev[c];
        sum[c] += d * d;
      }
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("increment_scale: no increments");
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = std::sqrt(sum[c] / static_cast<double>(n));
  return out;
}

std::vector<Parameter*> GeneratorParams::parameters() {
  return {&w1, &b1, &w2, &b2, &w_mu, &b_mu, &w_sigma, &b_sigma};
}

std::vector<const Parameter*> GeneratorParams::parameters() const {
  return {&w1, &b1, &w2, &b2, &w_mu, &b_mu, &w_sigma, &b_sigma};
}

void GeneratorParams::save(Checkpoint& ckpt) const {
  ckpt.add("gen.arch", Tensor({4}, {static_cast<double>(config.k), static_cast<double>(config.h1),
                                    static_cast<double>(config.h2),
                                    static_cast<double>(static_cast<int>(config.phi))}));
  ckpt.add("gen.norm", Tensor({2, 3}, {norm.mean[0], norm.mean[1], norm.mean[2], norm.stddev[0],
                                       norm.stddev[1], norm.stddev[2]}));
  for (const Parameter* p : parameters()) ckpt.add(p->name, p->value);
}

GeneratorParams GeneratorParams::load(const Checkpoint& ckpt) {
  const Tensor& arch = ckpt.get("gen.arch");
  const Tensor& norm_t = ckpt.get("gen.norm");
  if (arch.size() != 4 || norm_t.shape() != std::vector<std::size_t>{2, 3}) {
    throw std::runtime_error("checkpoint: malformed generator architecture records");
  }
  GeneratorConfig config;
  config.k = static_cast<std::size_t>(arch[0]);
  config.h1 = static_cast<std::size_t>(arch[1]);
  config.h2 = static_cast<std::size_t>(arch[2]);
  const int phi = static_cast<int>(arch[3]);
  if (phi < 0 || phi > static_cast<int>(Activation::identity)) {
    throw std::runtime_error("checkpoint: unknown generator activation code");
  }
  config.phi = static_cast<Activation>(phi);
  NormStats norm;
  for (std::size_t c = 0; c < 3; ++c) {
    norm.mean[c] = norm_t.at(0, c);
    norm.stddev[c] = norm_t.at(1, c);
  }
  GeneratorParams p = zeros(config, norm);
  for (Parameter* param : p.parameters()) {
    const Tensor& stored = ckpt.get(param->name);
    if (stored.shape() != param->value.shape()) {
      throw std::runtime_error("checkpoint: " + param->name + " has shape " + stored.shape_string() +
                               ", expected " + param->value.shape_string());
    }
    param->value = stored;
  }
  return p;
}

SrcOutput src_step(const GeneratorParams& params, std::span<const Coordinate> history,
                   const Noise& noise, SrcTrace* trace) {
  const auto& cfg = params.config;
  if (history.size() != cfg.k) {
    throw std::invalid_argument("src_step: history has " + std::to_string(history.size()) +
                                " entries, expected k=" + std::to_string(cfg.k));
  }
  Tensor x0({3 * cfg.k});
  for (std::size_t i = 0; i < cfg.k; ++i) {
    for (std::size_t c = 0; c < 3; ++c) x0[3 * i + c] = params.norm.standardize(history[i][c], c);
  }
  check_finite(x0, "standardized history");

  DenseTrace local_l1, local_l2, local_mu, local_sigma;
  DenseTrace& t1 = trace ? trace->layer1 : local_l1;
  DenseTrace& t2 = trace ? trace->layer2 : local_l2;
  DenseTrace& tmu = trace ? trace->mu_head : local_mu;
  DenseTrace& tsig = trace ? trace->sigma_head : local_sigma;

  const Tensor x1 = fully_connected(x0, params.w1.value, params.b1.value, cfg.phi, &t1);
  check_finite(x1, "layer 1");
  Tensor joined({x0.size() + x1.size()});
  std::copy(x0.data().begin(), x0.data().end(), joined.data().begin());
  std::copy(x1.data().begin(), x1.data().end(), joined.data().begin() + x0.size());
  const Tensor x2 = fully_connected(joined, params.w2.value, params.b2.value, cfg.phi, &t2);
  check_finite(x2, "layer 2");
  const Tensor mu = fully_connected(x2, params.w_mu.value, params.b_mu.value, Activation::identity, &tmu);
  check_finite(mu, "mu head");
  const Tensor sigma =
      fully_connected(x2, params.w_sigma.value, params.b_sigma.value, Activation::softplus, &tsig);
  check_finite(sigma, "sigma head");
  if (trace) trace->noise = noise;

  SrcOutput out;
  for (std::size_t c = 0; c < 3; ++c) {
    out.mu[c] = mu[c];
    out.sigma[c] = sigma[c];
    const double increment = mu[c] + sigma[c] * noise[c];
    out.next[c] = history[0][c] + params.norm.stddev[c] * increment;
  }
  if (!std::isfinite(out.next.r) || !std::isfinite(out.next.theta) || !std::isfinite(out.next.z)) {
    throw std::runtime_error("src_step: non-finite values in output coordinate");
  }
  return out;
}

std::vector<Coordinate> src_step_backward(GeneratorParams& params, const SrcTrace& trace,
                                          const Coordinate& grad_next) {
  const auto& cfg = params.config;
  Tensor grad_mu({3});
  Tensor grad_sigma({3});
  for (std::size_t c = 0; c < 3; ++c) {
    const double grad_increment = grad_next[c] * params.norm.stddev[c];
    grad_mu[c] = grad_increment;
    grad_sigma[c] = grad_increment * trace.noise[c];
  }
  Tensor grad_x2 = fully_connected_backward(trace.mu_head, params.w_mu.value, grad_mu,
                                            &params.w_mu.grad, &params.b_mu.grad);
  const Tensor from_sigma = fully_connected_backward(trace.sigma_head, params.w_sigma.value,
                                                     grad_sigma, &params.w_sigma.grad,
                                                     &params.b_sigma.grad);
  for (std::size_t i = 0; i < grad_x2.size(); ++i) grad_x2[i] += from_sigma[i];

  const Tensor grad_joined = fully_connected_backward(trace.layer2, params.w2.value, grad_x2,
                                                      &params.w2.grad, &params.b2.grad);
  const std::size_t in = 3 * cfg.k;
  Tensor grad_x1({cfg.h1});
  for (std::size_t i = 0; i < cfg.h1; ++i) grad_x1[i] = grad_joined[in + i];
  const Tensor grad_x0_l1 = fully_connected_backward(trace.layer1, params.w1.value, grad_x1,
                                                     &params.w1.grad, &params.b1.grad);

  std::vector<Coordinate> grad_history(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t j = 3 * i + c;
      grad_history[i][c] = (grad_joined[j] + grad_x0_l1[j]) / params.norm.stddev[c];
    }
  }
  return grad_history;
}

Trajectory generate_segment(const GeneratorParams& params, std::span<const Coordinate> seed,
                            std::span<const Noise> noise, SegmentTrace* trace, double dt) {
  const std::size_t k = params.config.k;
  if (seed.size() != k) {
    throw std::invalid_argument("generate_segment: seed has " + std::to_string(seed.size()) +
                                " coordinates, expected k=" + std::to_string(k));
  }
  if (noise.empty()) throw std::invalid_argument("generate_segment: n_new must be at least 1");

  Trajectory out;
  out.dt = dt;
  out.coords.reserve(k + noise.size());
  out.coords.assign(seed.begin(), seed.end());
  if (trace) trace->steps.assign(noise.size(), SrcTrace{});

  std::vector<Coordinate> history(k);
  for (std::size_t s = 0; s < noise.size(); ++s) {
    const std::size_t t = k + s;
    for (std::size_t i = 0; i < k; ++i) history[i] = out.coords[t - 1 - i];
    const SrcOutput step = src_step(params, history, noise[s], trace ? &trace->steps[s] : nullptr);
    out.coords.push_back(step.next);
  }
  return out;
}

Trajectory generate_segment(const GeneratorParams& params, std::span<const Coordinate> seed,
                            std::size_t n_new, Rng& rng, SegmentTrace* trace, double dt) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Noise> noise(n_new);
  for (auto& n : noise) {
    for (double& v : n) v = gauss(rng);
  }
  return generate_segment(params, seed, noise, trace, dt);
}

void generate_segment_backward(GeneratorParams& params, const SegmentTrace& trace,
                               std::span<const Coordinate> grad_coords) {
  const std::size_t k = params.config.k;
  const std::size_t n_new = trace.steps.size();
  if (grad_coords.size() != k + n_new) {
    throw std::invalid_argument("generate_segment_backward: expected " + std::to_string(k + n_new) +
                                " coordinate gradients");
  }
  std::vector<Coordinate> grad(grad_coords.begin(), grad_coords.end());
  for (std::size_t s = n_new; s-- > 0;) {
    const std::size_t t = k + s;
    const Coordinate g = grad[t];
    const auto grad_history = src_step_backward(params, trace.steps[s], g);
    for (std::size_t c = 0; c < 3; ++c) grad[t - 1][c] += g[c];
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = 0; c < 3; ++c) grad[t - 1 - i][c] += grad_history[i][c];
    }
  }
}

Trajectory extend_trajectory(const GeneratorParams& params, std::span<const Coordinate> initial_seed,
                             std::size_t n_iterations, std::size_t segment_new, Rng& rng,
                             double dt) {
  if (n_iterations == 0) throw std::invalid_argument("extend_trajectory: n_iterations must be >= 1");
  const std::size_t k = params.config.k;
  Trajectory out = generate_segment(params, initial_seed, segment_new, rng, nullptr, dt);
  out.coords.reserve(k + n_iterations * segment_new);
  for (std::size_t it = 1; it < n_iterations; ++it) {
    std::span<const Coordinate> seed(out.coords.data() + out.coords.size() - k, k);
    const Trajectory segment = generate_segment(params, seed, segment_new, rng, nullptr, dt);
    out.coords.insert(out.coords.end(), segment.coords.begin() + static_cast<std::ptrdiff_t>(k),
                      segment.coords.end());
  }
  return out;
}

}  // namespace trajgan
