#include "trajgan/discriminator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajgan {

std::array<std::size_t, 3> feature_lengths(const DiscriminatorConfig& config) {
  std::array<std::size_t, 3> lengths{};
  std::size_t len = config.segment_len;
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& spec = config.layers[l];
    if (spec.channels == 0 || spec.width == 0 || spec.stride == 0) {
      throw std::invalid_argument("discriminator: conv layer " + std::to_string(l + 1) +
                                  " needs positive channels, width and stride");
    }
    len = conv1d_output_length(len, spec.width, spec.stride);
    if (len == 0) {
      throw std::invalid_argument("discriminator: conv layer " + std::to_string(l + 1) +
                                  " does not fit segment length " +
                                  std::to_string(config.segment_len));
    }
    lengths[l] = len;
  }
  return lengths;
}

DiscriminatorParams DiscriminatorParams::zeros(const DiscriminatorConfig& config,
                                               const NormStats& norm) {
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
    throw std::invalid_argument("discriminator: dropout rate must lie in [0, 1)");
  }
  const auto lengths = feature_lengths(config);
  DiscriminatorParams p;
  p.config = config;
  p.norm = norm;
  std::size_t c_in = 3;
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& spec = config.layers[l];
    const std::string idx = std::to_string(l + 1);
    p.kernels[l] = Parameter("disc.conv" + idx + ".kernels", Tensor({spec.channels, c_in, spec.width}));
    p.biases[l] = Parameter("disc.conv" + idx + ".bias", Tensor({spec.channels}));
    c_in = spec.channels;
  }
  p.dense_w = Parameter("disc.dense.w", Tensor({1, c_in * lengths[2]}));
  p.dense_b = Parameter("disc.dense.b", Tensor({1}));
  return p;
}

DiscriminatorParams DiscriminatorParams::initialized(const DiscriminatorConfig& config,
                                                     const NormStats& norm, Rng& rng) {
  DiscriminatorParams p = zeros(config, norm);
  auto fill_uniform = [&rng](Tensor& t, std::size_t fan_in) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in)) / std::sqrt(2.0);
    std::uniform_real_distribution<double> u(-a, a);
    for (double& v : t.data()) v = u(rng);
  };
  for (auto& k : p.kernels) fill_uniform(k.value, k.value.extent(1) * k.value.extent(2));
  fill_uniform(p.dense_w.value, p.dense_w.value.extent(1));
  return p;
}

std::vector<Parameter*> DiscriminatorParams::parameters() {
  return {&kernels[0], &biases[0], &kernels[1], &biases[1], &kernels[2], &biases[2],
          &dense_w,    &dense_b};
}

std::vector<const Parameter*> DiscriminatorParams::parameters() const {
  return {&kernels[0], &biases[0], &kernels[1], &biases[1], &kernels[2], &biases[2],
          &dense_w,    &dense_b};
}

void DiscriminatorParams::save(Checkpoint& ckpt) const {
  std::vector<double> arch{static_cast<double>(config.segment_len), config.dropout_rate};
  for (const auto& spec : config.layers) {
    arch.push_back(static_cast<double>(spec.channels));
    arch.push_back(static_cast<double>(spec.width));
    arch.push_back(static_cast<double>(spec.stride));
  }
  ckpt.add("disc.arch", Tensor({arch.size()}, arch));
  ckpt.add("disc.norm", Tensor({2, 3}, {norm.mean[0], norm.mean[1], norm.mean[2], norm.stddev[0],
                                        norm.stddev[1], norm.stddev[2]}));
  for (const Parameter* p : parameters()) ckpt.add(p->name, p->value);
}

DiscriminatorParams DiscriminatorParams::load(const Checkpoint& ckpt) {
  const Tensor& arch = ckpt.get("disc.arch");
  const Tensor& norm_t = ckpt.get("disc.norm");
  if (arch.size() != 11 || norm_t.shape() != std::vector<std::size_t>{2, 3}) {
    throw std::runtime_error("checkpoint: malformed discriminator architecture records");
  }
  DiscriminatorConfig config;
  config.segment_len = static_cast<std::size_t>(arch[0]);
  config.dropout_rate = arch[1];
  for (std::size_t l = 0; l < 3; ++l) {
    config.layers[l] = {static_cast<std::size_t>(arch[2 + 3 * l]),
                        static_cast<std::size_t>(arch[3 + 3 * l]),
                        static_cast<std::size_t>(arch[4 + 3 * l])};
  }
  NormStats norm;
  for (std::size_t c = 0; c < 3; ++c) {
    norm.mean[c] = norm_t.at(0, c);
    norm.stddev[c] = norm_t.at(1, c);
  }
  DiscriminatorParams p = zeros(config, norm);
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

double discriminate(const DiscriminatorParams& params, std::span<const Coordinate> segment,
                    Mode mode, Rng& rng, DiscriminatorTrace* trace) {
  const std::size_t len = params.config.segment_len;
  if (segment.size() != len) {
    throw std::invalid_argument("discriminate: segment length " + std::to_string(segment.size()) +
                                " differs from configured length " + std::to_string(len));
  }
  DiscriminatorTrace local;
  DiscriminatorTrace& tr = trace ? *trace : local;

  Tensor x({3, len});
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < 3; ++c) x.at(c, t) = params.norm.standardize(segment[t][c], c);
  }
  for (std::size_t l = 0; l < 3; ++l) {
    Tensor conv = conv1d(x, params.kernels[l].value, params.biases[l].value,
                         params.config.layers[l].stride, &tr.conv[l]);
    Tensor act = apply_activation(conv, Activation::elu, &tr.act[l]);
    x = dropout(act, params.config.dropout_rate, mode, rng, &tr.drop[l]);
  }
  const Tensor flat({x.size()}, std::vector<double>(x.data().begin(), x.data().end()));
  const Tensor prob =
      fully_connected(flat, params.dense_w.value, params.dense_b.value, Activation::sigmoid, &tr.dense);
  return prob[0];
}

std::vector<Coordinate> discriminate_backward(DiscriminatorParams& params,
                                              const DiscriminatorTrace& trace, double grad_prob,
                                              ParamGrads param_grads) {
  const bool acc = param_grads == ParamGrads::accumulate;
  const Tensor grad_out({1}, {grad_prob});
  const Tensor grad_flat = fully_connected_backward(trace.dense, params.dense_w.value, grad_out,
                                                    acc ? &params.dense_w.grad : nullptr,
                                                    acc ? &params.dense_b.grad : nullptr);
  Tensor grad(trace.act[2].output.shape(),
              std::vector<double>(grad_flat.data().begin(), grad_flat.data().end()));
  for (std::size_t l = 3; l-- > 0;) {
    grad = dropout_backward(trace.drop[l], grad);
    grad = apply_activation_backward(trace.act[l], grad);
    grad = conv1d_backward(trace.conv[l], params.kernels[l].value, grad,
                           acc ? &params.kernels[l].grad : nullptr,
                           acc ? &params.biases[l].grad : nullptr);
  }
  const std::size_t len = params.config.segment_len;
  std::vector<Coordinate> grad_segment(len);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < 3; ++c) grad_segment[t][c] = grad.at(c, t) / params.norm.stddev[c];
  }
  return grad_segment;
}

}  // namespace trajgan
