#include "trajgan/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajgan {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "elu") return Activation::elu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softplus") return Activation::softplus;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softplus: return "softplus";
    case Activation::identity: return "identity";
  }
  return "identity";
}

double softplus(double x) {
  // log(1+e^x) = max(x,0) + log1p(e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::elu: return x > 0 ? x : std::expm1(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softplus: return softplus(x);
    case Activation::identity: return x;
  }
  return x;
}

double activation_derivative(Activation a, double pre, double post) {
  switch (a) {
    case Activation::tanh: return 1.0 - post * post;
    case Activation::elu: return pre > 0 ? 1.0 : post + 1.0;
    case Activation::sigmoid: return post * (1.0 - post);
    case Activation::softplus: return sigmoid(pre);
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b, Activation activation,
                       DenseTrace* trace) {
  require(w.rank() == 2 && b.rank() == 1 && x.rank() == 1,
          "fully_connected: expected x[in], w[out x in], b[out]");
  const std::size_t out_dim = w.extent(0);
  const std::size_t in_dim = w.extent(1);
  require(x.size() == in_dim && b.size() == out_dim,
          "fully_connected: shape mismatch x" + x.shape_string() + " w" + w.shape_string() + " b" +
              b.shape_string());

  Tensor pre({out_dim});
  Tensor out({out_dim});
  const auto xs = x.data();
  const auto ws = w.data();
  for (std::size_t o = 0; o < out_dim; ++o) {
    double acc = b[o];
    const double* row = ws.data() + o * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * xs[i];
    pre[o] = acc;
    out[o] = activate(activation, acc);
  }
  if (trace) {
    trace->input = x;
    trace->pre = pre;
    trace->output = out;
    trace->activation = activation;
  }
  return out;
}

Tensor fully_connected_backward(const DenseTrace& trace, const Tensor& w, const Tensor& grad_out,
                                Tensor* grad_w, Tensor* grad_b) {
  const std::size_t out_dim = w.extent(0);
  const std::size_t in_dim = w.extent(1);
  require(grad_out.size() == out_dim, "fully_connected_backward: gradient shape mismatch");

  Tensor grad_x({in_dim});
  const auto xs = trace.input.data();
  const auto ws = w.data();
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double delta =
        grad_out[o] * activation_derivative(trace.activation, trace.pre[o], trace.output[o]);
    if (delta == 0.0) continue;
    const double* row = ws.data() + o * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) grad_x[i] += row[i] * delta;
    if (grad_w) {
      double* grow = grad_w->data().data() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) grow[i] += delta * xs[i];
    }
    if (grad_b) (*grad_b)[o] += delta;
  }
  return grad_x;
}

std::size_t conv1d_output_length(std::size_t length, std::size_t width, std::size_t stride) {
  require(stride >= 1, "conv1d: stride must be positive");
  if (width == 0 || width > length) return 0;
  return (length - width) / stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& kernels, const Tensor& bias, std::size_t stride,
              ConvTrace* trace) {
  require(x.rank() == 2 && kernels.rank() == 3 && bias.rank() == 1,
          "conv1d: expected x[c_in x len], kernels[c_out x c_in x width], bias[c_out]");
  const std::size_t c_in = x.extent(0);
  const std::size_t length = x.extent(1);
  const std::size_t c_out = kernels.extent(0);
  const std::size_t width = kernels.extent(2);
  require(kernels.extent(1) == c_in && bias.size() == c_out,
          "conv1d: shape mismatch x" + x.shape_string() + " kernels" + kernels.shape_string() +
              " bias" + bias.shape_string());
  const std::size_t length_out = conv1d_output_length(length, width, stride);
  require(length_out >= 1, "conv1d: kernel width " + std::to_string(width) +
                               " leaves no valid output for input length " +
                               std::to_string(length));

  Tensor out({c_out, length_out});
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t t = 0; t < length_out; ++t) {
      double acc = bias[o];
      const std::size_t start = t * stride;
      for (std::size_t c = 0; c < c_in; ++c) {
        for (std::size_t u = 0; u < width; ++u) acc += kernels.at(o, c, u) * x.at(c, start + u);
      }
      out.at(o, t) = acc;
    }
  }
  if (trace) {
    trace->input = x;
    trace->stride = stride;
  }
  return out;
}

Tensor conv1d_backward(const ConvTrace& trace, const Tensor& kernels, const Tensor& grad_out,
                       Tensor* grad_kernels, Tensor* grad_bias) {
  const Tensor& x = trace.input;
  const std::size_t c_in = x.extent(0);
  const std::size_t c_out = kernels.extent(0);
  const std::size_t width = kernels.extent(2);
  const std::size_t length_out = grad_out.extent(1);
  require(grad_out.extent(0) == c_out, "conv1d_backward: gradient shape mismatch");

  Tensor grad_x(x.shape());
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t t = 0; t < length_out; ++t) {
      const double g = grad_out.at(o, t);
      if (g == 0.0) continue;
      const std::size_t start = t * trace.stride;
      if (grad_bias) (*grad_bias)[o] += g;
      for (std::size_t c = 0; c < c_in; ++c) {
        for (std::size_t u = 0; u < width; ++u) {
          grad_x.at(c, start + u) += kernels.at(o, c, u) * g;
          if (grad_kernels) grad_kernels->at(o, c, u) += x.at(c, start + u) * g;
        }
      }
    }
  }
  return grad_x;
}

Tensor apply_activation(const Tensor& x, Activation activation, ActivationTrace* trace) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = activate(activation, x[i]);
  if (trace) {
    trace->pre = x;
    trace->output = out;
    trace->activation = activation;
  }
  return out;
}

Tensor apply_activation_backward(const ActivationTrace& trace, const Tensor& grad_out) {
  Tensor grad(grad_out.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = grad_out[i] * activation_derivative(trace.activation, trace.pre[i], trace.output[i]);
  }
  return grad;
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng, DropoutTrace* trace) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (trace) trace->scale.clear();
  if (mode == Mode::eval || rate == 0.0) return x;

  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  Tensor out(x.shape());
  std::vector<double> scale(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale[i] = drop(rng) ? 0.0 : keep_scale;
    out[i] = x[i] * scale[i];
  }
  if (trace) trace->scale = std::move(scale);
  return out;
}

Tensor dropout_backward(const DropoutTrace& trace, const Tensor& grad_out) {
  if (trace.scale.empty()) return grad_out;
  Tensor grad(grad_out.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = grad_out[i] * trace.scale[i];
  return grad;
}

}  // namespace trajgan
