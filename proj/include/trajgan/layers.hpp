#pragma once

#include <string_view>
#include <vector>

#include "trajgan/rng.hpp"
#include "trajgan/tensor.hpp"

namespace trajgan {

enum class Activation { tanh, elu, sigmoid, softplus, identity };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

double activate(Activation a, double x);
/// Derivative of the activation, given both the pre-activation and its output.
double activation_derivative(Activation a, double pre, double post);

/// Numerically stable log(1 + e^x).
double softplus(double x);
double sigmoid(double x);

// Forward passes optionally record what their backward pass needs in a trace.
// Backward passes accumulate (+=) into parameter gradients and return the
// gradient with respect to the layer input.

struct DenseTrace {
  Tensor input;
  Tensor pre;
  Tensor output;
  Activation activation = Activation::identity;
};

/// phi(w x + b) for x[in], w[out x in], b[out].
Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b, Activation activation,
                       DenseTrace* trace = nullptr);
Tensor fully_connected_backward(const DenseTrace& trace, const Tensor& w, const Tensor& grad_out,
                                Tensor* grad_w, Tensor* grad_b);

struct ConvTrace {
  Tensor input;
  std::size_t stride = 1;
};

/// Valid cross-correlation: x[c_in x len], kernels[c_out x c_in x width], bias[c_out].
Tensor conv1d(const Tensor& x, const Tensor& kernels, const Tensor& bias, std::size_t stride,
              ConvTrace* trace = nullptr);
Tensor conv1d_backward(const ConvTrace& trace, const Tensor& kernels, const Tensor& grad_out,
                       Tensor* grad_kernels, Tensor* grad_bias);
std::size_t conv1d_output_length(std::size_t length, std::size_t width, std::size_t stride);

struct ActivationTrace {
  Tensor pre;
  Tensor output;
  Activation activation = Activation::identity;
};

Tensor apply_activation(const Tensor& x, Activation activation, ActivationTrace* trace = nullptr);
Tensor apply_activation_backward(const ActivationTrace& trace, const Tensor& grad_out);

enum class Mode { train, eval };

struct DropoutTrace {
  std::vector<double> scale;  // 0 or 1/(1-rate) per entry; empty means identity
};

/// Inverted dropout. Eval mode, or rate 0, returns x unchanged and draws nothing.
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng, DropoutTrace* trace = nullptr);
Tensor dropout_backward(const DropoutTrace& trace, const Tensor& grad_out);

}  // namespace trajgan
