#pragma once

#include <array>
#include <span>
#include <vector>

#include "trajgan/checkpoint.hpp"
#include "trajgan/layers.hpp"
#include "trajgan/rng.hpp"
#include "trajgan/tensor.hpp"
#include "trajgan/trajectory.hpp"

namespace trajgan {

struct ConvSpec {
  std::size_t channels = 16;
  std::size_t width = 5;
  std::size_t stride = 2;
};

struct DiscriminatorConfig {
  std::size_t segment_len = 100;
  std::array<ConvSpec, 3> layers{{{16, 5, 2}, {32, 5, 2}, {64, 3, 2}}};
  double dropout_rate = 0.5;
};

/// Feature-map lengths after each convolution; throws if the chain does not fit segment_len.
std::array<std::size_t, 3> feature_lengths(const DiscriminatorConfig& config);

/// Three valid conv1d + ELU (+ dropout) stages on a 3-channel standardized
/// segment, followed by one dense sigmoid unit.
struct DiscriminatorParams {
  DiscriminatorConfig config;
  NormStats norm;
  std::array<Parameter, 3> kernels;
  std::array<Parameter, 3> biases;
  Parameter dense_w, dense_b;

  static DiscriminatorParams zeros(const DiscriminatorConfig& config, const NormStats& norm);
  /// He-style uniform initialization suited to ELU.
  static DiscriminatorParams initialized(const DiscriminatorConfig& config, const NormStats& norm,
                                         Rng& rng);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  void save(Checkpoint& ckpt) const;
  static DiscriminatorParams load(const Checkpoint& ckpt);
};

struct DiscriminatorTrace {
  std::array<ConvTrace, 3> conv;
  std::array<ActivationTrace, 3> act;
  std::array<DropoutTrace, 3> drop;
  DenseTrace dense;
};

/// Probability in (0, 1) that the segment is real. Dropout is active only in train mode.
double discriminate(const DiscriminatorParams& params, std::span<const Coordinate> segment,
                    Mode mode, Rng& rng, DiscriminatorTrace* trace = nullptr);

enum class ParamGrads { accumulate, skip };

/// Backpropagates dL/dD. Returns dL/d(segment coordinate) in raw units; parameter
/// gradients are accumulated only with ParamGrads::accumulate.
std::vector<Coordinate> discriminate_backward(DiscriminatorParams& params,
                                              const DiscriminatorTrace& trace, double grad_prob,
                                              ParamGrads param_grads);

}  // namespace trajgan
