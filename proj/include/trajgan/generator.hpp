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

struct GeneratorConfig {
  std::size_t k = 10;  // history length fed to every cell
  std::size_t h1 = 64;
  std::size_t h2 = 64;
  Activation phi = Activation::tanh;
};

/// Weights of the stochastic recurrent cell, shared by every position in the chain.
///
/// Layer 1 maps the standardized history X0 (3k values, newest coordinate
/// first) to X1; layer 2 maps [X0; X1] to X2; two heads map X2 to the mean and
/// (softplus) standard deviation of the next standardized increment.
struct GeneratorParams {
  GeneratorConfig config;
  NormStats norm;
  Parameter w1, b1, w2, b2, w_mu, b_mu, w_sigma, b_sigma;

  /// All weights and biases zero.
  static GeneratorParams zeros(const GeneratorConfig& config, const NormStats& norm);
  /// Xavier-uniform hidden layers, a zero mean head, a scaled-down sigma head and a
  /// sigma bias chosen so the initial increment spread per component is
  /// `initial_sigma` (standardized units).
  static GeneratorParams initialized(const GeneratorConfig& config, const NormStats& norm, Rng& rng,
                                     const std::array<double, 3>& initial_sigma = {0.05, 0.05, 0.05});

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  void save(Checkpoint& ckpt) const;
  static GeneratorParams load(const Checkpoint& ckpt);
};

/// Per-component RMS of one-step increments, in standardized units.
std::array<double, 3> increment_scale(std::span<const Trajectory> trajs, const NormStats& norm);

using Noise = std::array<double, 3>;

struct SrcOutput {
  Coordinate next;
  std::array<double, 3> mu{};
  std::array<double, 3> sigma{};
};

struct SrcTrace {
  DenseTrace layer1, layer2, mu_head, sigma_head;
  Noise noise{};
};

/// One cell evaluation. `history` holds the k most recent coordinates, newest first.
SrcOutput src_step(const GeneratorParams& params, std::span<const Coordinate> history,
                   const Noise& noise, SrcTrace* trace = nullptr);

/// Backpropagates dL/d(next) through one cell into the parameter gradients and
/// returns dL/d(history[i]) for each history entry (excluding the identity path
/// from history[0] to next, which the caller adds).
std::vector<Coordinate> src_step_backward(GeneratorParams& params, const SrcTrace& trace,
                                          const Coordinate& grad_next);

struct SegmentTrace {
  std::vector<SrcTrace> steps;
};

/// Extends a k-coordinate seed (chronological order) by n_new coordinates.
/// The first k output coordinates are the seed itself.
Trajectory generate_segment(const GeneratorParams& params, std::span<const Coordinate> seed,
                            std::size_t n_new, Rng& rng, SegmentTrace* trace = nullptr,
                            double dt = kUnitInterval);
/// Same, with explicit per-step unit Gaussian draws (noise.size() new coordinates).
Trajectory generate_segment(const GeneratorParams& params, std::span<const Coordinate> seed,
                            std::span<const Noise> noise, SegmentTrace* trace = nullptr,
                            double dt = kUnitInterval);

/// Accumulates parameter gradients given dL/dy for every coordinate of the
/// generated segment (seed included; seed entries are ignored).
void generate_segment_backward(GeneratorParams& params, const SegmentTrace& trace,
                               std::span<const Coordinate> grad_coords);

/// Runs generate_segment n_iterations times, reseeding each time from the k
/// newest coordinates. Returns seed followed by n_iterations * segment_new coordinates.
Trajectory extend_trajectory(const GeneratorParams& params, std::span<const Coordinate> initial_seed,
                             std::size_t n_iterations, std::size_t segment_new, Rng& rng,
                             double dt = kUnitInterval);

}  // namespace trajgan
