#pragma once

#include <random>
#include <vector>

#include "trajgan/rng.hpp"
#include "trajgan/tensor.hpp"
#include "trajgan/trajectory.hpp"

namespace testutil {

inline trajgan::Tensor random_tensor(std::vector<std::size_t> shape, trajgan::Rng& rng,
                                     double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  trajgan::Tensor t(std::move(shape));
  for (double& v : t.data()) v = g(rng);
  return t;
}

// Gaussian random walk in all three components.
inline trajgan::Trajectory random_walk(std::size_t n, trajgan::Rng& rng, double step = 1.0) {
  std::normal_distribution<double> g(0.0, step);
  trajgan::Trajectory t;
  t.coords.resize(n);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) t.coords[i][c] = t.coords[i - 1][c] + g(rng);
  }
  return t;
}

// Independent Gaussian samples per step.
inline trajgan::Trajectory white_noise(std::size_t n, trajgan::Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  trajgan::Trajectory t;
  t.coords.resize(n);
  for (auto& p : t.coords) {
    for (std::size_t c = 0; c < 3; ++c) p[c] = g(rng);
  }
  return t;
}

// The O(N^2) definition, written independently of the library.
inline double brute_force_msd(const std::vector<double>& y, std::size_t lag) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = i; j < y.size(); ++j) {
      if (j - i != lag) continue;
      sum += (y[j] - y[i]) * (y[j] - y[i]);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace testutil
