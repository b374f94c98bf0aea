#pragma once

#include "trajgan/tensor.hpp"

namespace trajgan {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update from p.grad; increments step_count and zeroes the gradient.
void adam_step(Parameter& p, const AdamConfig& cfg);

}  // namespace trajgan
