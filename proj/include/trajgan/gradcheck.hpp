#pragma once

#include <functional>
#include <span>
#include <string>

#include "trajgan/tensor.hpp"

namespace trajgan {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic gradients against central differences (f(p+h) - f(p-h)) / 2h.
///
/// `value` evaluates the scalar objective at the current parameter values.
/// `backward` must populate `grad` of every listed parameter; grad_check zeroes
/// them beforehand. Relative error uses max(|analytic|, |numeric|, 1e-8) as
/// denominator. Parameter values are restored before returning.
GradCheckResult grad_check(const std::function<double()>& value,
                           const std::function<void()>& backward,
                           std::span<Parameter* const> params, double h = 1e-5);

}  // namespace trajgan
