#include "trajgan/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace trajgan {

void adam_step(Parameter& p, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0) || !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) || !(cfg.eps > 0.0)) {
    throw std::invalid_argument("adam_step: invalid hyperparameters for " + p.name);
  }
  p.step_count += 1;
  const double t = static_cast<double>(p.step_count);
  const double m_correction = 1.0 - std::pow(cfg.beta1, t);
  const double v_correction = 1.0 - std::pow(cfg.beta2, t);

  auto value = p.value.data();
  auto grad = p.grad.data();
  auto m = p.adam_m.data();
  auto v = p.adam_v.data();
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / m_correction;
    const double v_hat = v[i] / v_correction;
    value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    grad[i] = 0.0;
  }
}

}  // namespace trajgan
