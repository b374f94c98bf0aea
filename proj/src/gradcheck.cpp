#include "trajgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trajgan {

namespace {

double finite_or_throw(double v, const std::string& where) {
  if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite objective " + where);
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<double()>& value,
                           const std::function<void()>& backward,
                           std::span<Parameter* const> params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: step must be positive");
  finite_or_throw(value(), "at the base point");
  for (Parameter* p : params) p->zero_grad();
  backward();

  GradCheckResult result;
  for (Parameter* p : params) {
    auto values = p->value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const double plus = value();
      values[i] = original - h;
      const double minus = value();
      values[i] = original;
      finite_or_throw(plus, "perturbing " + p->name);
      finite_or_throw(minus, "perturbing " + p->name);

      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      if (result.worst_parameter.empty() || err > result.max_rel_error) {
        result = {err, p->name, i, analytic, numeric};
      }
    }
  }
  return result;
}

}  // namespace trajgan
