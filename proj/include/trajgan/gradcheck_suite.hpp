#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajgan/gradcheck.hpp"

namespace trajgan {

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckEntry {
  std::string name;
  GradCheckResult result;
  bool passed() const { return result.max_rel_error < kGradCheckTolerance; }
};

/// Finite-difference checks for every layer, the recurrent cell, a generated
/// segment, the discriminator (parameters and input) and both adversarial
/// objectives end to end, all on small randomized shapes.
///
/// `inject_fault` perturbs one analytic gradient so callers can confirm the
/// suite actually detects a broken backward pass.
std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed, bool inject_fault = false);

}  // namespace trajgan
