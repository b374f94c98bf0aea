#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "trajgan/trajectory.hpp"

namespace trajgan {

/// Underdamped Langevin parameters for one cylindrical component:
///   dx = v dt,  dv = (-damping v - stiffness (x - equilibrium)) dt + sqrt(2 noise) dW
struct ComponentDynamics {
  double damping = 0.0;      // 1/s
  double stiffness = 0.0;    // 1/s^2, zero for a free component
  double noise = 0.0;        // (unit)^2/s^3
  double equilibrium = 0.0;  // unit
  double initial_offset = 0.0;
  double initial_velocity = 0.0;

  /// noise / damping
  double stationary_velocity_variance() const { return noise / damping; }
  /// noise / (damping * stiffness); only meaningful for confined components
  double stationary_position_variance() const { return noise / (damping * stiffness); }
};

struct LangevinConfig {
  // Damping time is 10 sampling intervals; r and z are confined, theta rotates freely.
  std::array<ComponentDynamics, 3> dynamics{{
      {1.0 / (10.0 * kUnitInterval), 400.0, 9.0 * 400.0 / (10.0 * kUnitInterval), 25.0, 0.0, 0.0},
      {1.0 / (10.0 * kUnitInterval), 0.0, 4.0 / (10.0 * kUnitInterval), 0.0, 0.0, 0.0},
      {1.0 / (10.0 * kUnitInterval), 400.0, 25.0 * 400.0 / (10.0 * kUnitInterval), 50.0, 0.0, 0.0},
  }};
  double dt = kUnitInterval;
  std::size_t steps = 1100;
  std::size_t n_traj = 15;
  std::uint64_t seed = 20190101;
};

void validate(const LangevinConfig& cfg);

/// Euler-Maruyama integration of every trajectory. Positions of confined
/// components and all velocities start from their stationary law (plus the
/// configured offsets), so runs are stationary from the first step.
std::vector<Trajectory> simulate(const LangevinConfig& cfg);

}  // namespace trajgan
