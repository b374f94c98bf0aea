#include "trajgan/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "trajgan/rng.hpp"

namespace trajgan {

void validate(const LangevinConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("synth: dt must be positive");
  if (cfg.steps < 2) throw std::invalid_argument("synth: steps must be at least 2");
  if (cfg.n_traj == 0) throw std::invalid_argument("synth: n_traj must be at least 1");
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& d = cfg.dynamics[c];
    const std::string name(to_string(kComponents[c]));
    if (!(d.damping > 0.0)) throw std::invalid_argument("synth: damping for " + name + " must be positive");
    if (!(d.stiffness >= 0.0)) throw std::invalid_argument("synth: stiffness for " + name + " must be >= 0");
    if (!(d.noise >= 0.0)) throw std::invalid_argument("synth: noise for " + name + " must be >= 0");
  }
}

std::vector<Trajectory> simulate(const LangevinConfig& cfg) {
  validate(cfg);
  std::vector<Trajectory> out;
  out.reserve(cfg.n_traj);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t id = 0; id < cfg.n_traj; ++id) {
    Rng rng = make_stream(cfg.seed, "synth", id);
    std::array<double, 3> x{}, v{};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& d = cfg.dynamics[c];
      x[c] = d.equilibrium + d.initial_offset;
      v[c] = d.initial_velocity;
      if (d.noise > 0.0) {
        if (d.stiffness > 0.0) x[c] += std::sqrt(d.stationary_position_variance()) * gauss(rng);
        v[c] += std::sqrt(d.stationary_velocity_variance()) * gauss(rng);
      }
    }

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.coords.reserve(cfg.steps);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      traj.coords.push_back({x[0], x[1], x[2]});
      for (std::size_t c = 0; c < 3; ++c) {
        const auto& d = cfg.dynamics[c];
        const double kick = d.noise > 0.0 ? std::sqrt(2.0 * d.noise * cfg.dt) * gauss(rng) : 0.0;
        const double accel = -d.damping * v[c] - d.stiffness * (x[c] - d.equilibrium);
        x[c] += v[c] * cfg.dt;
        v[c] += accel * cfg.dt + kick;
        if (!std::isfinite(x[c]) || !std::isfinite(v[c])) {
          throw std::runtime_error("synth: trajectory " + std::to_string(id) + " became non-finite at step " +
                                   std::to_string(step) + "; reduce dt or stiffness");
        }
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace trajgan
