#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace trajgan {

/// Sampling interval of the tracked particle trajectories, seconds.
inline constexpr double kUnitInterval = 4.76e-3;

enum class Component : std::size_t { r = 0, theta = 1, z = 2 };
inline constexpr std::array<Component, 3> kComponents = {Component::r, Component::theta,
                                                         Component::z};
std::string_view to_string(Component c);

/// Cylindrical position: r and z in mm, theta in radians and never wrapped.
struct Coordinate {
  double r = 0.0;
  double theta = 0.0;
  double z = 0.0;

  double& operator[](std::size_t c) { return c == 0 ? r : (c == 1 ? theta : z); }
  double operator[](std::size_t c) const { return c == 0 ? r : (c == 1 ? theta : z); }
  double& operator[](Component c) { return (*this)[static_cast<std::size_t>(c)]; }
  double operator[](Component c) const { return (*this)[static_cast<std::size_t>(c)]; }

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct Trajectory {
  std::vector<Coordinate> coords;
  double dt = kUnitInterval;

  std::size_t size() const { return coords.size(); }
  std::vector<double> component(Component c) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Per-component location and scale used to standardize coordinates.
struct NormStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> stddev{1.0, 1.0, 1.0};

  double standardize(double value, std::size_t c) const { return (value - mean[c]) / stddev[c]; }
};

/// Pooled mean and (population) standard deviation of every coordinate in the set.
NormStats compute_norm_stats(std::span<const Trajectory> trajs);

/// CSV with header `traj_id,step,r_mm,theta_rad,z_mm`, one row per timestep.
void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> trajs);
std::vector<Trajectory> read_trajectories_csv(std::istream& is, double dt = kUnitInterval);

void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajs);
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          double dt = kUnitInterval);

}  // namespace trajgan
