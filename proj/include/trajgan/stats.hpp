#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "trajgan/trajectory.hpp"

namespace trajgan {

/// Per-component MSD on the integer lag grid 1..max_lag (in units of dt).
struct MsdCurve {
  double dt = kUnitInterval;
  std::vector<std::size_t> lag_steps;
  std::array<std::vector<double>, 3> values;

  double lag_seconds(std::size_t i) const { return static_cast<double>(lag_steps[i]) * dt; }
  std::size_t size() const { return lag_steps.size(); }
};

/// Local log-log slope of an MsdCurve. Undefined entries are std::nullopt.
struct GammaCurve {
  double dt = kUnitInterval;
  std::vector<std::size_t> lag_steps;
  std::array<std::vector<std::optional<double>>, 3> gamma;
};

struct VelocityFit {
  Component component = Component::r;
  std::vector<double> bin_edges;
  std::vector<double> densities;
  double mean = 0.0;
  double stddev = 0.0;
  double residual = 0.0;
  bool degenerate = false;  // every velocity identical; the normal fit is not meaningful

  double bin_center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
};

struct CorrelationMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major

  double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

struct AccuracyScore {
  double accuracy = 0.0;
  double eta_mean = 0.0;
  std::vector<std::size_t> excluded_lag_steps;  // guarded lags left out of the mean
};

struct GeneralizationScore {
  double generalization = 0.0;
  double zeta_mean = 0.0;
};

struct ScoreReport {
  double accuracy = 0.0;
  double eta_mean = 0.0;
  double generalization = 0.0;
  double zeta_mean = 0.0;
  MsdCurve truth_msd;
  MsdCurve generated_msd;
  CorrelationMatrix correlation;
  std::vector<std::size_t> excluded_lag_steps;
};

/// Time-averaged squared displacement of a scalar series at one lag; zero at lag 0.
double time_avg_msd_at(std::span<const double> y, std::size_t lag);
/// Time-averaged MSD of one component at lags 1..max_lag. Requires max_lag < traj.size().
std::vector<double> time_avg_msd(const Trajectory& traj, Component component, std::size_t max_lag);
/// All three components at lags 1..max_lag.
MsdCurve trajectory_msd(const Trajectory& traj, std::size_t max_lag);
/// Pointwise mean over curves sharing one lag grid.
MsdCurve ensemble_msd(std::span<const MsdCurve> curves);
/// Ensemble MSD of a trajectory set at lags 1..max_lag.
MsdCurve ensemble_msd(std::span<const Trajectory> trajs, std::size_t max_lag);

struct GammaOptions {
  std::size_t window = 7;            // points per least-squares fit
  std::size_t dense_limit = 20;      // every integer lag up to this one
  std::size_t points_per_decade = 20;
};

/// The analysis lag grid: every lag up to dense_limit, log-spaced integer lags above.
std::vector<std::size_t> analysis_lag_grid(std::size_t max_lag, const GammaOptions& opts = {});
GammaCurve scaling_exponent(const MsdCurve& msd, const GammaOptions& opts = {});

/// Freedman-Diaconis histogram of pooled (y[t+1]-y[t])/dt, with a least-squares normal fit.
VelocityFit velocity_distribution(std::span<const Trajectory> trajs, Component component);

/// Pearson coefficient of two equal-length series; throws on zero variance.
double pearson(std::span<const double> a, std::span<const double> b);
/// Mean of the r, theta and z Pearson coefficients.
double pearson(const Trajectory& a, const Trajectory& b);
CorrelationMatrix correlation_matrix(std::span<const Trajectory> truth,
                                     std::span<const Trajectory> candidates);

/// Sum over components of MSD divided by the matching scale (e.g. ground-truth variance).
std::vector<double> combined_msd(const MsdCurve& msd, const std::array<double, 3>& scale);
/// Pooled per-component variance of every coordinate in the set.
std::array<double, 3> component_variance(std::span<const Trajectory> trajs);

inline constexpr double kLogGuard = 0.05;

/// 1 - mean relative deviation of log10 MSD; lags with |log10 truth| < guard are skipped.
AccuracyScore accuracy_score(std::span<const double> truth_msd, std::span<const double> gen_msd,
                             std::span<const std::size_t> lag_steps, double guard = kLogGuard);
AccuracyScore accuracy_score(const MsdCurve& truth, const MsdCurve& generated,
                             const std::array<double, 3>& scale, double guard = kLogGuard);
GeneralizationScore generalization_score(const CorrelationMatrix& matrix);

/// Full comparison of a generated set against ground truth; MSD runs to lag N-1.
ScoreReport score(std::span<const Trajectory> truth, std::span<const Trajectory> generated);

// Plot-ready CSV writers.
void write_msd_csv(std::ostream& os, const MsdCurve& msd);
void write_gamma_csv(std::ostream& os, const GammaCurve& gamma);
void write_histogram_csv(std::ostream& os, std::span<const VelocityFit> fits);
void write_velocity_fit_csv(std::ostream& os, std::span<const VelocityFit> fits);
void write_matrix_csv(std::ostream& os, const CorrelationMatrix& matrix);
void write_score_csv(std::ostream& os, const ScoreReport& report);

}  // namespace trajgan
