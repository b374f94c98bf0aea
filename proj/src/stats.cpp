#include "trajgan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "trajgan/checkpoint.hpp"

namespace trajgan {

double time_avg_msd_at(std::span<const double> y, std::size_t lag) {
  if (lag == 0) return 0.0;
  if (lag >= y.size()) {
    throw std::invalid_argument("time_avg_msd: lag " + std::to_string(lag) +
                                " needs more than " + std::to_string(y.size()) + " samples");
  }
  const std::size_t pairs = y.size() - lag;
  double sum = 0.0;
  for (std::size_t j = 0; j < pairs; ++j) {
    const double d = y[j + lag] - y[j];
    sum += d * d;
  }
  return sum / static_cast<double>(pairs);
}

std::vector<double> time_avg_msd(const Trajectory& traj, Component component, std::size_t max_lag) {
  if (max_lag >= traj.size()) {
    throw std::invalid_argument("time_avg_msd: max_lag " + std::to_string(max_lag) +
                                " must be below the trajectory length " +
                                std::to_string(traj.size()));
  }
  const auto y = traj.component(component);
  std::vector<double> out(max_lag);
  for (std::size_t n = 1; n <= max_lag; ++n) out[n - 1] = time_avg_msd_at(y, n);
  return out;
}

MsdCurve trajectory_msd(const Trajectory& traj, std::size_t max_lag) {
  MsdCurve curve;
  curve.dt = traj.dt;
  curve.lag_steps.resize(max_lag);
  for (std::size_t n = 1; n <= max_lag; ++n) curve.lag_steps[n - 1] = n;
  for (auto c : kComponents) {
    curve.values[static_cast<std::size_t>(c)] = time_avg_msd(traj, c, max_lag);
  }
  return curve;
}

MsdCurve ensemble_msd(std::span<const MsdCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("ensemble_msd: no curves");
  MsdCurve mean = curves.front();
  for (auto& v : mean.values) std::fill(v.begin(), v.end(), 0.0);
  const double inv = 1.0 / static_cast<double>(curves.size());
  for (const auto& curve : curves) {
    if (curve.lag_steps != mean.lag_steps || curve.dt != mean.dt) {
      throw std::invalid_argument("ensemble_msd: curves have different lag grids");
    }
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean.values[c][i] += curve.values[c][i] * inv;
    }
  }
  return mean;
}

MsdCurve ensemble_msd(std::span<const Trajectory> trajs, std::size_t max_lag) {
  std::vector<MsdCurve> curves;
  curves.reserve(trajs.size());
  for (const auto& t : trajs) curves.push_back(trajectory_msd(t, max_lag));
  return ensemble_msd(curves);
}

std::vector<std::size_t> analysis_lag_grid(std::size_t max_lag, const GammaOptions& opts) {
  std::vector<std::size_t> grid;
  for (std::size_t n = 1; n <= std::min(max_lag, opts.dense_limit); ++n) grid.push_back(n);
  if (max_lag <= opts.dense_limit) return grid;
  const double ratio = std::pow(10.0, 1.0 / static_cast<double>(opts.points_per_decade));
  double lag = static_cast<double>(std::max<std::size_t>(opts.dense_limit, 1));
  while (true) {
    lag *= ratio;
    const auto n = static_cast<std::size_t>(std::llround(lag));
    if (n >= max_lag) break;
    if (n > grid.back()) grid.push_back(n);
  }
  if (grid.back() != max_lag) grid.push_back(max_lag);
  return grid;
}

GammaCurve scaling_exponent(const MsdCurve& msd, const GammaOptions& opts) {
  if (opts.window < 2) throw std::invalid_argument("scaling_exponent: window must be >= 2");
  GammaCurve out;
  out.dt = msd.dt;
  if (msd.size() == 0) return out;
  for (std::size_t i = 0; i < msd.size(); ++i) {
    if (msd.lag_steps[i] != i + 1) {
      throw std::invalid_argument("scaling_exponent: expected the integer lag grid 1..max_lag");
    }
  }
  out.lag_steps = analysis_lag_grid(msd.size(), opts);
  const std::size_t n = out.lag_steps.size();
  const std::size_t half = opts.window / 2;

  for (std::size_t c = 0; c < 3; ++c) {
    auto& gamma = out.gamma[c];
    gamma.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(msd.values[c][out.lag_steps[i] - 1] > 0.0)) continue;
      std::size_t lo = i >= half ? i - half : 0;
      std::size_t hi = std::min(n, lo + opts.window);
      lo = hi >= opts.window ? hi - opts.window : 0;

      std::vector<double> xs, ys;
      for (std::size_t j = lo; j < hi; ++j) {
        const double v = msd.values[c][out.lag_steps[j] - 1];
        if (v > 0.0) {
          xs.push_back(std::log10(static_cast<double>(out.lag_steps[j]) * msd.dt));
          ys.push_back(std::log10(v));
        }
      }
      if (xs.size() < 2) continue;
      double x_mean = 0.0, y_mean = 0.0;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        x_mean += xs[j];
        y_mean += ys[j];
      }
      x_mean /= static_cast<double>(xs.size());
      y_mean /= static_cast<double>(xs.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        sxy += (xs[j] - x_mean) * (ys[j] - y_mean);
        sxx += (xs[j] - x_mean) * (xs[j] - x_mean);
      }
      if (sxx > 0.0) gamma[i] = sxy / sxx;
    }
  }
  return out;
}

namespace {

double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double normal_density(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Levenberg-Marquardt on (mean, log sd) for sum_i (N(x_i; mean, sd) - d_i)^2.
void fit_normal(VelocityFit& fit) {
  const std::size_t n = fit.densities.size();
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = fit.bin_center(i);

  auto sse = [&](double mean, double sd) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = normal_density(xs[i], mean, sd) - fit.densities[i];
      s += r * r;
    }
    return s;
  };

  double mean = fit.mean;
  double log_sd = std::log(fit.stddev);
  double current = sse(mean, fit.stddev);
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    const double sd = std::exp(log_sd);
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = normal_density(xs[i], mean, sd);
      const double u = (xs[i] - mean) / sd;
      const double j1 = f * u / sd;         // d f / d mean
      const double j2 = f * (u * u - 1.0);  // d f / d log sd
      const double r = f - fit.densities[i];
      a11 += j1 * j1;
      a12 += j1 * j2;
      a22 += j2 * j2;
      g1 += j1 * r;
      g2 += j2 * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double b11 = a11 * (1.0 + lambda), b22 = a22 * (1.0 + lambda);
      const double det = b11 * b22 - a12 * a12;
      if (det <= 0.0 || !std::isfinite(det)) {
        lambda *= 10.0;
        continue;
      }
      const double d_mean = -(b22 * g1 - a12 * g2) / det;
      const double d_log_sd = -(b11 * g2 - a12 * g1) / det;
      const double trial = sse(mean + d_mean, std::exp(log_sd + d_log_sd));
      if (std::isfinite(trial) && trial < current) {
        mean += d_mean;
        log_sd += d_log_sd;
        const double gain = current - trial;
        current = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = gain > 1e-15 * std::max(current, 1e-300);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  fit.mean = mean;
  fit.stddev = std::exp(log_sd);
  fit.residual = std::sqrt(current);
}

}  // namespace

VelocityFit velocity_distribution(std::span<const Trajectory> trajs, Component component) {
  std::vector<double> v;
  for (const auto& t : trajs) {
    if (t.size() < 2) throw std::invalid_argument("velocity_distribution: trajectory shorter than 2 steps");
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      v.push_back((t.coords[i + 1][component] - t.coords[i][component]) / t.dt);
    }
  }
  if (v.empty()) throw std::invalid_argument("velocity_distribution: no velocities to pool");

  VelocityFit fit;
  fit.component = component;
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);

  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  const double span = hi - lo;
  const double magnitude = std::max({std::abs(lo), std::abs(hi), 1e-300});
  if (span <= 1e-9 * magnitude) {
    // All velocities equal up to rounding: one bin of unit width centered on them.
    const double center = 0.5 * (lo + hi);
    fit.bin_edges = {center - 0.5, center + 0.5};
    fit.densities = {1.0};
    fit.mean = mean;
    fit.stddev = sd;
    fit.degenerate = true;
    return fit;
  }

  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double width = 2.0 * iqr / std::cbrt(n);
  if (!(width > 0.0)) width = span / std::max(1.0, std::ceil(std::sqrt(n)));
  auto bins = static_cast<std::size_t>(std::ceil(span / width));
  bins = std::clamp<std::size_t>(bins, 1, 10000);
  width = span / static_cast<double>(bins);

  fit.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) fit.bin_edges[b] = lo + width * static_cast<double>(b);
  fit.bin_edges.back() = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(b, bins - 1)] += 1;
  }
  fit.densities.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    fit.densities[b] =
        static_cast<double>(counts[b]) / (n * (fit.bin_edges[b + 1] - fit.bin_edges[b]));
  }
  fit.mean = mean;
  fit.stddev = sd;
  fit_normal(fit);
  return fit;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson: series must have equal length >= 2");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (!(va > 0.0)) throw std::invalid_argument("pearson: first series has zero variance");
  if (!(vb > 0.0)) throw std::invalid_argument("pearson: second series has zero variance");
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

double pearson(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("pearson: trajectories have different lengths (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  double sum = 0.0;
  for (auto c : kComponents) {
    try {
      sum += pearson(a.component(c), b.component(c));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " in component " +
                                  std::string(to_string(c)));
    }
  }
  return sum / 3.0;
}

CorrelationMatrix correlation_matrix(std::span<const Trajectory> truth,
                                     std::span<const Trajectory> candidates) {
  CorrelationMatrix m;
  m.rows = truth.size();
  m.cols = candidates.size();
  m.entries.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = pearson(truth[i], candidates[j]);
  }
  return m;
}

std::vector<double> combined_msd(const MsdCurve& msd, const std::array<double, 3>& scale) {
  std::vector<double> out(msd.size(), 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(scale[c] > 0.0)) throw std::invalid_argument("combined_msd: scales must be positive");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += msd.values[c][i] / scale[c];
  }
  return out;
}

std::array<double, 3> component_variance(std::span<const Trajectory> trajs) {
  const NormStats stats = compute_norm_stats(trajs);
  return {stats.stddev[0] * stats.stddev[0], stats.stddev[1] * stats.stddev[1],
          stats.stddev[2] * stats.stddev[2]};
}

AccuracyScore accuracy_score(std::span<const double> truth_msd, std::span<const double> gen_msd,
                             std::span<const std::size_t> lag_steps, double guard) {
  if (truth_msd.size() != gen_msd.size() || truth_msd.size() != lag_steps.size()) {
    throw std::invalid_argument("accuracy_score: curves must share one lag grid");
  }
  AccuracyScore score;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < truth_msd.size(); ++i) {
    if (!(truth_msd[i] > 0.0) || !(gen_msd[i] > 0.0)) {
      throw std::invalid_argument("accuracy_score: MSD must be positive at lag " +
                                  std::to_string(lag_steps[i]));
    }
    const double log_truth = std::log10(truth_msd[i]);
    if (std::abs(log_truth) < guard) {
      score.excluded_lag_steps.push_back(lag_steps[i]);
      continue;
    }
    sum += std::abs((log_truth - std::log10(gen_msd[i])) / log_truth);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("accuracy_score: every lag is excluded by the guard");
  score.eta_mean = sum / static_cast<double>(used);
  score.accuracy = 1.0 - score.eta_mean;
  return score;
}

AccuracyScore accuracy_score(const MsdCurve& truth, const MsdCurve& generated,
                             const std::array<double, 3>& scale, double guard) {
  if (truth.lag_steps != generated.lag_steps) {
    throw std::invalid_argument("accuracy_score: curves must share one lag grid");
  }
  return accuracy_score(combined_msd(truth, scale), combined_msd(generated, scale),
                        truth.lag_steps, guard);
}

GeneralizationScore generalization_score(const CorrelationMatrix& matrix) {
  if (matrix.rows == 0 || matrix.cols == 0) {
    throw std::invalid_argument("generalization_score: empty matrix");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < matrix.cols; ++j) {
    double best = matrix.at(0, j);
    for (std::size_t i = 1; i < matrix.rows; ++i) best = std::max(best, matrix.at(i, j));
    sum += best;
  }
  GeneralizationScore score;
  score.zeta_mean = sum / static_cast<double>(matrix.cols);
  score.generalization = 1.0 - score.zeta_mean;
  return score;
}

ScoreReport score(std::span<const Trajectory> truth, std::span<const Trajectory> generated) {
  if (truth.empty() || generated.empty()) throw std::invalid_argument("score: empty trajectory set");
  std::size_t n = truth.front().size();
  for (const auto& t : truth) n = std::min(n, t.size());
  for (const auto& t : generated) n = std::min(n, t.size());
  if (n < 2) throw std::invalid_argument("score: trajectories need at least 2 steps");

  ScoreReport report;
  report.truth_msd = ensemble_msd(truth, n - 1);
  report.generated_msd = ensemble_msd(generated, n - 1);
  const auto acc = accuracy_score(report.truth_msd, report.generated_msd, component_variance(truth));
  report.accuracy = acc.accuracy;
  report.eta_mean = acc.eta_mean;
  report.excluded_lag_steps = acc.excluded_lag_steps;
  report.correlation = correlation_matrix(truth, generated);
  const auto gen = generalization_score(report.correlation);
  report.generalization = gen.generalization;
  report.zeta_mean = gen.zeta_mean;
  return report;
}

void write_msd_csv(std::ostream& os, const MsdCurve& msd) {
  os << "lag_s,msd_r,msd_theta,msd_z\n";
  for (std::size_t i = 0; i < msd.size(); ++i) {
    os << format_double(msd.lag_seconds(i)) << ',' << format_double(msd.values[0][i]) << ','
       << format_double(msd.values[1][i]) << ',' << format_double(msd.values[2][i]) << '\n';
  }
}

void write_gamma_csv(std::ostream& os, const GammaCurve& gamma) {
  os << "lag_s,gamma_r,gamma_theta,gamma_z\n";
  for (std::size_t i = 0; i < gamma.lag_steps.size(); ++i) {
    os << format_double(static_cast<double>(gamma.lag_steps[i]) * gamma.dt);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& g = gamma.gamma[c][i];
      os << ',' << (g ? format_double(*g) : std::string("nan"));
    }
    os << '\n';
  }
}

void write_histogram_csv(std::ostream& os, std::span<const VelocityFit> fits) {
  os << "bin_center,density,component\n";
  for (const auto& fit : fits) {
    for (std::size_t b = 0; b < fit.densities.size(); ++b) {
      os << format_double(fit.bin_center(b)) << ',' << format_double(fit.densities[b]) << ','
         << to_string(fit.component) << '\n';
    }
  }
}

void write_velocity_fit_csv(std::ostream& os, std::span<const VelocityFit> fits) {
  os << "component,mean,stddev,residual,degenerate\n";
  for (const auto& fit : fits) {
    os << to_string(fit.component) << ',' << format_double(fit.mean) << ','
       << format_double(fit.stddev) << ',' << format_double(fit.residual) << ','
       << (fit.degenerate ? 1 : 0) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const CorrelationMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    for (std::size_t j = 0; j < matrix.cols; ++j) {
      if (j) os << ',';
      os << format_double(matrix.at(i, j));
    }
    os << '\n';
  }
}

void write_score_csv(std::ostream& os, const ScoreReport& report) {
  os << "accuracy,eta_mean,generalization,zeta_mean\n"
     << format_double(report.accuracy) << ',' << format_double(report.eta_mean) << ','
     << format_double(report.generalization) << ',' << format_double(report.zeta_mean) << '\n';
}

}  // namespace trajgan
