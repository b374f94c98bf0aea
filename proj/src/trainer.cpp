#include "trajgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "trajgan/checkpoint.hpp"

namespace trajgan {

NonFiniteLoss::NonFiniteLoss(std::size_t epoch_, std::size_t step_)
    : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch_) + ", step " +
                         std::to_string(step_)),
      epoch(epoch_),
      step(step_) {}

double clamp_probability(double p, double clamp_eps) {
  return std::clamp(p, clamp_eps, 1.0 - clamp_eps);
}

double generator_loss(std::span<const double> d_fake, double clamp_eps) {
  if (d_fake.empty()) throw std::invalid_argument("generator_loss: empty minibatch");
  double sum = 0.0;
  for (double d : d_fake) sum += std::log1p(-clamp_probability(d, clamp_eps));
  return sum / static_cast<double>(d_fake.size());
}

double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake,
                          double clamp_eps) {
  if (d_real.empty() || d_fake.empty()) {
    throw std::invalid_argument("discriminator_loss: empty minibatch");
  }
  double real_term = 0.0;
  for (double d : d_real) real_term += std::log(clamp_probability(d, clamp_eps));
  double fake_term = 0.0;
  for (double d : d_fake) fake_term += std::log1p(-clamp_probability(d, clamp_eps));
  return -real_term / static_cast<double>(d_real.size()) -
         fake_term / static_cast<double>(d_fake.size());
}

std::vector<std::vector<Coordinate>> sample_minibatch(std::span<const Trajectory> dataset,
                                                      std::size_t m, std::size_t segment_len,
                                                      Rng& rng) {
  if (dataset.empty()) throw std::invalid_argument("sample_minibatch: empty dataset");
  if (m == 0 || segment_len == 0) {
    throw std::invalid_argument("sample_minibatch: m and segment length must be positive");
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].size() < segment_len) {
      throw std::invalid_argument("sample_minibatch: segment length " + std::to_string(segment_len) +
                                  " exceeds trajectory " + std::to_string(i) + " of length " +
                                  std::to_string(dataset[i].size()));
    }
  }
  std::uniform_int_distribution<std::size_t> pick_traj(0, dataset.size() - 1);
  std::vector<std::vector<Coordinate>> batch;
  batch.reserve(m);
  for (std::size_t b = 0; b < m; ++b) {
    const auto& coords = dataset[pick_traj(rng)].coords;
    std::uniform_int_distribution<std::size_t> pick_offset(0, coords.size() - segment_len);
    const auto first = coords.begin() + static_cast<std::ptrdiff_t>(pick_offset(rng));
    batch.emplace_back(first, first + static_cast<std::ptrdiff_t>(segment_len));
  }
  return batch;
}

namespace {

// d/dD of the per-sample generator objective; zero where the clamp is active.
double generator_loss_slope(double d, const TrainConfig& cfg) {
  if (d <= cfg.clamp_eps || d >= 1.0 - cfg.clamp_eps) return 0.0;
  return cfg.objective == GeneratorObjective::saturating ? -1.0 / (1.0 - d) : -1.0 / d;
}

double generator_objective_value(std::span<const double> d_fake, const TrainConfig& cfg) {
  if (cfg.objective == GeneratorObjective::saturating) return generator_loss(d_fake, cfg.clamp_eps);
  double sum = 0.0;
  for (double d : d_fake) sum -= std::log(clamp_probability(d, cfg.clamp_eps));
  return sum / static_cast<double>(d_fake.size());
}

bool inside_clamp(double d, double eps) { return d > eps && d < 1.0 - eps; }

}  // namespace

StepLosses adversarial_gradients(GeneratorParams& gen, DiscriminatorParams& disc,
                                 std::span<const std::vector<Coordinate>> real_segments,
                                 std::span<const std::vector<Noise>> noise, Rng& dropout_rng,
                                 const TrainConfig& cfg, bool want_gen_grads,
                                 bool want_disc_grads) {
  const std::size_t m = real_segments.size();
  const std::size_t k = gen.config.k;
  if (m == 0 || noise.size() != m) {
    throw std::invalid_argument("adversarial_gradients: need one noise sequence per real segment");
  }

  std::vector<SegmentTrace> gen_traces(m);
  std::vector<DiscriminatorTrace> real_traces(m), fake_traces(m);
  std::vector<double> d_real(m), d_fake(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& real = real_segments[i];
    if (real.size() != cfg.segment_len || real.size() <= k) {
      throw std::invalid_argument("adversarial_gradients: real segment has wrong length");
    }
    const Trajectory fake = generate_segment(gen, std::span(real).first(k), noise[i], &gen_traces[i]);
    d_real[i] = discriminate(disc, real, Mode::train, dropout_rng, &real_traces[i]);
    d_fake[i] = discriminate(disc, fake.coords, Mode::train, dropout_rng, &fake_traces[i]);
  }

  StepLosses losses;
  losses.JG = generator_objective_value(d_fake, cfg);
  losses.JD = discriminator_loss(d_real, d_fake, cfg.clamp_eps);
  for (std::size_t i = 0; i < m; ++i) {
    losses.mean_D_real += d_real[i] / static_cast<double>(m);
    losses.mean_D_fake += d_fake[i] / static_cast<double>(m);
  }

  const double inv_m = 1.0 / static_cast<double>(m);
  if (want_gen_grads) {
    for (std::size_t i = 0; i < m; ++i) {
      const double slope = generator_loss_slope(d_fake[i], cfg) * inv_m;
      if (slope == 0.0) continue;
      const auto grad_fake = discriminate_backward(disc, fake_traces[i], slope, ParamGrads::skip);
      generate_segment_backward(gen, gen_traces[i], grad_fake);
    }
  }
  if (want_disc_grads) {
    // The fake segments are treated as constants here: no generator gradient flows.
    for (std::size_t i = 0; i < m; ++i) {
      if (inside_clamp(d_real[i], cfg.clamp_eps)) {
        discriminate_backward(disc, real_traces[i], -inv_m / d_real[i], ParamGrads::accumulate);
      }
      if (inside_clamp(d_fake[i], cfg.clamp_eps)) {
        discriminate_backward(disc, fake_traces[i], inv_m / (1.0 - d_fake[i]), ParamGrads::accumulate);
      }
    }
  }
  return losses;
}

namespace {

bool all_finite(const StepLosses& l) {
  return std::isfinite(l.JG) && std::isfinite(l.JD) && std::isfinite(l.mean_D_real) &&
         std::isfinite(l.mean_D_fake);
}

bool should_stop_early(const std::vector<LossRecord>& history, const EarlyStopConfig& es) {
  if (!es.enabled || es.window == 0) return false;
  if (history.size() < std::max(es.min_epochs, es.window)) return false;
  double loss_dev = 0.0, real = 0.0, fake = 0.0;
  for (auto it = history.end() - static_cast<std::ptrdiff_t>(es.window); it != history.end(); ++it) {
    loss_dev += std::abs(it->mean_JD - 2.0 * std::numbers::ln2);
    real += it->mean_D_real;
    fake += it->mean_D_fake;
  }
  const double n = static_cast<double>(es.window);
  return loss_dev / n < es.loss_tolerance && std::abs(real - fake) / n < es.gap_tolerance;
}

}  // namespace

std::size_t default_inner_steps(std::span<const Trajectory> dataset, std::size_t L, std::size_t m) {
  if (L == 0 || m == 0) throw std::invalid_argument("default_inner_steps: L and m must be positive");
  std::size_t segments = 0;
  for (const auto& t : dataset) segments += t.size() > 0 ? (t.size() - 1) / L : 0;
  return std::max<std::size_t>(1, (segments + m - 1) / m);
}

TrainResult train(std::span<const Trajectory> dataset, GeneratorParams& gen,
                  DiscriminatorParams& disc, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (cfg.minibatch_m == 0) throw std::invalid_argument("train: minibatch_m must be >= 1");
  if (!(cfg.clamp_eps > 0.0 && cfg.clamp_eps < 0.5)) {
    throw std::invalid_argument("train: clamp_eps must lie in (0, 0.5)");
  }
  if (disc.config.segment_len != cfg.segment_len) {
    throw std::invalid_argument("train: discriminator segment length does not match config");
  }
  if (cfg.segment_len <= gen.config.k) {
    throw std::invalid_argument("train: segment length must exceed the history length k");
  }
  for (const auto& t : dataset) {
    if (t.size() < cfg.segment_len) {
      throw std::invalid_argument("train: every trajectory must hold at least one segment");
    }
  }
  const std::size_t inner_steps =
      cfg.inner_steps ? cfg.inner_steps : default_inner_steps(dataset, cfg.segment_len, cfg.minibatch_m);
  const std::size_t n_new = cfg.segment_len - gen.config.k;

  Rng batch_rng = make_stream(cfg.seed, "minibatch");
  Rng noise_rng = make_stream(cfg.seed, "noise");
  Rng dropout_rng = make_stream(cfg.seed, "dropout");
  std::normal_distribution<double> gauss(0.0, 1.0);

  const bool train_gen = cfg.gen_adam.lr > 0.0;
  const bool train_disc = cfg.disc_adam.lr > 0.0;

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossRecord record;
    record.epoch = epoch;
    for (std::size_t step = 0; step < inner_steps; ++step) {
      const auto batch = sample_minibatch(dataset, cfg.minibatch_m, cfg.segment_len, batch_rng);
      std::vector<std::vector<Noise>> noise(batch.size(), std::vector<Noise>(n_new));
      for (auto& seq : noise) {
        for (auto& n : seq) {
          for (double& v : n) v = gauss(noise_rng);
        }
      }
      for (Parameter* p : gen.parameters()) p->zero_grad();
      for (Parameter* p : disc.parameters()) p->zero_grad();

      const StepLosses losses = adversarial_gradients(gen, disc, batch, noise, dropout_rng, cfg,
                                                      train_gen, train_disc);
      if (!all_finite(losses)) throw NonFiniteLoss(epoch, step);

      if (train_gen) {
        for (Parameter* p : gen.parameters()) adam_step(*p, cfg.gen_adam);
      }
      if (train_disc) {
        for (Parameter* p : disc.parameters()) adam_step(*p, cfg.disc_adam);
      }
      for (const Parameter* p : gen.parameters()) {
        if (!p->value.all_finite()) throw NonFiniteLoss(epoch, step);
      }
      for (const Parameter* p : disc.parameters()) {
        if (!p->value.all_finite()) throw NonFiniteLoss(epoch, step);
      }

      const double inv = 1.0 / static_cast<double>(inner_steps);
      record.mean_JG += losses.JG * inv;
      record.mean_JD += losses.JD * inv;
      record.mean_D_real += losses.mean_D_real * inv;
      record.mean_D_fake += losses.mean_D_fake * inv;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record, gen, disc);
    if (should_stop_early(result.history, cfg.early_stop)) {
      result.outcome = TrainOutcome::early_stopped;
      break;
    }
  }
  return result;
}

void write_loss_csv_header(std::ostream& os) {
  os << "epoch,mean_JG,mean_JD,mean_D_real,mean_D_fake\n";
}

void write_loss_csv_row(std::ostream& os, const LossRecord& r) {
  os << r.epoch << ',' << format_double(r.mean_JG) << ',' << format_double(r.mean_JD) << ','
     << format_double(r.mean_D_real) << ',' << format_double(r.mean_D_fake) << '\n';
}

}  // namespace trajgan
