#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "trajgan/adam.hpp"
#include "trajgan/discriminator.hpp"
#include "trajgan/generator.hpp"
#include "trajgan/rng.hpp"
#include "trajgan/trajectory.hpp"

namespace trajgan {

enum class GeneratorObjective {
  saturating,      // minimize log(1 - D(G))
  non_saturating,  // minimize -log D(G)
};

struct EarlyStopConfig {
  bool enabled = true;
  std::size_t min_epochs = 200;
  std::size_t window = 50;
  double loss_tolerance = 0.05;  // moving average of |J_D - 2 log 2|
  double gap_tolerance = 0.1;    // |mean D(real) - mean D(fake)| over the window
};

struct TrainConfig {
  std::size_t epochs = 5000;
  std::size_t inner_steps = 0;  // 0: default_inner_steps()
  std::size_t minibatch_m = 15;
  AdamConfig gen_adam;          // lr 0 freezes the generator
  AdamConfig disc_adam;         // lr 0 freezes the discriminator
  double clamp_eps = 1e-7;
  EarlyStopConfig early_stop;
  GeneratorObjective objective = GeneratorObjective::saturating;
  std::uint64_t seed = 20190101;
  std::size_t segment_len = 100;
};

struct LossRecord {
  std::size_t epoch = 0;
  double mean_JG = 0.0;
  double mean_JD = 0.0;
  double mean_D_real = 0.0;
  double mean_D_fake = 0.0;
};

enum class TrainOutcome { completed, early_stopped };

struct TrainResult {
  TrainOutcome outcome = TrainOutcome::completed;
  std::vector<LossRecord> history;
};

/// Raised when a loss or probability becomes non-finite; training stops at that point.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t epoch, std::size_t step);
  std::size_t epoch;
  std::size_t step;
};

double clamp_probability(double p, double clamp_eps);

/// Mean of log(1 - D) over clamped fake probabilities.
double generator_loss(std::span<const double> d_fake, double clamp_eps = 1e-7);
/// -mean(log D_real) - mean(log(1 - D_fake)) over clamped probabilities.
double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake,
                          double clamp_eps = 1e-7);

/// m contiguous windows of length L, each from a uniformly chosen trajectory at a
/// uniformly chosen admissible offset.
std::vector<std::vector<Coordinate>> sample_minibatch(std::span<const Trajectory> dataset,
                                                      std::size_t m, std::size_t segment_len,
                                                      Rng& rng);

/// One adversarial update on a fixed minibatch with fixed noise and dropout
/// streams. Exposed for gradient checks: fills generator and discriminator
/// gradients without stepping.
struct StepLosses {
  double JG = 0.0;
  double JD = 0.0;
  double mean_D_real = 0.0;
  double mean_D_fake = 0.0;
};
StepLosses adversarial_gradients(GeneratorParams& gen, DiscriminatorParams& disc,
                                 std::span<const std::vector<Coordinate>> real_segments,
                                 std::span<const std::vector<Noise>> noise, Rng& dropout_rng,
                                 const TrainConfig& cfg, bool want_gen_grads, bool want_disc_grads);

/// ceil(segments / m), counting floor((N - 1) / L) segments per trajectory:
/// 15 trajectories of 1100 steps at L = 100, m = 15 give 10.
std::size_t default_inner_steps(std::span<const Trajectory> dataset, std::size_t L, std::size_t m);

using EpochCallback = std::function<void(const LossRecord&, const GeneratorParams&,
                                         const DiscriminatorParams&)>;

/// Adversarial training loop. Parameters are updated in place.
TrainResult train(std::span<const Trajectory> dataset, GeneratorParams& gen,
                  DiscriminatorParams& disc, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

void write_loss_csv_header(std::ostream& os);
void write_loss_csv_row(std::ostream& os, const LossRecord& record);

}  // namespace trajgan
