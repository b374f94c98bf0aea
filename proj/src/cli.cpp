#include "trajgan/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "trajgan/checkpoint.hpp"
#include "trajgan/gradcheck_suite.hpp"
#include "trajgan/rng.hpp"
#include "trajgan/stats.hpp"

namespace trajgan::cli {

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(17);
  return os;
}

void print_summary(std::ostream& log, std::span<const Trajectory> trajs) {
  log << trajs.size() << " trajectories, " << (trajs.empty() ? 0 : trajs.front().size())
      << " steps each\n";
  for (auto c : kComponents) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& t : trajs) {
      for (const auto& p : t.coords) {
        sum += p[c];
        sq += p[c] * p[c];
        n += 1.0;
      }
    }
    if (n == 0.0) continue;
    const double mean = sum / n;
    log << "  " << to_string(c) << ": mean " << mean << ", std "
        << std::sqrt(std::max(0.0, sq / n - mean * mean)) << '\n';
  }
}

void require_equal_lengths(std::span<const Trajectory> trajs, const fs::path& path) {
  if (trajs.empty()) throw std::runtime_error(path.string() + ": no trajectories");
  for (std::size_t i = 1; i < trajs.size(); ++i) {
    if (trajs[i].size() != trajs[0].size()) {
      throw std::runtime_error(path.string() + ": trajectory " + std::to_string(i) + " has " +
                               std::to_string(trajs[i].size()) + " steps, expected " +
                               std::to_string(trajs[0].size()));
    }
  }
}

void save_state(const fs::path& path, const GeneratorParams& gen, const DiscriminatorParams& disc,
                std::size_t epochs_done) {
  Checkpoint ckpt;
  gen.save(ckpt);
  disc.save(ckpt);
  Tensor epochs({1});
  epochs[0] = static_cast<double>(epochs_done);
  ckpt.add("train.epochs_done", epochs);
  save_checkpoint(path, ckpt);
}

fs::path sibling(const fs::path& out_path, const std::string& suffix) {
  fs::path p = out_path;
  p.replace_filename(out_path.stem().string() + suffix);
  return p;
}

}  // namespace

int cmd_synth(const ProjectConfig& cfg, const fs::path& out_path, std::ostream& log) {
  const auto trajs = simulate(cfg.synth);
  save_trajectories(out_path, trajs);
  print_summary(log, trajs);
  return kExitOk;
}

int cmd_train(const ProjectConfig& cfg, const fs::path& data_path, const fs::path& ckpt_dir,
              std::ostream& log) {
  const auto data = load_trajectories(data_path, cfg.synth.dt);
  const std::size_t L = cfg.train.segment_len;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() < L) {
      throw std::runtime_error(data_path.string() + ": trajectory " + std::to_string(i) +
                               " is shorter than the segment length " + std::to_string(L));
    }
  }
  if (data.empty()) throw std::runtime_error(data_path.string() + ": no trajectories");
  if (cfg.gen.k >= L) throw std::runtime_error("gen.k must be smaller than train.segment_len");

  const NormStats norm = compute_norm_stats(data);
  Rng init = make_stream(cfg.seed, "init");
  GeneratorParams gen = GeneratorParams::initialized(cfg.gen, norm, init, increment_scale(data, norm));
  DiscriminatorParams disc = DiscriminatorParams::initialized(cfg.disc, norm, init);

  fs::create_directories(ckpt_dir);
  std::ofstream loss = open_output(ckpt_dir / "loss.csv");
  write_loss_csv_header(loss);

  auto on_epoch = [&](const LossRecord& rec, const GeneratorParams& g, const DiscriminatorParams& d) {
    write_loss_csv_row(loss, rec);
    const std::size_t done = rec.epoch + 1;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
      save_state(ckpt_dir / ("checkpoint_epoch_" + std::to_string(done) + ".txt"), g, d, done);
      log << "epoch " << done << ": J_G " << rec.mean_JG << ", J_D " << rec.mean_JD << ", D(real) "
          << rec.mean_D_real << ", D(fake) " << rec.mean_D_fake << '\n';
    }
  };

  std::size_t epochs_done = 0;
  try {
    const TrainResult result = train(data, gen, disc, cfg.train, on_epoch);
    epochs_done = result.history.size();
    loss.flush();
    save_state(ckpt_dir / "checkpoint_final.txt", gen, disc, epochs_done);
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      log << "final epoch " << last.epoch + 1 << ": D(real) " << last.mean_D_real << ", D(fake) "
          << last.mean_D_fake << '\n';
    }
    if (result.outcome == TrainOutcome::early_stopped) {
      log << "early stop after " << epochs_done << " epochs\n";
      return kExitEarlyStopped;
    }
    log << "completed " << epochs_done << " epochs\n";
    return kExitOk;
  } catch (const NonFiniteLoss& e) {
    loss.flush();
    log << "aborted: " << e.what() << '\n';
    return kExitNonFinite;
  }
}

int cmd_sample(const ProjectConfig& cfg, const fs::path& ckpt_path, const fs::path& data_path,
               const fs::path& out_path, std::ostream& log) {
  const GeneratorParams gen = GeneratorParams::load(load_checkpoint(ckpt_path));
  const auto data = load_trajectories(data_path, cfg.synth.dt);
  if (data.empty()) throw std::runtime_error(data_path.string() + ": no trajectories");
  const std::size_t k = gen.config.k;
  std::vector<Trajectory> out;
  out.reserve(cfg.sample.n_traj);
  for (std::size_t j = 0; j < cfg.sample.n_traj; ++j) {
    const Trajectory& source = data[j % data.size()];
    if (source.size() < k) {
      throw std::runtime_error("seed trajectory " + std::to_string(j % data.size()) + " has " +
                               std::to_string(source.size()) + " steps, need at least k = " +
                               std::to_string(k));
    }
    Rng rng = make_stream(cfg.seed, "sample", j);
    Trajectory t = extend_trajectory(gen, std::span(source.coords).first(k), cfg.sample.iterations,
                                     cfg.sample.segment_new, rng, source.dt);
    t.coords.erase(t.coords.begin(), t.coords.begin() + static_cast<std::ptrdiff_t>(k));
    out.push_back(std::move(t));
  }
  save_trajectories(out_path, out);
  print_summary(log, out);
  return kExitOk;
}

int cmd_analyze(const ProjectConfig&, const fs::path& data_path, const fs::path& out_dir,
                std::ostream& log) {
  const double dt = kUnitInterval;
  const auto data = load_trajectories(data_path, dt);
  require_equal_lengths(data, data_path);
  fs::create_directories(out_dir);
  const std::size_t max_lag = data.front().size() - 1;

  const MsdCurve msd = ensemble_msd(data, max_lag);
  {
    auto os = open_output(out_dir / "msd.csv");
    write_msd_csv(os, msd);
  }
  {
    auto os = open_output(out_dir / "gamma.csv");
    write_gamma_csv(os, scaling_exponent(msd));
  }

  std::vector<VelocityFit> fits;
  for (auto c : kComponents) {
    fits.push_back(velocity_distribution(data, c));
    if (fits.back().degenerate) {
      log << "velocity fit for " << to_string(c) << " skipped: all velocities identical\n";
    }
  }
  {
    auto os = open_output(out_dir / "velocity_hist.csv");
    write_histogram_csv(os, fits);
  }
  {
    auto os = open_output(out_dir / "velocity_fit.csv");
    write_velocity_fit_csv(os, fits);
  }
  try {
    const CorrelationMatrix m = correlation_matrix(data, data);
    auto os = open_output(out_dir / "self_correlation.csv");
    write_matrix_csv(os, m);
  } catch (const std::exception& e) {
    log << "self-correlation skipped: " << e.what() << '\n';
  }
  print_summary(log, data);
  return kExitOk;
}

int cmd_score(const ProjectConfig&, const fs::path& truth_path, const fs::path& generated_path,
              const fs::path& out_path, std::ostream& log) {
  const auto truth = load_trajectories(truth_path, kUnitInterval);
  const auto generated = load_trajectories(generated_path, kUnitInterval);
  require_equal_lengths(truth, truth_path);
  require_equal_lengths(generated, generated_path);
  const ScoreReport report = score(truth, generated);
  {
    auto os = open_output(out_path);
    write_score_csv(os, report);
  }
  {
    auto os = open_output(sibling(out_path, ".matrix.csv"));
    write_matrix_csv(os, report.correlation);
  }
  {
    auto os = open_output(sibling(out_path, ".msd_truth.csv"));
    write_msd_csv(os, report.truth_msd);
  }
  {
    auto os = open_output(sibling(out_path, ".msd_generated.csv"));
    write_msd_csv(os, report.generated_msd);
  }
  log << "accuracy " << report.accuracy << " (mean eta " << report.eta_mean << ", "
      << report.excluded_lag_steps.size() << " lags excluded)\n"
      << "generalization " << report.generalization << " (mean zeta " << report.zeta_mean << ")\n";
  return kExitOk;
}

int cmd_gradcheck(const ProjectConfig& cfg, bool inject_fault, std::ostream& log) {
  const auto entries = run_gradcheck_suite(cfg.seed, inject_fault);
  bool ok = true;
  for (const auto& e : entries) {
    log << std::left << std::setw(32) << e.name << std::scientific << std::setprecision(3)
        << e.result.max_rel_error << std::defaultfloat;
    if (!e.passed()) {
      ok = false;
      log << "  FAIL at " << e.result.worst_parameter << '[' << e.result.worst_index
          << "] analytic " << e.result.analytic << " numeric " << e.result.numeric;
    }
    log << '\n';
  }
  log << (ok ? "all gradient checks passed" : "gradient check FAILED") << " (threshold "
      << kGradCheckTolerance << ")\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"trajgan: synthesize, train, sample, analyze and score 3D trajectories"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "config file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed; overrides the config");
  app.add_option("--set", overrides, "key=value override, repeatable; wins over the config file");
  app.fallthrough();

  std::string out_path, data_path, ckpt_path, truth_path, generated_path;
  std::optional<std::size_t> n_traj, iterations;
  bool inject_fault = false;

  auto* synth = app.add_subcommand("synth", "simulate a ground-truth ensemble");
  synth->add_option("--out", out_path, "trajectory CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "adversarial training");
  train_cmd->add_option("--data", data_path, "trajectory CSV")->required();
  train_cmd->add_option("--out", out_path, "checkpoint directory")->required();

  auto* sample = app.add_subcommand("sample", "generate trajectories from a checkpoint");
  sample->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  sample->add_option("--data", data_path, "trajectory CSV supplying seeds")->required();
  sample->add_option("--n-traj", n_traj, "trajectories to generate");
  sample->add_option("--iterations", iterations, "segments per trajectory");
  sample->add_option("--out", out_path, "trajectory CSV")->required();

  auto* analyze = app.add_subcommand("analyze", "MSD, scaling exponent, velocity and correlation files");
  analyze->add_option("--data", data_path, "trajectory CSV")->required();
  analyze->add_option("--out", out_path, "output directory")->required();

  auto* score_cmd = app.add_subcommand("score", "accuracy and generalization scores");
  score_cmd->add_option("--truth", truth_path, "ground-truth CSV")->required();
  score_cmd->add_option("--generated", generated_path, "generated CSV")->required();
  score_cmd->add_option("--out", out_path, "score CSV")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every backward pass");
  gradcheck->add_flag("--inject-fault", inject_fault, "corrupt one analytic gradient (self-test)");

  auto* defaults = app.add_subcommand("defaults", "print the effective config");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    ProjectConfig cfg = config_path.empty() ? ProjectConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) cfg.seed = *seed;
    if (n_traj) cfg.sample.n_traj = *n_traj;
    if (iterations) cfg.sample.iterations = *iterations;
    cfg.sync();

    if (*synth) return cmd_synth(cfg, out_path, out);
    if (*train_cmd) return cmd_train(cfg, data_path, out_path, out);
    if (*sample) return cmd_sample(cfg, ckpt_path, data_path, out_path, out);
    if (*analyze) return cmd_analyze(cfg, data_path, out_path, out);
    if (*score_cmd) return cmd_score(cfg, truth_path, generated_path, out_path, out);
    if (*gradcheck) return cmd_gradcheck(cfg, inject_fault, out);
    if (*defaults) {
      write_config(out, cfg);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace trajgan::cli
