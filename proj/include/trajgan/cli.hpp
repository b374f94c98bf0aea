#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajgan/config.hpp"

namespace trajgan::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitEarlyStopped = 2,
  kExitNonFinite = 3,
  kExitCheckFailed = 4,
};

namespace fs = std::filesystem;

int cmd_synth(const ProjectConfig& cfg, const fs::path& out_path, std::ostream& log);

/// Writes checkpoint_epoch_<N>.txt every cfg.checkpoint_every epochs,
/// checkpoint_final.txt and loss.csv into ckpt_dir.
int cmd_train(const ProjectConfig& cfg, const fs::path& data_path, const fs::path& ckpt_dir,
              std::ostream& log);

int cmd_sample(const ProjectConfig& cfg, const fs::path& ckpt_path, const fs::path& data_path,
               const fs::path& out_path, std::ostream& log);

/// msd.csv, gamma.csv, velocity_hist.csv, velocity_fit.csv, self_correlation.csv
int cmd_analyze(const ProjectConfig& cfg, const fs::path& data_path, const fs::path& out_dir,
                std::ostream& log);

/// Score summary at out_path; the correlation matrix and both MSD curves go
/// next to it as <stem>.matrix.csv, <stem>.msd_truth.csv, <stem>.msd_generated.csv.
int cmd_score(const ProjectConfig& cfg, const fs::path& truth_path, const fs::path& generated_path,
              const fs::path& out_path, std::ostream& log);

int cmd_gradcheck(const ProjectConfig& cfg, bool inject_fault, std::ostream& log);

/// Full argument parsing; args excludes the program name. Errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trajgan::cli
