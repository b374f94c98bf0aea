#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trajgan/discriminator.hpp"
#include "trajgan/generator.hpp"
#include "trajgan/synth.hpp"
#include "trajgan/trainer.hpp"

namespace trajgan {

struct SampleConfig {
  std::size_t n_traj = 15;
  std::size_t iterations = 11;
  std::size_t segment_new = 100;
};

/// Everything a pipeline run needs. `seed` is the root of every random stream.
struct ProjectConfig {
  std::uint64_t seed = 20190101;
  LangevinConfig synth;
  GeneratorConfig gen;
  DiscriminatorConfig disc;
  TrainConfig train;
  SampleConfig sample;
  std::size_t checkpoint_every = 500;  // epochs; 0 disables periodic checkpoints

  /// Propagates the root seed and shared sizes into the per-module configs.
  void sync();
};

struct ConfigKey {
  std::string key;
  std::string doc;
};

/// Every accepted key with its one-line description.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from its textual value; unknown keys and bad values throw.
void set_config_value(ProjectConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const ProjectConfig& cfg, std::string_view key);

/// Parses `key = value` lines; `#` starts a comment. Errors name the line.
ProjectConfig parse_config(std::istream& is, ProjectConfig base = {});
ProjectConfig load_config(const std::filesystem::path& path);
/// Applies a `key=value` override.
void apply_override(ProjectConfig& cfg, std::string_view assignment);

/// Writes every key with its current value and description, in parseable form.
void write_config(std::ostream& os, const ProjectConfig& cfg);

}  // namespace trajgan
