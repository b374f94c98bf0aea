#include "trajgan/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "trajgan/checkpoint.hpp"

namespace trajgan {

void ProjectConfig::sync() {
  synth.seed = seed;
  train.seed = seed;
  disc.segment_len = train.segment_len;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t to_uint(std::string_view v) {
  std::uint64_t out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_real(std::string_view v) { return parse_double(v); }

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + std::string(v) + "'");
}

struct Entry {
  ConfigKey meta;
  std::function<void(ProjectConfig&, std::string_view)> set;
  std::function<std::string(const ProjectConfig&)> get;
};

template <typename Field>
Entry size_entry(std::string key, std::string doc, Field field) {
  return {{std::move(key), std::move(doc)},
          [field](ProjectConfig& c, std::string_view v) { field(c) = static_cast<std::size_t>(to_uint(v)); },
          [field](const ProjectConfig& c) { return std::to_string(field(const_cast<ProjectConfig&>(c))); }};
}

template <typename Field>
Entry real_entry(std::string key, std::string doc, Field field) {
  return {{std::move(key), std::move(doc)},
          [field](ProjectConfig& c, std::string_view v) { field(c) = to_real(v); },
          [field](const ProjectConfig& c) { return format_double(field(const_cast<ProjectConfig&>(c))); }};
}

std::vector<Entry> build_entries() {
  std::vector<Entry> e;
  e.push_back({{"seed", "root seed for every random stream"},
               [](ProjectConfig& c, std::string_view v) { c.seed = to_uint(v); },
               [](const ProjectConfig& c) { return std::to_string(c.seed); }});

  e.push_back(size_entry("synth.steps", "timesteps per synthetic trajectory",
                         [](ProjectConfig& c) -> std::size_t& { return c.synth.steps; }));
  e.push_back(size_entry("synth.n_traj", "number of synthetic trajectories",
                         [](ProjectConfig& c) -> std::size_t& { return c.synth.n_traj; }));
  e.push_back(real_entry("synth.dt", "sampling interval in seconds (also used to read CSVs)",
                         [](ProjectConfig& c) -> double& { return c.synth.dt; }));
  for (std::size_t comp = 0; comp < 3; ++comp) {
    const std::string name(to_string(kComponents[comp]));
    const std::string unit = comp == 1 ? "rad" : "mm";
    auto dyn = [comp](ProjectConfig& c) -> ComponentDynamics& { return c.synth.dynamics[comp]; };
    e.push_back(real_entry("synth." + name + ".damping", "damping rate of " + name + ", 1/s",
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).damping; }));
    e.push_back(real_entry("synth." + name + ".stiffness",
                           "confinement stiffness of " + name + ", 1/s^2 (0 = free)",
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).stiffness; }));
    e.push_back(real_entry("synth." + name + ".noise", "noise intensity of " + name + ", " + unit + "^2/s^3",
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).noise; }));
    e.push_back(real_entry("synth." + name + ".equilibrium", "equilibrium position of " + name + ", " + unit,
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).equilibrium; }));
    e.push_back(real_entry("synth." + name + ".initial_offset",
                           "offset added to the initial " + name + " position, " + unit,
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).initial_offset; }));
    e.push_back(real_entry("synth." + name + ".initial_velocity",
                           "velocity added to the initial " + name + " velocity, " + unit + "/s",
                           [dyn](ProjectConfig& c) -> double& { return dyn(c).initial_velocity; }));
  }

  e.push_back(size_entry("gen.k", "history length fed to the recurrent cell",
                         [](ProjectConfig& c) -> std::size_t& { return c.gen.k; }));
  e.push_back(size_entry("gen.h1", "width of the first hidden layer",
                         [](ProjectConfig& c) -> std::size_t& { return c.gen.h1; }));
  e.push_back(size_entry("gen.h2", "width of the second hidden layer",
                         [](ProjectConfig& c) -> std::size_t& { return c.gen.h2; }));
  e.push_back({{"gen.phi", "hidden activation: tanh, elu, sigmoid, softplus or identity"},
               [](ProjectConfig& c, std::string_view v) { c.gen.phi = parse_activation(v); },
               [](const ProjectConfig& c) { return std::string(to_string(c.gen.phi)); }});

  for (std::size_t l = 0; l < 3; ++l) {
    const std::string prefix = "disc.conv" + std::to_string(l + 1);
    auto spec = [l](ProjectConfig& c) -> ConvSpec& { return c.disc.layers[l]; };
    e.push_back(size_entry(prefix + ".channels", "output channels of conv layer " + std::to_string(l + 1),
                           [spec](ProjectConfig& c) -> std::size_t& { return spec(c).channels; }));
    e.push_back(size_entry(prefix + ".width", "kernel width of conv layer " + std::to_string(l + 1),
                           [spec](ProjectConfig& c) -> std::size_t& { return spec(c).width; }));
    e.push_back(size_entry(prefix + ".stride", "stride of conv layer " + std::to_string(l + 1),
                           [spec](ProjectConfig& c) -> std::size_t& { return spec(c).stride; }));
  }
  e.push_back(real_entry("disc.dropout", "dropout rate after each conv stage (train mode)",
                         [](ProjectConfig& c) -> double& { return c.disc.dropout_rate; }));

  e.push_back(size_entry("train.epochs", "training epochs",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.epochs; }));
  e.push_back(size_entry("train.inner_steps", "updates per epoch (0 = ceil(segments / minibatch))",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.inner_steps; }));
  e.push_back(size_entry("train.minibatch", "segments per minibatch",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.minibatch_m; }));
  e.push_back(size_entry("train.segment_len", "coordinates per training segment (seed included)",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.segment_len; }));
  e.push_back(real_entry("train.lr_gen", "generator Adam learning rate (0 freezes it)",
                         [](ProjectConfig& c) -> double& { return c.train.gen_adam.lr; }));
  e.push_back(real_entry("train.lr_disc", "discriminator Adam learning rate (0 freezes it)",
                         [](ProjectConfig& c) -> double& { return c.train.disc_adam.lr; }));
  e.push_back({{"train.beta1", "Adam first-moment decay (both networks)"},
               [](ProjectConfig& c, std::string_view v) { c.train.gen_adam.beta1 = c.train.disc_adam.beta1 = to_real(v); },
               [](const ProjectConfig& c) { return format_double(c.train.gen_adam.beta1); }});
  e.push_back({{"train.beta2", "Adam second-moment decay (both networks)"},
               [](ProjectConfig& c, std::string_view v) { c.train.gen_adam.beta2 = c.train.disc_adam.beta2 = to_real(v); },
               [](const ProjectConfig& c) { return format_double(c.train.gen_adam.beta2); }});
  e.push_back({{"train.adam_eps", "Adam epsilon (both networks)"},
               [](ProjectConfig& c, std::string_view v) { c.train.gen_adam.eps = c.train.disc_adam.eps = to_real(v); },
               [](const ProjectConfig& c) { return format_double(c.train.gen_adam.eps); }});
  e.push_back(real_entry("train.clamp_eps", "probabilities are clamped to [eps, 1-eps] before logs",
                         [](ProjectConfig& c) -> double& { return c.train.clamp_eps; }));
  e.push_back({{"train.objective", "generator objective: saturating (log(1-D)) or non_saturating (-log D)"},
               [](ProjectConfig& c, std::string_view v) {
                 if (v == "saturating") c.train.objective = GeneratorObjective::saturating;
                 else if (v == "non_saturating") c.train.objective = GeneratorObjective::non_saturating;
                 else throw std::invalid_argument("expected saturating or non_saturating, got '" + std::string(v) + "'");
               },
               [](const ProjectConfig& c) {
                 return std::string(c.train.objective == GeneratorObjective::saturating ? "saturating" : "non_saturating");
               }});
  e.push_back({{"train.early_stop", "enable the early-stop rule"},
               [](ProjectConfig& c, std::string_view v) { c.train.early_stop.enabled = to_bool(v); },
               [](const ProjectConfig& c) { return std::string(c.train.early_stop.enabled ? "true" : "false"); }});
  e.push_back(size_entry("train.early_stop.min_epochs", "earliest epoch at which early stop may trigger",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.early_stop.min_epochs; }));
  e.push_back(size_entry("train.early_stop.window", "moving-average window in epochs",
                         [](ProjectConfig& c) -> std::size_t& { return c.train.early_stop.window; }));
  e.push_back(real_entry("train.early_stop.loss_tol", "threshold on the window mean of |J_D - 2 log 2|",
                         [](ProjectConfig& c) -> double& { return c.train.early_stop.loss_tolerance; }));
  e.push_back(real_entry("train.early_stop.gap_tol", "threshold on |mean D(real) - mean D(fake)| over the window",
                         [](ProjectConfig& c) -> double& { return c.train.early_stop.gap_tolerance; }));
  e.push_back(size_entry("train.checkpoint_every", "epochs between periodic checkpoints (0 = none)",
                         [](ProjectConfig& c) -> std::size_t& { return c.checkpoint_every; }));

  e.push_back(size_entry("sample.n_traj", "trajectories generated by `sample`",
                         [](ProjectConfig& c) -> std::size_t& { return c.sample.n_traj; }));
  e.push_back(size_entry("sample.iterations", "generator iterations per sampled trajectory",
                         [](ProjectConfig& c) -> std::size_t& { return c.sample.iterations; }));
  e.push_back(size_entry("sample.segment_new", "coordinates generated per iteration",
                         [](ProjectConfig& c) -> std::size_t& { return c.sample.segment_new; }));
  return e;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = build_entries();
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.meta.key == key) return e;
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.meta);
    return out;
  }();
  return keys;
}

void set_config_value(ProjectConfig& cfg, std::string_view key, std::string_view value) {
  const Entry& entry = find_entry(key);
  try {
    entry.set(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + std::string(key) + "': " + e.what());
  }
  cfg.sync();
}

std::string get_config_value(const ProjectConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

ProjectConfig parse_config(std::istream& is, ProjectConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view text(line);
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(base, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.sync();
  return base;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(is);
}

void apply_override(ProjectConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("override '" + std::string(assignment) + "' must look like key=value");
  }
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void write_config(std::ostream& os, const ProjectConfig& cfg) {
  for (const auto& e : entries()) {
    os << "# " << e.meta.doc << '\n' << e.meta.key << " = " << e.get(cfg) << '\n';
  }
}

}  // namespace trajgan
