#include "trajgan/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "trajgan/checkpoint.hpp"

namespace trajgan {

std::string_view to_string(Component c) {
  switch (c) {
    case Component::r: return "r";
    case Component::theta: return "theta";
    case Component::z: return "z";
  }
  return "?";
}

std::vector<double> Trajectory::component(Component c) const {
  std::vector<double> out;
  out.reserve(coords.size());
  for (const auto& p : coords) out.push_back(p[c]);
  return out;
}

NormStats compute_norm_stats(std::span<const Trajectory> trajs) {
  NormStats stats;
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : trajs) {
      for (const auto& p : t.coords) {
        sum += p[c];
        ++n;
      }
    }
    if (n == 0) throw std::invalid_argument("compute_norm_stats: no coordinates");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& t : trajs) {
      for (const auto& p : t.coords) ss += (p[c] - mean) * (p[c] - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw std::invalid_argument("compute_norm_stats: component " +
                                  std::string(to_string(kComponents[c])) +
                                  " has zero spread; cannot standardize");
    }
    stats.mean[c] = mean;
    stats.stddev[c] = sd;
  }
  return stats;
}

void write_trajectories_csv(std::ostream& os, std::span<const Trajectory> trajs) {
  os << "traj_id,step,r_mm,theta_rad,z_mm\n";
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const auto& coords = trajs[id].coords;
    for (std::size_t step = 0; step < coords.size(); ++step) {
      const auto& p = coords[step];
      os << id << ',' << step << ',' << format_double(p.r) << ',' << format_double(p.theta) << ','
         << format_double(p.z) << '\n';
    }
  }
}

namespace {

[[noreturn]] void csv_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("trajectory CSV line " + std::to_string(line_no) + ": " + what);
}

long long parse_int(std::string_view text, std::size_t line_no) {
  long long v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    csv_error(line_no, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<Trajectory> read_trajectories_csv(std::istream& is, double dt) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "traj_id,step,r_mm,theta_rad,z_mm") {
    csv_error(1, "unexpected header '" + line + "'");
  }

  std::vector<Trajectory> trajs;
  std::map<long long, std::size_t> index_of;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) {
      csv_error(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    const long long id = parse_int(fields[0], line_no);
    const long long step = parse_int(fields[1], line_no);
    Coordinate p;
    try {
      p.r = parse_double(fields[2]);
      p.theta = parse_double(fields[3]);
      p.z = parse_double(fields[4]);
    } catch (const std::invalid_argument& e) {
      csv_error(line_no, e.what());
    }
    if (!std::isfinite(p.r) || !std::isfinite(p.theta) || !std::isfinite(p.z)) {
      csv_error(line_no, "non-finite coordinate");
    }

    auto [it, inserted] = index_of.try_emplace(id, trajs.size());
    if (inserted) trajs.push_back(Trajectory{{}, dt});
    auto& traj = trajs[it->second];
    if (step != static_cast<long long>(traj.coords.size())) {
      csv_error(line_no, "traj " + std::to_string(id) + " expected step " +
                             std::to_string(traj.coords.size()) + ", got " + std::to_string(step));
    }
    traj.coords.push_back(p);
  }
  return trajs;
}

void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_trajectories_csv(os, trajs);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path, double dt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open trajectory file " + path.string());
  return read_trajectories_csv(is, dt);
}

}  // namespace trajgan
