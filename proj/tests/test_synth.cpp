#include <doctest.h>

#include <cmath>

#include "trajgan/stats.hpp"
#include "trajgan/synth.hpp"

using namespace trajgan;

TEST_SUITE("synth") {

TEST_CASE("default ensemble shape and determinism") {
  const LangevinConfig cfg;
  const auto a = simulate(cfg);
  CHECK(a.size() == 15);
  for (const auto& t : a) CHECK(t.size() == 1100);
  CHECK(simulate(cfg) == a);
  LangevinConfig other = cfg;
  other.seed += 1;
  CHECK(simulate(other) != a);
}

TEST_CASE("zero noise at equilibrium stays put") {
  LangevinConfig cfg;
  for (auto& d : cfg.dynamics) d.noise = 0.0;
  cfg.steps = 200;
  for (const auto& t : simulate(cfg)) {
    for (const auto& p : t.coords) CHECK(p == t.coords.front());
  }
}

TEST_CASE("zero noise free motion decays like the closed form") {
  LangevinConfig cfg;
  cfg.n_traj = 1;
  cfg.steps = 400;
  for (auto& d : cfg.dynamics) {
    d.noise = 0.0;
    d.stiffness = 0.0;
    d.equilibrium = 0.0;
  }
  cfg.dynamics[2].initial_velocity = 10.0;
  const auto t = simulate(cfg).front();
  const double g = cfg.dynamics[2].damping, h = cfg.dt;
  // Euler-Maruyama on v: v_n = v0 (1 - g h)^n, and x follows its partial sums.
  double v = 10.0, x = 0.0;
  for (std::size_t n = 1; n < t.size(); ++n) {
    x += v * h;
    v *= 1.0 - g * h;
    CHECK(t.coords[n].z == doctest::Approx(x).epsilon(1e-12));
  }
  // continuous limit: x_inf = v0 / g
  CHECK(t.coords.back().z == doctest::Approx(10.0 / g).epsilon(0.01));
  CHECK(t.coords.back().r == 0.0);
}

TEST_CASE("stationary variance of confined components") {
  LangevinConfig cfg;
  cfg.steps = 10000;
  const auto trajs = simulate(cfg);
  for (std::size_t c : {std::size_t{0}, std::size_t{2}}) {
    const auto& d = cfg.dynamics[c];
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& t : trajs) {
      for (const auto& p : t.coords) {
        sum += p[c];
        sq += p[c] * p[c];
        n += 1.0;
      }
    }
    const double var = sq / n - (sum / n) * (sum / n);
    CHECK(std::abs(var - d.stationary_position_variance()) / d.stationary_position_variance() < 0.15);
  }
}

TEST_CASE("confined components stay within six stationary deviations") {
  const LangevinConfig cfg;
  for (const auto& t : simulate(cfg)) {
    for (std::size_t c : {std::size_t{0}, std::size_t{2}}) {
      const auto& d = cfg.dynamics[c];
      const double sd = std::sqrt(d.stationary_position_variance());
      for (const auto& p : t.coords) CHECK(std::abs(p[c] - d.equilibrium) < 6.0 * sd);
    }
  }
}

TEST_CASE("default data shows ballistic, diffusive and trapped regimes") {
  const auto trajs = simulate(LangevinConfig{});
  const GammaCurve g = scaling_exponent(ensemble_msd(trajs, 1099));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(*g.gamma[c][0] >= 1.7);
    CHECK(*g.gamma[c][0] <= 2.0);
  }
  for (std::size_t i = 0; i < g.lag_steps.size(); ++i) {
    if (g.lag_steps[i] < 100 || g.lag_steps[i] > 275) continue;
    CHECK(*g.gamma[1][i] >= 0.8);
    CHECK(*g.gamma[1][i] <= 1.2);
    CHECK(*g.gamma[0][i] < 0.3);
    CHECK(*g.gamma[2][i] < 0.3);
  }
}

TEST_CASE("validation") {
  LangevinConfig cfg;
  cfg.dynamics[0].damping = 0.0;
  CHECK_THROWS(simulate(cfg));
  cfg = LangevinConfig{};
  cfg.steps = 1;
  CHECK_THROWS(simulate(cfg));
  cfg = LangevinConfig{};
  cfg.dt = -1.0;
  CHECK_THROWS(simulate(cfg));
}

}  // TEST_SUITE
