#include <doctest.h>

#include "helpers.hpp"
#include "trajgan/discriminator.hpp"
#include "trajgan/gradcheck.hpp"

using namespace trajgan;

namespace {

std::vector<Coordinate> segment(std::size_t n, Rng& rng) {
  return testutil::random_walk(n, rng, 0.3).coords;
}

}  // namespace

TEST_SUITE("discriminator") {

TEST_CASE("default topology gives feature lengths 48, 22, 10 at L = 100") {
  DiscriminatorConfig cfg;
  CHECK(cfg.dropout_rate == 0.5);
  const auto lens = feature_lengths(cfg);
  CHECK(lens[0] == 48);
  CHECK(lens[1] == 22);
  CHECK(lens[2] == 10);
  cfg.segment_len = 10;
  CHECK_THROWS(feature_lengths(cfg));
}

TEST_CASE("all-zero weights give exactly one half") {
  const auto disc = DiscriminatorParams::zeros(DiscriminatorConfig{}, NormStats{});
  Rng rng = make_stream(1, "t");
  for (int trial = 0; trial < 5; ++trial) {
    CHECK(discriminate(disc, segment(100, rng), Mode::train, rng) == 0.5);
  }
}

TEST_CASE("eval mode is deterministic and outputs lie strictly inside (0, 1)") {
  Rng rng = make_stream(2, "t");
  const auto disc = DiscriminatorParams::initialized(DiscriminatorConfig{}, NormStats{}, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = segment(100, rng);
    const double a = discriminate(disc, s, Mode::eval, rng);
    const double b = discriminate(disc, s, Mode::eval, rng);
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
  }
}

TEST_CASE("wrong segment length is rejected") {
  Rng rng = make_stream(3, "t");
  const auto disc = DiscriminatorParams::initialized(DiscriminatorConfig{}, NormStats{}, rng);
  CHECK_THROWS(discriminate(disc, segment(99, rng), Mode::eval, rng));
}

TEST_CASE("segments are scored independently") {
  Rng rng = make_stream(4, "t");
  const auto disc = DiscriminatorParams::initialized(DiscriminatorConfig{}, NormStats{}, rng);
  const auto a = segment(100, rng), b = segment(100, rng);
  Rng d1 = make_stream(5, "dropout"), d2 = make_stream(5, "dropout");
  const double pa = discriminate(disc, a, Mode::eval, d1);
  const double pb = discriminate(disc, b, Mode::eval, d1);
  CHECK(discriminate(disc, b, Mode::eval, d2) == pb);
  CHECK(discriminate(disc, a, Mode::eval, d2) == pa);
}

TEST_CASE("log D gradients w.r.t. parameters and input at a small scale") {
  DiscriminatorConfig cfg;
  cfg.segment_len = 12;
  cfg.layers = {{{4, 3, 1}, {4, 3, 1}, {4, 3, 2}}};
  Rng rng = make_stream(6, "t");
  NormStats norm;
  norm.mean = {1.0, 2.0, 3.0};
  norm.stddev = {0.5, 0.7, 2.0};
  auto disc = DiscriminatorParams::initialized(cfg, norm, rng);
  Parameter input("segment", testutil::random_tensor({12, 3}, rng));
  auto coords = [&] {
    std::vector<Coordinate> s(12);
    for (std::size_t t = 0; t < 12; ++t) {
      for (std::size_t c = 0; c < 3; ++c) s[t][c] = input.value.at(t, c);
    }
    return s;
  };
  for (bool wrt_input : {false, true}) {
    auto f = [&] {
      Rng drop = make_stream(7, "dropout");
      return std::log(discriminate(disc, coords(), Mode::train, drop));
    };
    auto back = [&] {
      Rng drop = make_stream(7, "dropout");
      DiscriminatorTrace trace;
      const double d = discriminate(disc, coords(), Mode::train, drop, &trace);
      const auto g = discriminate_backward(disc, trace, 1.0 / d,
                                           wrt_input ? ParamGrads::skip : ParamGrads::accumulate);
      for (std::size_t t = 0; t < 12; ++t) {
        for (std::size_t c = 0; c < 3; ++c) input.grad.at(t, c) = g[t][c];
      }
    };
    if (wrt_input) {
      CHECK(grad_check(f, back, std::vector<Parameter*>{&input}).max_rel_error < 1e-4);
    } else {
      CHECK(grad_check(f, back, disc.parameters()).max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("skip mode leaves parameter gradients untouched") {
  Rng rng = make_stream(8, "t");
  auto disc = DiscriminatorParams::initialized(DiscriminatorConfig{}, NormStats{}, rng);
  for (auto* p : disc.parameters()) p->zero_grad();
  DiscriminatorTrace trace;
  discriminate(disc, segment(100, rng), Mode::train, rng, &trace);
  discriminate_backward(disc, trace, 1.0, ParamGrads::skip);
  for (auto* p : disc.parameters()) {
    for (double g : p->grad.data()) CHECK(g == 0.0);
  }
}

TEST_CASE("save and load round-trip") {
  Rng rng = make_stream(9, "t");
  DiscriminatorConfig cfg;
  cfg.segment_len = 50;
  cfg.layers = {{{8, 5, 2}, {16, 5, 2}, {16, 3, 2}}};
  cfg.dropout_rate = 0.25;
  const auto disc = DiscriminatorParams::initialized(cfg, NormStats{}, rng);
  Checkpoint ckpt;
  disc.save(ckpt);
  const auto back = DiscriminatorParams::load(ckpt);
  CHECK(back.config.segment_len == 50);
  CHECK(back.config.layers[2].channels == 16);
  CHECK(back.config.dropout_rate == 0.25);
  const auto pa = disc.parameters();
  const auto pb = back.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

}  // TEST_SUITE
