#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "trajgan/checkpoint.hpp"
#include "trajgan/cli.hpp"
#include "trajgan/stats.hpp"

using namespace trajgan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path workdir(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_work" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small pipeline settings so the train/sample tests stay quick.
fs::path tiny_config(const fs::path& dir) {
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream os(cfg);
  os << "synth.n_traj = 3\nsynth.steps = 120\n"
     << "gen.k = 4\ngen.h1 = 6\ngen.h2 = 6\n"
     << "train.segment_len = 20\ntrain.minibatch = 2\ntrain.inner_steps = 1\n"
     << "train.lr_gen = 0.001\ntrain.lr_disc = 0.001\ntrain.early_stop = false\n"
     << "disc.conv1.channels = 4\ndisc.conv1.width = 3\ndisc.conv1.stride = 1\n"
     << "disc.conv2.channels = 4\ndisc.conv2.width = 3\ndisc.conv2.stride = 2\n"
     << "disc.conv3.channels = 4\ndisc.conv3.width = 3\ndisc.conv3.stride = 1\n"
     << "sample.n_traj = 4\nsample.iterations = 3\nsample.segment_new = 10\n"
     << "train.checkpoint_every = 2\n";
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes the expected rows and is deterministic") {
  const auto dir = workdir("synth");
  REQUIRE(run({"synth", "--out", (dir / "a.csv").string()}).code == 0);
  REQUIRE(run({"synth", "--out", (dir / "b.csv").string()}).code == 0);
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 1 + 15 * 1100);

  const auto r = run({"synth", "--set", "synth.steps=2", "--out", (dir / "c.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("mean") != std::string::npos);
  const std::string c = slurp(dir / "c.csv");
  CHECK(std::count(c.begin(), c.end(), '\n') == 1 + 15 * 2);

  CHECK(run({"synth", "--seed", "5", "--out", (dir / "d.csv").string()}).code == 0);
  CHECK(slurp(dir / "d.csv") != a);
}

TEST_CASE("bad configuration exits nonzero with a message") {
  const auto dir = workdir("badcfg");
  std::ofstream(dir / "bad.cfg") << "synth.stepz = 10\n";
  const auto r = run({"--config", (dir / "bad.cfg").string(), "synth", "--out", (dir / "x.csv").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("synth.stepz") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "x.csv"));
  CHECK(run({"synth", "--set", "synth.steps=1", "--out", (dir / "y.csv").string()}).code != 0);
  CHECK(run({"nonsense"}).code != 0);
}

TEST_CASE("train, sample and score pipeline") {
  const auto dir = workdir("pipeline");
  const std::string cfg = tiny_config(dir).string();
  const std::string data = (dir / "truth.csv").string();
  REQUIRE(run({"--config", cfg, "synth", "--out", data}).code == 0);

  SUBCASE("missing data fails before writing anything") {
    const auto r = run({"--config", cfg, "train", "--data", (dir / "nope.csv").string(), "--out",
                        (dir / "ckpt_missing").string()});
    CHECK(r.code != 0);
    CHECK_FALSE(fs::exists(dir / "ckpt_missing"));
  }

  SUBCASE("zero epochs leaves an initial checkpoint and an empty loss log") {
    const auto r = run({"--config", cfg, "--set", "train.epochs=0", "train", "--data", data, "--out",
                        (dir / "ckpt0").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "ckpt0" / "checkpoint_final.txt"));
    CHECK(slurp(dir / "ckpt0" / "loss.csv") == "epoch,mean_JG,mean_JD,mean_D_real,mean_D_fake\n");
  }

  SUBCASE("training is reproducible and sampling follows the contract") {
    const auto t1 = run({"--config", cfg, "--set", "train.epochs=4", "train", "--data", data, "--out",
                         (dir / "ck1").string()});
    const auto t2 = run({"--config", cfg, "--set", "train.epochs=4", "train", "--data", data, "--out",
                         (dir / "ck2").string()});
    REQUIRE(t1.code == 0);
    REQUIRE(t2.code == 0);
    CHECK(slurp(dir / "ck1" / "loss.csv") == slurp(dir / "ck2" / "loss.csv"));
    CHECK(slurp(dir / "ck1" / "checkpoint_final.txt") == slurp(dir / "ck2" / "checkpoint_final.txt"));
    CHECK(fs::exists(dir / "ck1" / "checkpoint_epoch_2.txt"));
    CHECK(fs::exists(dir / "ck1" / "checkpoint_epoch_4.txt"));

    const std::string ckpt = (dir / "ck1" / "checkpoint_final.txt").string();
    const std::string gen = (dir / "gen.csv").string();
    REQUIRE(run({"--config", cfg, "sample", "--ckpt", ckpt, "--data", data, "--out", gen}).code == 0);
    REQUIRE(run({"--config", cfg, "sample", "--ckpt", ckpt, "--data", data, "--out",
                 (dir / "gen2.csv").string()})
                .code == 0);
    CHECK(slurp(gen) == slurp(dir / "gen2.csv"));
    const auto trajs = load_trajectories(gen);
    CHECK(trajs.size() == 4);
    for (const auto& t : trajs) CHECK(t.size() == 30);
    CHECK(trajs[0] != trajs[3]);  // same seed source (cycled), different noise stream

    REQUIRE(run({"--config", cfg, "sample", "--n-traj", "2", "--iterations", "5", "--ckpt", ckpt,
                 "--data", data, "--out", (dir / "gen3.csv").string()})
                .code == 0);
    const auto more = load_trajectories(dir / "gen3.csv");
    CHECK(more.size() == 2);
    CHECK(more[0].size() == 50);

    const std::string out = (dir / "score.csv").string();
    REQUIRE(run({"score", "--truth", gen, "--generated", gen, "--out", out}).code == 0);
    CHECK(slurp(out) == "accuracy,eta_mean,generalization,zeta_mean\n1,0,0,1\n");
    CHECK(fs::exists(dir / "score.matrix.csv"));
    CHECK(fs::exists(dir / "score.msd_truth.csv"));
  }

  SUBCASE("seed source shorter than k is a hard error") {
    REQUIRE(run({"--config", cfg, "--set", "train.epochs=0", "train", "--data", data, "--out",
                 (dir / "ck3").string()})
                .code == 0);
    std::ofstream(dir / "short.csv") << "traj_id,step,r_mm,theta_rad,z_mm\n0,0,1,2,3\n0,1,1,2,3\n";
    const auto r = run({"--config", cfg, "sample", "--ckpt", (dir / "ck3" / "checkpoint_final.txt").string(),
                        "--data", (dir / "short.csv").string(), "--out", (dir / "s.csv").string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("k = 4") != std::string::npos);
  }
}

TEST_CASE("analyze handles normal and degenerate data") {
  const auto dir = workdir("analyze");
  const std::string data = (dir / "truth.csv").string();
  REQUIRE(run({"--set", "synth.n_traj=3", "--set", "synth.steps=300", "synth", "--out", data}).code == 0);
  REQUIRE(run({"analyze", "--data", data, "--out", (dir / "out").string()}).code == 0);
  for (const char* f : {"msd.csv", "gamma.csv", "velocity_hist.csv", "velocity_fit.csv", "self_correlation.csv"}) {
    CHECK(fs::exists(dir / "out" / f));
  }

  std::ofstream flat(dir / "flat.csv");
  flat << "traj_id,step,r_mm,theta_rad,z_mm\n";
  for (int s = 0; s < 30; ++s) flat << "0," << s << ",1,2,3\n";
  flat.close();
  const auto r = run({"analyze", "--data", (dir / "flat.csv").string(), "--out", (dir / "flat").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("skipped") != std::string::npos);
  const std::string msd = slurp(dir / "flat" / "msd.csv");
  CHECK(msd.find(",0,0,0\n") != std::string::npos);
  CHECK(slurp(dir / "flat" / "gamma.csv").find("nan") != std::string::npos);

  std::ofstream uneven(dir / "uneven.csv");
  uneven << "traj_id,step,r_mm,theta_rad,z_mm\n0,0,1,2,3\n0,1,1,2,4\n1,0,1,2,3\n";
  uneven.close();
  CHECK(run({"analyze", "--data", (dir / "uneven.csv").string(), "--out", (dir / "u").string()}).code != 0);
}

TEST_CASE("gradcheck command") {
  const auto ok = run({"gradcheck"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("all gradient checks passed") != std::string::npos);
  CHECK(run({"gradcheck"}).out == ok.out);
  CHECK(run({"gradcheck", "--inject-fault"}).code != 0);
}

TEST_CASE("defaults prints a parseable config") {
  const auto r = run({"defaults"});
  CHECK(r.code == 0);
  std::istringstream is(r.out);
  CHECK_NOTHROW(parse_config(is));
}

}  // TEST_SUITE
