#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "iadp/config.hpp"
#include "iadp/io.hpp"

namespace iadp {
namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsAreTheBenchmarkValues) {
  const SimConfig cfg = build_sim_config(resolve_config({}, {}));
  EXPECT_EQ(cfg.scenario, "s1");
  EXPECT_EQ(cfg.controller, ControllerKind::iadp);
  EXPECT_EQ(cfg.buffer_capacity, 8u);
  EXPECT_EQ(cfg.gains.Gamma, 1e-4 * Matrix::Identity(6, 6));
  EXPECT_EQ(cfg.gains.k_c, 5.0);
  EXPECT_EQ(cfg.gains.k_e, 3.0);
  EXPECT_EQ(cfg.cost.Q, Matrix::Identity(2, 2));
  EXPECT_EQ(cfg.cost.beta, 2.0);
  EXPECT_EQ(cfg.cost.c_bar, 2.0);
  EXPECT_EQ(cfg.g_bar, (Matrix(2, 1) << 0.0, 0.1).finished());
  EXPECT_EQ(cfg.x0, (StateVec(2) << 2.0, -2.0).finished());
  EXPECT_EQ(cfg.w0, Vector::Zero(6));
  EXPECT_EQ(cfg.dt, 1e-3);
  EXPECT_EQ(cfg.t_end, 80.0);
  EXPECT_FALSE(cfg.noise.enabled);
  EXPECT_TRUE(cfg.events.empty());
  ASSERT_EQ(cfg.disturbances.size(), 1u);
  const auto* d = std::get_if<VanishingDisturbance>(&cfg.disturbances[0]);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->omega1, -0.3906);
  EXPECT_EQ(d->omega2, 1.0051);
}

TEST(Config, ScenarioPresets) {
  const SimConfig s2 = build_sim_config(resolve_config({}, {{"scenario", "s2"}}));
  EXPECT_TRUE(s2.noise.enabled);
  EXPECT_EQ(s2.noise.snr_db, 50.0);
  EXPECT_EQ(s2.noise.t_on, 20.0);
  EXPECT_EQ(s2.noise.t_off, 60.0);
  ASSERT_EQ(s2.events.size(), 1u);
  EXPECT_EQ(s2.events[0].time, 20.0);
  ASSERT_EQ(s2.disturbances.size(), 2u);
  const auto* sq = std::get_if<SquareWave>(&s2.disturbances[1]);
  ASSERT_NE(sq, nullptr);
  EXPECT_EQ(sq->amplitude, 0.2);
  EXPECT_EQ(sq->period, 5.0);

  const SimConfig s3 = build_sim_config(resolve_config({{"scenario", "s3"}}, {}));
  EXPECT_EQ(s3.noise.snr_db, 10.0);
  const auto* sq3 = std::get_if<SquareWave>(&s3.disturbances[1]);
  ASSERT_NE(sq3, nullptr);
  EXPECT_EQ(sq3->amplitude, 0.5);
  EXPECT_EQ(sq3->period, 1.0);
  EXPECT_THROW(scenario_preset("s9"), ConfigError);
}

TEST(Config, NonSymmetricQNamesTheKey) {
  const std::string msg =
      error_of([] { build_sim_config(resolve_config({{"cost.Q", "[[1, 0.5], [0, 1]]"}}, {})); });
  EXPECT_NE(msg.find("cost.Q"), std::string::npos) << msg;
}

TEST(Config, BadValuesNameTheKey) {
  EXPECT_NE(error_of([] { resolve_config({{"sim.dt", "-0.1"}}, {}); }).find("sim.dt"),
            std::string::npos);
  EXPECT_NE(error_of([] { resolve_config({{"sim.dt", "fast"}}, {}); }).find("sim.dt"),
            std::string::npos);
  EXPECT_NE(error_of([] { resolve_config({{"controller", "pid"}}, {}); }).find("controller"),
            std::string::npos);
  EXPECT_NE(error_of([] { resolve_config({{"foo.bar", "1"}}, {}); }).find("foo.bar"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              build_sim_config(resolve_config({{"learner.Gamma", "[[1, 0], [0, -1]]"}}, {}));
            }).find("learner.Gamma"),
            std::string::npos);
}

TEST(Config, FlagBeatsFile) {
  const ConfigValues file = parse_config_text("sim.dt = 0.002\nseed = 4\n");
  const ConfigValues v = resolve_config(file, {{"sim.dt", "0.0005"}});
  EXPECT_EQ(std::stod(v.at("sim.dt")), 0.0005);
  EXPECT_EQ(v.at("seed"), "4");
}

TEST(Config, FileBeatsPreset) {
  const ConfigValues v =
      resolve_config(parse_config_text("scenario = s3\nnoise.snr_db = 30\n"), {});
  EXPECT_EQ(v.at("noise.snr_db"), "30");
  EXPECT_EQ(v.at("square.amplitude"), "0.5");
}

TEST(Parser, SyntaxAndComments) {
  const ConfigValues v = parse_config_text(
      "# header\n"
      "cost.Q = [[2, 0],\n"
      "          [0, 3]]  # trailing\n"
      "\n"
      "sim.x0=[1,-1]\n");
  EXPECT_EQ(v.size(), 2u);
  const ConfigValues r = resolve_config(v, {});
  EXPECT_EQ(r.at("cost.Q"), "[[2, 0], [0, 3]]");
  EXPECT_EQ(r.at("sim.x0"), "[1, -1]");

  EXPECT_THROW(parse_config_text("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse_config_text("sim.x0 = [1, 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("bogus = 1\n"), ConfigError);
}

TEST(Parser, Override) {
  const auto [k, v] = parse_override("tadp.rho=0.5");
  EXPECT_EQ(k, "tadp.rho");
  EXPECT_EQ(v, "0.5");
  EXPECT_THROW(parse_override("nothing"), ConfigError);
}

TEST(Canonical, NumbersRoundTrip) {
  const ConfigValues v = canonicalize({{"sim.dt", "1e-3"}, {"cost.beta", "2.000"}});
  EXPECT_EQ(v.at("sim.dt"), "0.001");
  EXPECT_EQ(v.at("cost.beta"), "2");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Echo, RoundTripsThroughParser) {
  for (const char* s : {"s1", "s2", "s3"}) {
    const ConfigValues v = resolve_config({}, {{"scenario", s}, {"seed", "77"}});
    EXPECT_EQ(resolve_config(parse_config_text(config_echo(v)), {}), v) << s;
  }
}

TEST(Echo, RoundTripsThroughManifest) {
  const ConfigValues v = resolve_config({}, {{"scenario", "s2"}, {"controller", "tadp"}});
  SimConfig cfg = build_sim_config(v);
  cfg.t_end = 0.0;
  const EpisodeResult r = run_episode(cfg);
  const std::string manifest = make_manifest(v, r, artifact_paths("out", v), 0.1);
  EXPECT_EQ(config_from_manifest(manifest), v);
  EXPECT_THROW(config_from_manifest("{not json"), ConfigError);
}

TEST(Files, ParseFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "iadp_test_config.txt";
  std::ofstream(path) << "controller = zsadp\nzsadp.gamma = 2\n";
  const ConfigValues v = resolve_config(parse_config_file(path.string()), {});
  EXPECT_EQ(build_sim_config(v).zsadp_gamma, 2.0);
  std::filesystem::remove(path);
  EXPECT_THROW(parse_config_file(path.string()), ConfigError);
}

}  // namespace
}  // namespace iadp
