#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tiltrotor/cli.hpp"
#include "tiltrotor/error.hpp"
#include "tiltrotor/io.hpp"

using namespace tiltrotor;
namespace fs = std::filesystem;

namespace {

const Params kParams = Params::defaults();

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::temp_directory_path() / "tiltrotor_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tiltrotor");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Config, ParsesEveryKey) {
  const io::Config c = io::parse_config(R"({
    "m": 1.2, "g": 9.8, "k_f": 9e-6, "k_m": 3e-7, "arm_length": 0.25,
    "inertia": [0.02, 0, 0, 0, 0.02, 0, 0, 0, 0.03],
    "omega_lo": 10, "omega_hi": 900, "spin_sign": [1, -1, 1, -1],
    "reversible_rotors": true,
    "gains": {"kp": 3, "kd": [1, 2, 3, 4], "kp_xy": 0.3, "kd_xy": 0.9, "clamp": 0.3},
    "abort_on_singular": false})");
  EXPECT_EQ(c.params.mass, 1.2);
  EXPECT_EQ(c.params.inertia(2, 2), 0.03);
  EXPECT_EQ(c.params.omega_hi, 900.0);
  EXPECT_EQ(c.params.spin_sign, Vec4(1, -1, 1, -1));
  EXPECT_TRUE(c.params.reversible_rotors);
  EXPECT_EQ(c.gains.kp, Vec4::Constant(3.0));
  EXPECT_EQ(c.gains.kd, Vec4(1, 2, 3, 4));
  EXPECT_EQ(c.gains.clamp, 0.3);
  EXPECT_FALSE(c.abort_on_singular);
}

TEST(Config, DefaultsAndRoundTrip) {
  const io::Config d = io::parse_config("{}");
  EXPECT_EQ(d.params.mass, 1.0);
  EXPECT_NEAR(d.params.omega_hi, 1.5 * d.params.hover_speed(), 1e-12);
  EXPECT_TRUE(d.abort_on_singular);
  const io::Config back = io::parse_config(io::config_to_json(d));
  EXPECT_EQ(back.params.inertia, d.params.inertia);
  EXPECT_EQ(back.params.omega_hi, d.params.omega_hi);
  EXPECT_EQ(back.gains.kp_xy, d.gains.kp_xy);
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {"[1]", "{\"mass\": 1}", "{\"m\": 0}", "{\"inertia\": [1, 2]}", "{\"m\": \"x\"}",
                           "{\"gains\": {\"kp\": -1}}", "{\"gains\": {\"ki\": 1}}", "not json",
                           "{\"abort_on_singular\": 1}"}) {
    try {
      io::parse_config(text);
      ADD_FAILURE() << "accepted " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidInput) << text;
    }
  }
}

TEST(Csv, DoublesRoundTripExactly) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 10000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Csv, GaitRoundTrip) {
  const fs::path dir = scratch_dir();
  const Gait g = make_preset_gait("gait3", kParams);
  io::write_gait(g, dir / "g.csv");
  const io::CsvTable table = io::read_numeric_csv(dir / "g.csv");
  EXPECT_EQ(table.rows.size(), 200u);
  const Gait back = io::read_gait(dir / "g.csv");
  EXPECT_EQ(back.period, g.period);
  EXPECT_EQ(back.color, Branch::kRed);
  EXPECT_EQ(back.bias, 1.0);
  for (size_t k = 0; k < table.rows.size(); k += 13) {
    const double t = table.rows[k][0] * g.period;
    EXPECT_LT((sample_gait_lifted(back, t) - sample_gait_lifted(g, t)).norm(), 1e-12);
  }
  for (const auto& row : table.rows) {
    const Vec4 a = sample_gait_lifted(g, row[0] * g.period);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(row[1 + i], a[i], 1e-12);
  }
}

TEST(Csv, MalformedGaitFiles) {
  const fs::path dir = scratch_dir();
  write(dir / "bad.csv", "t_frac,alpha1,alpha2,alpha3,alpha4\n0,1,2,x,4\n");
  write(dir / "bad.json", R"({"period_s": 10, "color": "blue", "bias": 1})");
  EXPECT_THROW(io::read_gait(dir / "bad.csv"), Error);
  write(dir / "open.csv", "t_frac,alpha1,alpha2,alpha3,alpha4\n0,0,0,0,0\n1,0.5,0,0.5,0\n");
  write(dir / "open.json", R"({"period_s": 10, "color": "blue", "bias": 1})");
  EXPECT_THROW(io::read_gait(dir / "open.csv"), Error);
  write(dir / "nosidecar.csv", "t_frac,alpha1,alpha2,alpha3,alpha4\n0,0,0,0,0\n1,0,0,0,0\n");
  EXPECT_THROW(io::read_gait(dir / "nosidecar.csv"), Error);
}

TEST(Csv, TrackRoundTrip) {
  const fs::path dir = scratch_dir();
  SimConfig cfg;
  cfg.duration = 0.5;
  const TrackLog log = run_tracking(cfg, kParams, Gains{}, make_preset_gait("gait1", kParams));
  io::write_track_csv(log, dir / "track.csv");
  const TrackLog back = io::read_track_csv(dir / "track.csv");
  ASSERT_EQ(back.rows.size(), log.rows.size());
  for (size_t k = 0; k < log.rows.size(); ++k) {
    const TrackRow &a = log.rows[k], &b = back.rows[k];
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.state.to_vector(), b.state.to_vector());
    EXPECT_EQ(a.alpha.values(), b.alpha.values());
    EXPECT_EQ(a.varpi, b.varpi);
    EXPECT_EQ(a.ref.pos, b.ref.pos);
    EXPECT_EQ(a.det_delta, b.det_delta);
    EXPECT_EQ(a.saturated, b.saturated);
    EXPECT_EQ(a.singular, b.singular);
  }
}

TEST(Cli, ColormapBranchesAndOverwriteGuard) {
  const fs::path dir = scratch_dir();
  ASSERT_EQ(cli({"--out", dir.string(), "colormap", "--branch", "blue", "--range", "0.6", "--res", "21"}), 0);
  ASSERT_EQ(cli({"--out", dir.string(), "colormap", "--branch", "red", "--range", "0.6", "--res", "21"}), 0);
  const io::CsvTable blue = io::read_numeric_csv(dir / "colormap_blue.csv");
  const io::CsvTable red = io::read_numeric_csv(dir / "colormap_red.csv");
  ASSERT_EQ(blue.rows.size(), 441u);
  EXPECT_EQ(blue.header, (std::vector<std::string>{"alpha1", "alpha2", "alpha3", "alpha4", "residual_sign"}));
  const auto& centre_blue = blue.rows[220];
  const auto& centre_red = red.rows[220];
  EXPECT_NEAR(centre_blue[0], 0.0, 1e-12);
  EXPECT_NEAR(centre_blue[1], 0.0, 1e-12);
  EXPECT_NEAR(centre_blue[2], 0.0, 1e-9);
  EXPECT_NEAR(centre_blue[3], 0.0, 1e-9);
  EXPECT_NEAR(centre_red[2], M_PI, 1e-9);
  EXPECT_NEAR(centre_red[3], M_PI, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "colormap_blue_planes.json"));

  const std::string before = slurp(dir / "colormap_blue.csv");
  const auto stamp = fs::last_write_time(dir / "colormap_blue.csv");
  EXPECT_EQ(cli({"--out", dir.string(), "colormap", "--branch", "blue", "--res", "5"}), 3);
  EXPECT_EQ(slurp(dir / "colormap_blue.csv"), before);
  EXPECT_EQ(fs::last_write_time(dir / "colormap_blue.csv"), stamp);
  EXPECT_EQ(cli({"--out", dir.string(), "--force", "colormap", "--branch", "blue", "--res", "5"}), 0);
  EXPECT_EQ(io::read_numeric_csv(dir / "colormap_blue.csv").rows.size(), 25u);
}

TEST(Cli, ColormapRejectsOutOfSheetRange) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(cli({"--out", dir.string(), "colormap", "--range", "2.0"}), 2);
  EXPECT_EQ(cli({"--out", dir.string(), "colormap", "--branch", "green"}), 2);
}

TEST(Cli, GaitgenPresetAndBias) {
  const fs::path dir = scratch_dir();
  ASSERT_EQ(cli({"--out", dir.string(), "gaitgen", "--preset", "gait1"}), 0);
  ASSERT_EQ(cli({"--out", dir.string(), "gaitgen", "--preset", "gait1", "--bias", "0.8"}), 0);
  const io::CsvTable plain = io::read_numeric_csv(dir / "gait1.csv");
  const io::CsvTable biased = io::read_numeric_csv(dir / "gait1_bias.csv");
  ASSERT_EQ(plain.rows.size(), 200u);
  ASSERT_EQ(biased.rows.size(), 200u);
  const GaitPreset p = gait_preset("gait1");
  for (size_t k = 0; k < plain.rows.size(); ++k) {
    const auto& r = plain.rows[k];
    // the (alpha1, alpha2) trace lies on the rectangle perimeter
    const double dx = std::abs(r[1] - p.center.x()), dy = std::abs(r[2] - p.center.y());
    EXPECT_LE(dx, p.half_extents.x() + 1e-12);
    EXPECT_LE(dy, p.half_extents.y() + 1e-12);
    EXPECT_TRUE(std::abs(dx - p.half_extents.x()) < 1e-12 || std::abs(dy - p.half_extents.y()) < 1e-12);
    EXPECT_NEAR(biased.rows[k][3], 0.8 * r[3], 1e-15);
    EXPECT_NEAR(biased.rows[k][4], 0.8 * r[4], 1e-15);
    EXPECT_EQ(biased.rows[k][1], r[1]);
  }
  for (int i = 1; i <= 4; ++i) EXPECT_NEAR(plain.rows.front()[i], plain.rows.back()[i], 1e-6);
  EXPECT_NEAR(plain.rows.front()[1], p.center.x() - p.half_extents.x(), 1e-15);
  EXPECT_NEAR(plain.rows.front()[2], p.center.y() - p.half_extents.y(), 1e-15);
  EXPECT_NE(slurp(dir / "gait1_bias.json").find("0.8"), std::string::npos);
}

TEST(Cli, GaitgenCustomRectangle) {
  const fs::path dir = scratch_dir();
  ASSERT_EQ(cli({"--out", dir.string(), "gaitgen", "--center", "0.1", "0.1", "--half", "0.1", "0.05", "--branch",
                 "red", "--period", "4", "--name", "custom"}),
            0);
  const Gait g = io::read_gait(dir / "custom.csv");
  EXPECT_EQ(g.period, 4.0);
  EXPECT_EQ(g.color, Branch::kRed);
  EXPECT_EQ(cli({"--out", dir.string(), "gaitgen", "--center", "0.1", "0.1"}), 2);
  EXPECT_EQ(cli({"--out", dir.string(), "gaitgen", "--preset", "gait9"}), 2);
}

TEST(Cli, CurvesReportBiasPenalty) {
  const fs::path dir = scratch_dir();
  ASSERT_EQ(cli({"--out", dir.string(), "curves", "--preset", "gait1", "--phases", "8"}), 0);
  const std::string csv = slurp(dir / "curves.csv");
  EXPECT_EQ(csv.find("unbiased"), std::string::npos);
  EXPECT_NE(csv.find("biased-p"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "curves.svg"));
  const std::string report = slurp(dir / "robustness.json");
  auto field = [&](const std::string& set) {
    const size_t at = report.find("\"area_fraction\"", report.find("\"" + set + "\""));
    return std::stod(report.substr(report.find(':', at) + 1));
  };
  EXPECT_EQ(field("unbiased"), 1.0);
  EXPECT_LT(field("biased"), 1.0);
}

TEST(Cli, CurvesFromGaitFileAndErrors) {
  const fs::path dir = scratch_dir();
  ASSERT_EQ(cli({"--out", dir.string(), "gaitgen", "--preset", "gait2"}), 0);
  EXPECT_EQ(cli({"--out", dir.string(), "curves", "--gait", (dir / "gait2.csv").string(), "--phases", "4"}), 0);
  EXPECT_EQ(cli({"--out", dir.string(), "--force", "curves", "--phases", "0"}), 2);
  write(dir / "broken.csv", "t_frac,alpha1\n0,0\n");
  EXPECT_EQ(cli({"--out", dir.string(), "--force", "curves", "--gait", (dir / "broken.csv").string()}), 2);
}

TEST(Cli, TrackExitCodes) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(cli({"--out", (dir / "zero").string(), "track", "--duration", "0"}), 2);
  EXPECT_FALSE(fs::exists(dir / "zero" / "track.csv"));
  ASSERT_EQ(cli({"--out", (dir / "g1").string(), "track", "--preset", "gait1", "--duration", "2"}), 0);
  for (const char* f : {"track.csv", "trajectory.svg", "error.svg", "rotors.svg"})
    EXPECT_TRUE(fs::exists(dir / "g1" / f)) << f;
  EXPECT_EQ(io::read_track_csv(dir / "g1" / "track.csv").rows.size(), 2001u);
  EXPECT_EQ(cli({"--out", (dir / "g2").string(), "track", "--preset", "gait2"}), 4);
  EXPECT_TRUE(fs::exists(dir / "g2" / "track.csv"));
}

TEST(Cli, ConfigFileAndUsageErrors) {
  const fs::path dir = scratch_dir();
  write(dir / "bad.json", R"({"m": -1})");
  EXPECT_EQ(cli({"--config", (dir / "bad.json").string(), "--out", dir.string(), "gaitgen", "--preset", "gait1"}), 2);
  EXPECT_EQ(cli({"--config", (dir / "missing.json").string(), "gaitgen", "--preset", "gait1"}), 2);
  EXPECT_EQ(cli({}), 2);
  EXPECT_EQ(cli({"--out", dir.string(), "bogus"}), 2);
  EXPECT_EQ(cli({"--help"}), 0);
  write(dir / "ok.json", R"({"gains": {"kp_xy": 0.4}})");
  EXPECT_EQ(cli({"--config", (dir / "ok.json").string(), "--out", dir.string(), "gaitgen", "--preset", "gait1"}), 0);
}
