#include "tiltrotor/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tiltrotor/error.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/io.hpp"
#include "tiltrotor/sim.hpp"

namespace tiltrotor {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitOverwrite = 3;
constexpr int kExitAborted = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  bool force = false;
};

struct ColormapOptions {
  std::string branch = "blue";
  double range = 0.6;
  int resolution = 21;
};

struct GaitSource {
  std::string gait_file;
  std::string preset = "gait1";
};

struct CurvesOptions {
  GaitSource source;
  double bias = 0.8;
  double grid_range = 1.55;
  int grid_resolution = 241;
  int phases = 20;
};

struct GaitgenOptions {
  std::string preset;
  std::vector<double> center;
  std::vector<double> half;
  std::string branch = "blue";
  double period = 10.0;
  double bias = 1.0;
  std::string name;
};

struct TrackOptions {
  GaitSource source;
  double duration = 120.0;
  double dt = 1e-3;
  bool no_saturation = false;
};

// Refuses to run when any output already exists, before anything is written.
bool guard_outputs(const std::vector<fs::path>& outputs, bool force) {
  if (force) return true;
  bool clear = true;
  for (const auto& p : outputs) {
    if (fs::exists(p)) {
      std::cerr << "refusing to overwrite " << p.string() << " (use --force)\n";
      clear = false;
    }
  }
  return clear;
}

Gait load_gait(const GaitSource& source, const Params& params) {
  if (!source.gait_file.empty()) return io::read_gait(source.gait_file);
  return make_preset_gait(source.preset, params);
}

json report_json(const RobustnessReport& r) {
  return {{"area_fraction", r.area_fraction}, {"hover_margin", r.hover_margin}};
}

// Keeps at most max_points evenly strided samples (always including the last).
template <typename F>
io::SvgSeries decimated(size_t n, size_t max_points, F&& point, const std::string& color) {
  io::SvgSeries s;
  s.color = color;
  const size_t stride = std::max<size_t>(1, n / max_points);
  for (size_t k = 0; k < n; k += stride) {
    auto [x, y] = point(k);
    s.x.push_back(x);
    s.y.push_back(y);
  }
  if (n > 0 && (n - 1) % stride != 0) {
    auto [x, y] = point(n - 1);
    s.x.push_back(x);
    s.y.push_back(y);
  }
  return s;
}

int cmd_colormap(const GlobalOptions& global, const io::Config& config, const ColormapOptions& opt) {
  const Branch branch = branch_from_string(opt.branch);
  if (!(opt.range > 0.0) || opt.resolution < 2)
    throw Error(ErrorCode::kInvalidInput, "--range must be > 0 and --res >= 2");
  const fs::path out(global.out_dir);
  const std::string stem = std::string("colormap_") + to_string(branch);
  const fs::path csv = out / (stem + ".csv"), planes = out / (stem + "_planes.json");
  if (!guard_outputs({csv, planes}, global.force)) return kExitOverwrite;

  const ColorMap map = color_map(Grid2D::square(opt.range, opt.resolution), branch, config.params);
  fs::create_directories(out);
  io::write_colormap_csv(map, csv);
  io::write_colormap_planes(map, planes);
  std::cout << "wrote " << map.cells.size() << " cells to " << csv.string() << "\n"
            << "alpha3 plane rms " << map.alpha3_plane.rms << ", alpha4 plane rms "
            << map.alpha4_plane.rms << "\n";
  return kExitOk;
}

int cmd_curves(const GlobalOptions& global, const io::Config& config, const CurvesOptions& opt) {
  if (opt.phases < 1) throw Error(ErrorCode::kInvalidInput, "--phases must be >= 1");
  if (!(opt.bias > 0.0 && opt.bias <= 1.0)) throw Error(ErrorCode::kInvalidInput, "--bias must be in (0, 1]");
  if (!(opt.grid_range > 0.0 && opt.grid_range < M_PI / 2) || opt.grid_resolution < 2)
    throw Error(ErrorCode::kInvalidInput, "--grid-range must be in (0, pi/2) and --grid-res >= 2");
  const fs::path out(global.out_dir);
  const fs::path csv = out / "curves.csv", svg = out / "curves.svg", report = out / "robustness.json";
  if (!guard_outputs({csv, svg, report}, global.force)) return kExitOverwrite;

  const Gait gait = load_gait(opt.source, config.params);
  const Gait biased = bias_gait(gait, opt.bias);
  const Grid2D grid = Grid2D::square(opt.grid_range, opt.grid_resolution);
  // Curves of every sampled phase, labelled <set>-p<k>.
  std::vector<io::LabelledCurves> plain_curves, biased_curves;
  for (int k = 0; k < opt.phases; ++k) {
    const double t = gait.period * k / opt.phases;
    const std::string phase = "-p" + std::to_string(k);
    plain_curves.push_back({"unbiased" + phase, singular_curves(sample_gait(gait, t), config.params, grid)});
    biased_curves.push_back({"biased" + phase, singular_curves(sample_gait(biased, t), config.params, grid)});
  }
  auto curve_count = [](const std::vector<io::LabelledCurves>& sets) {
    size_t n = 0;
    for (const auto& s : sets) n += s.curves.polylines.size();
    return n;
  };
  const RobustnessReport plain_report = robustness_report(gait, config.params, grid, opt.phases);
  const RobustnessReport biased_report = robustness_report(biased, config.params, grid, opt.phases);

  io::SvgPlot plot;
  plot.title = "singular attitudes";
  plot.x_label = "roll (rad)";
  plot.y_label = "pitch (rad)";
  plot.x_min = grid.x_min;
  plot.x_max = grid.x_max;
  plot.y_min = grid.y_min;
  plot.y_max = grid.y_max;
  for (const auto& [sets, color] : {std::pair{&plain_curves, "red"}, std::pair{&biased_curves, "blue"}}) {
    for (const auto& set : *sets) {
      for (const auto& line : set.curves.polylines) {
        io::SvgSeries s;
        s.color = color;
        for (const auto& v : line) {
          s.x.push_back(v.x());
          s.y.push_back(v.y());
        }
        plot.series.push_back(std::move(s));
      }
    }
  }
  const json doc = {{"phases", opt.phases},
                    {"bias", opt.bias},
                    {"unbiased", report_json(plain_report)},
                    {"biased", report_json(biased_report)}};

  fs::create_directories(out);
  std::vector<io::LabelledCurves> all = plain_curves;
  all.insert(all.end(), biased_curves.begin(), biased_curves.end());
  io::write_curves_csv(all, csv);
  io::write_text(svg, io::render_svg(plot));
  io::write_text(report, doc.dump(2) + "\n");
  std::cout << "unbiased: " << curve_count(plain_curves) << " curves, area_fraction "
            << plain_report.area_fraction << "\n"
            << "biased:   " << curve_count(biased_curves) << " curves, area_fraction "
            << biased_report.area_fraction << "\n";
  return kExitOk;
}

int cmd_gaitgen(const GlobalOptions& global, const io::Config& config, const GaitgenOptions& opt) {
  std::string name = opt.name;
  GaitPreset rect;
  if (!opt.preset.empty()) {
    rect = gait_preset(opt.preset);
    if (name.empty()) name = opt.preset;
  } else {
    if (opt.center.size() != 2 || opt.half.size() != 2)
      throw Error(ErrorCode::kInvalidInput, "need --preset or both --center and --half");
    rect = {"custom", {opt.center[0], opt.center[1]}, {opt.half[0], opt.half[1]},
            branch_from_string(opt.branch), opt.period};
    if (name.empty()) name = "gait";
  }
  if (opt.bias != 1.0 && opt.name.empty()) name += "_bias";
  const fs::path out(global.out_dir);
  const fs::path csv = out / (name + ".csv");
  if (!guard_outputs({csv, io::gait_sidecar_path(csv)}, global.force)) return kExitOverwrite;

  Gait gait = make_rectangle_gait(rect.center, rect.half_extents, rect.period, rect.branch, config.params);
  if (opt.bias != 1.0) gait = bias_gait(gait, opt.bias);
  fs::create_directories(out);
  io::write_gait(gait, csv);
  std::cout << "wrote " << csv.string() << " (" << to_string(gait.color) << ", bias " << gait.bias
            << ")\n";
  return kExitOk;
}

int cmd_track(const GlobalOptions& global, const io::Config& config, const TrackOptions& opt) {
  SimConfig sim;
  sim.duration = opt.duration;
  sim.dt = opt.dt;
  sim.abort_on_singular = config.abort_on_singular;
  sim.saturation = !opt.no_saturation;
  sim.validate();
  const fs::path out(global.out_dir);
  const fs::path csv = out / "track.csv", trajectory = out / "trajectory.svg",
                 error = out / "error.svg", rotors = out / "rotors.svg";
  if (!guard_outputs({csv, trajectory, error, rotors}, global.force)) return kExitOverwrite;

  const Gait gait = load_gait(opt.source, config.params);
  const TrackLog log = run_tracking(sim, config.params, config.gains, gait);
  const ErrorSeries err = error_series(log);
  const size_t n = log.rows.size();
  constexpr size_t kMaxPoints = 4000;

  io::SvgPlot traj;
  traj.title = "trajectory";
  traj.x_label = "x (m)";
  traj.y_label = "y (m)";
  traj.x_min = traj.y_min = -7.0;
  traj.x_max = traj.y_max = 7.0;
  traj.series.push_back(decimated(
      n, kMaxPoints, [&](size_t k) { return std::pair{log.rows[k].ref.pos.x(), log.rows[k].ref.pos.y()}; },
      "blue"));
  traj.series.push_back(decimated(
      n, kMaxPoints,
      [&](size_t k) { return std::pair{log.rows[k].state.position.x(), log.rows[k].state.position.y()}; },
      "red"));

  const double t_end = n ? log.rows.back().t : sim.duration;
  io::SvgPlot err_plot;
  err_plot.title = "position error";
  err_plot.x_label = "t (s)";
  err_plot.y_label = "error (m)";
  err_plot.x_max = std::max(t_end, 1e-9);
  err_plot.y_min = -6.0;
  err_plot.y_max = 6.0;
  const char* axis_colors[3] = {"red", "green", "blue"};
  for (int a = 0; a < 3; ++a)
    err_plot.series.push_back(decimated(
        n, kMaxPoints, [&](size_t k) { return std::pair{err.t[k], err.error[k][a]}; }, axis_colors[a]));

  io::SvgPlot rot;
  rot.title = "rotor speeds";
  rot.x_label = "t (s)";
  rot.y_label = "speed (rad/s)";
  rot.x_max = err_plot.x_max;
  rot.y_min = -config.params.omega_hi;
  rot.y_max = config.params.omega_hi;
  const char* rotor_colors[4] = {"red", "green", "blue", "black"};
  for (int i = 0; i < 4; ++i)
    rot.series.push_back(decimated(
        n, kMaxPoints, [&](size_t k) { return std::pair{log.rows[k].t, log.rows[k].varpi[i]}; },
        rotor_colors[i]));

  fs::create_directories(out);
  io::write_track_csv(log, csv);
  io::write_text(trajectory, io::render_svg(traj));
  io::write_text(error, io::render_svg(err_plot));
  io::write_text(rotors, io::render_svg(rot));

  if (log.abort) {
    std::cout << "aborted at t = " << log.abort->time << " s: " << to_string(log.abort->reason) << " ("
              << log.abort->message << ")\n";
    return kExitAborted;
  }
  std::cout << "completed " << t_end << " s, final position error "
            << (err.norm.empty() ? 0.0 : err.norm.back()) << " m\n";
  return kExitOk;
}

void add_gait_source(CLI::App* cmd, GaitSource& source) {
  auto* file = cmd->add_option("--gait", source.gait_file, "gait CSV file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", source.preset, "gait1, gait2 or gait3 when no --gait is given")
      ->excludes(file);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Tilt-rotor gait design and tracking experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", global.out_dir, "output directory (created if absent)");
  app.add_flag("--force", global.force, "overwrite existing outputs");

  ColormapOptions colormap;
  auto* cm = app.add_subcommand("colormap", "two-colour map over a square (alpha1, alpha2) grid");
  cm->add_option("--branch", colormap.branch, "blue or red")->check(CLI::IsMember({"blue", "red"}));
  cm->add_option("--range", colormap.range, "half width of the grid (rad)");
  cm->add_option("--res", colormap.resolution, "samples per axis");

  CurvesOptions curves;
  auto* cv = app.add_subcommand("curves", "singular attitude curves of a gait and its biased copy");
  add_gait_source(cv, curves.source);
  cv->add_option("--bias", curves.bias, "scale applied to alpha3, alpha4");
  cv->add_option("--grid-range", curves.grid_range, "half width of the attitude grid (rad)");
  cv->add_option("--grid-res", curves.grid_resolution, "samples per axis");
  cv->add_option("--phases", curves.phases, "gait phases for the robustness metrics");

  GaitgenOptions gaitgen;
  auto* gg = app.add_subcommand("gaitgen", "rectangular gait on a colour sheet");
  auto* preset = gg->add_option("--preset", gaitgen.preset, "gait1, gait2 or gait3");
  gg->add_option("--center", gaitgen.center, "rectangle centre (alpha1 alpha2)")->expected(2)->excludes(preset);
  gg->add_option("--half", gaitgen.half, "half extents")->expected(2)->excludes(preset);
  gg->add_option("--branch", gaitgen.branch, "blue or red")
      ->check(CLI::IsMember({"blue", "red"}))
      ->excludes(preset);
  gg->add_option("--period", gaitgen.period, "period (s)")->excludes(preset);
  gg->add_option("--bias", gaitgen.bias, "scale applied to alpha3, alpha4");
  gg->add_option("--name", gaitgen.name, "output file stem");

  TrackOptions track;
  auto* tr = app.add_subcommand("track", "closed-loop circle tracking");
  add_gait_source(tr, track.source);
  tr->add_option("--duration", track.duration, "simulated time (s)");
  tr->add_option("--dt", track.dt, "integration step (s)");
  tr->add_flag("--no-saturation", track.no_saturation, "disable rotor speed saturation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    const io::Config config = global.config_path.empty() ? io::Config{} : io::load_config(global.config_path);
    if (*cm) return cmd_colormap(global, config, colormap);
    if (*cv) return cmd_curves(global, config, curves);
    if (*gg) return cmd_gaitgen(global, config, gaitgen);
    return cmd_track(global, config, track);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace tiltrotor
