// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tiltrotor/cli.hpp"
#include "tiltrotor/control.hpp"
#include "tiltrotor/error.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/linearization.hpp"
#include "tiltrotor/model.hpp"
#include "tiltrotor/sim.hpp"

using namespace tiltrotor;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int n, const Verdict& v) {
  std::printf("criterion %d: %s - %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

template <typename F>
void run(int n, F&& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  report(n, v);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tiltrotor");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const Params kParams = Params::defaults();

Verdict determinant_identity() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> tilt(-1.3, 1.3), ang(-M_PI, M_PI);
  const double det_i = kParams.inertia.determinant();
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Vec3 e(tilt(rng), tilt(rng), ang(rng));
    const TiltAngles a(ang(rng), ang(rng), ang(rng), ang(rng));
    const double lhs = kParams.mass * std::cos(e[1]) * det_i * decoupling_matrix(e, a, kParams).determinant();
    const double rhs = normalized_det(e[0], e[1], det_decomposition(a, kParams));
    const double denom = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    worst = std::max(worst, std::abs(lhs - rhs) / denom);
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-9 && elapsed < 5.0, fmt("max relative error %.3g over 1000 samples, %.3f s", worst, elapsed)};
}

Verdict yaw_invariance() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> tilt(-1.3, 1.3), ang(-M_PI, M_PI);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const double phi = tilt(rng), theta = tilt(rng);
    const TiltAngles a(ang(rng), ang(rng), ang(rng), ang(rng));
    const double base = decoupling_matrix(Vec3(phi, theta, 0.0), a, kParams).determinant();
    for (int k = 0; k < 16; ++k) {
      const double v = decoupling_matrix(Vec3(phi, theta, -M_PI + 2 * M_PI * k / 16), a, kParams).determinant();
      worst = std::max(worst, std::abs(v - base) / std::abs(base));
    }
  }
  return {worst < 1e-12, fmt("max relative variation %.3g over 50 attitudes x 16 yaws", worst)};
}

Verdict two_branch_existence() {
  const auto start = std::chrono::steady_clock::now();
  const oracle::Consts k;
  const double lk = kParams.arm_length * kParams.k_f + kParams.k_m;
  const double bound = 1e-8 * kParams.k_f * lk * lk;
  double worst_res = 0.0, worst_match = 0.0;
  int bad_count = 0, cells = 0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      const double a1 = -0.6 + 1.2 * i / 20, a2 = -0.6 + 1.2 * j / 20;
      const auto pair = solve_color_pair(a1, a2, kParams);
      ++cells;
      if (pair.size() != 2 ||
          oracle::torus_distance(pair[0].alpha34.x(), pair[0].alpha34.y(), pair[1].alpha34.x(),
                                 pair[1].alpha34.y()) < 1e-3)
        ++bad_count;
      const auto minima = oracle::brute_force_ab_minima(a1, a2, k);
      for (const auto& s : pair) {
        const DetCoefficients c = det_decomposition(s.tilt(), kParams);
        worst_res = std::max({worst_res, std::abs(c.a), std::abs(c.b)});
        double best = 1e9;
        for (const auto& m : minima)
          best = std::min(best, oracle::torus_distance(m.x, m.y, s.alpha34.x(), s.alpha34.y()));
        worst_match = std::max(worst_match, best);
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = bad_count == 0 && worst_res < bound && worst_match < 1e-3 && elapsed < 60.0;
  return {pass, fmt("%d/%d cells with 2 distinct roots, max |A|,|B| %.3g (bound %.3g), max oracle distance %.3g rad, "
                    "%.1f s",
                    cells - bad_count, cells, worst_res, bound, worst_match, elapsed)};
}

Verdict planarity() {
  std::string detail;
  bool planar = true;
  for (Branch b : {Branch::kBlue, Branch::kRed}) {
    const ColorMap map = color_map(Grid2D::square(0.6, 21), b, kParams);
    for (const auto& [name, fit] : {std::pair{"alpha3", map.alpha3_plane}, std::pair{"alpha4", map.alpha4_plane}}) {
      detail += fmt("%s %s = %.6f %+.6f a1 %+.6f a2 (rms %.2g, max %.2g); ", to_string(b), name, fit.c0, fit.c1,
                    fit.c2, fit.rms, fit.max_abs);
      planar = planar && fit.rms < 1e-3;
    }
  }
  detail += planar ? "planar" : "non-planar surface reported";
  return {true, detail};
}

Verdict robust_gaits_are_singularity_free() {
  std::vector<Gait> gaits;
  for (const char* name : {"gait1", "gait2", "gait3"}) gaits.push_back(make_preset_gait(name, kParams));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> centre(-0.5, 0.5), half(0.02, 0.25), coin(0.0, 1.0);
  int skipped = 0;
  while (gaits.size() < 13) {
    const Eigen::Vector2d c(centre(rng), centre(rng)), h(half(rng), half(rng));
    const Branch b = coin(rng) < 0.5 ? Branch::kBlue : Branch::kRed;
    try {
      gaits.push_back(make_rectangle_gait(c, h, 10.0, b, kParams));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate && e.code() != ErrorCode::kNoRoot) throw;
      ++skipped;  // rectangle meets the c = 0 curve, no colour solution there
    }
  }
  const Grid2D grid = Grid2D::square(1.2, 121);
  int nonempty = 0;
  double worst_area = 1.0;
  for (const Gait& g : gaits) {
    for (int k = 0; k < 20; ++k)
      if (!singular_curves(sample_gait(g, g.period * k / 20), kParams, grid).empty()) ++nonempty;
    worst_area = std::min(worst_area, robustness_report(g, kParams, grid, 20).area_fraction);
  }
  return {nonempty == 0 && worst_area == 1.0,
          fmt("%zu gaits (3 presets, %zu random rectangles, %d rejected as degenerate) x 20 phases: %d nonempty curve "
              "sets, min area_fraction %.17g",
              gaits.size(), gaits.size() - 3, skipped, nonempty, worst_area)};
}

Verdict bias_degrades_robustness() {
  const auto start = std::chrono::steady_clock::now();
  const Grid2D grid;
  bool ordered = true, strict = false, biased_nonempty = true;
  std::string detail;
  for (const char* name : {"gait1", "gait2", "gait3"}) {
    const Gait g = make_preset_gait(name, kParams);
    const Gait b = bias_gait(g, 0.8);
    const double a = robustness_report(g, kParams, grid, 20).area_fraction;
    const double ab = robustness_report(b, kParams, grid, 20).area_fraction;
    bool any = false;
    for (int k = 0; k < 20 && !any; ++k) any = !singular_curves(sample_gait(b, b.period * k / 20), kParams, grid).empty();
    ordered = ordered && a >= ab;
    strict = strict || a > ab;
    biased_nonempty = biased_nonempty && any;
    detail += fmt("%s %.5f vs biased %.5f; ", name, a, ab);
  }
  const double elapsed = seconds_since(start);
  detail += fmt("%.1f s", elapsed);
  return {ordered && strict && biased_nonempty && elapsed < 60.0, detail};
}

Verdict exact_linearization() {
  const Gains g;
  const TiltAngles a(0.1, -0.2, 0.1, -0.2);
  const Vec4 e0 = Vec4::Constant(0.1);
  State s;
  s.euler = -e0.head<3>();
  s.position.z() = -e0[3];
  const double dt = 1e-3;
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = k * dt;
    const Vec4 y = controlled_outputs(s).first;
    for (int i = 0; i < 4; ++i) {
      const double w = std::sqrt(g.kp[i]);  // kd = 2 sqrt(kp): e(t) = e0 (1 + w t) exp(-w t)
      const double analytic = e0[i] * (1.0 + w * t) * std::exp(-w * t);
      worst = std::max(worst, std::abs(-y[i] - analytic) / e0[i]);
    }
    const ControlOutput out = fl_inner_loop(s, a, OutputReference{}, g, kParams, Vec4::Zero(), false);
    if (out.singular) return {false, "singular decoupling matrix on the test tilt"};
    s = integrate_step(s, [&](double) { return a; }, [&](double) { return out.varpi_cmd; }, t, dt, kParams);
  }
  return {worst < 0.02, fmt("sup-norm deviation %.3g%% of the initial error over 2 s", 100 * worst)};
}

Verdict tracking_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const TrackLog log = run_tracking(SimConfig{}, kParams, Gains{}, make_preset_gait("gait1", kParams));
  const double elapsed = seconds_since(start);
  if (!log.completed()) return {false, fmt("aborted at t = %.3f s: %s", log.abort->time, log.abort->message.c_str())};
  const double revolution = 2 * M_PI / 0.1;
  const double t_end = log.rows.back().t;
  double late_error = 0.0, radial = 0.0;
  for (const TrackRow& r : log.rows) {
    if (r.t > 80.0) late_error = std::max(late_error, (r.ref.pos - r.state.position).norm());
    if (r.t >= t_end - revolution) radial = std::max(radial, std::abs(r.state.position.head<2>().norm() - 5.0));
  }
  return {t_end >= 120.0 - 1e-9 && late_error < 0.2 && radial < 0.2 && elapsed < 10.0,
          fmt("completed %.1f s, max error after 80 s %.4f m, max radial deviation over final revolution %.4f m, "
              "%.2f s",
              t_end, late_error, radial, elapsed)};
}

Verdict failure_reproduction(const fs::path& scratch) {
  std::string detail;
  bool pass = true;
  for (const char* name : {"gait2", "gait3"}) {
    const int code = cli({"--out", (scratch / name).string(), "--force", "track", "--preset", name});
    pass = pass && code == 4;
    detail += fmt("%s exit %d; ", name, code);
  }
  return {pass, detail + "expected 4"};
}

Verdict numerics_hygiene(const fs::path& scratch) {
  const Vec4 hover = kParams.hover_speed() * kParams.spin_sign;
  const double hover_norm = state_derivative(State{}, TiltAngles(), speeds_to_input(hover), kParams).to_vector().norm();

  auto free_response = [&](double dt) {
    State s;
    s.euler = Vec3(0.2, -0.1, 0.3);
    s.body_rates = Vec3(0.5, -0.4, 0.3);
    s.velocity = Vec3(1.0, 0.0, 0.5);
    auto alpha = [](double t) { return TiltAngles(0.2 * std::sin(t), -0.1, 0.3 * std::cos(2 * t), 0.1); };
    auto speed = [&](double t) -> Vec4 { return hover + Vec4(20 * std::sin(3 * t), 5, -10, 0); };
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) s = integrate_step(s, alpha, speed, k * dt, dt, kParams);
    return s.to_vector();
  };
  const double dt = 0.02;
  const Vec12 ref = free_response(dt / 64);
  const double order = std::log2((free_response(dt) - ref).norm() / (free_response(dt / 2) - ref).norm());

  for (const char* run : {"a", "b"})
    if (cli({"--out", (scratch / "repeat" / run).string(), "--force", "track", "--preset", "gait1"}) != 0)
      return {false, "repeat tracking run failed"};
  const std::string a = slurp(scratch / "repeat" / "a" / "track.csv");
  const bool identical = !a.empty() && a == slurp(scratch / "repeat" / "b" / "track.csv");
  fs::remove_all(scratch / "repeat");

  return {hover_norm < 1e-9 && order >= 3.5 && identical,
          fmt("hover derivative norm %.3g, measured order %.2f, repeated 120 s logs %s (%zu bytes)", hover_norm, order,
              identical ? "bit-identical" : "differ", a.size())};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "tiltrotor_acceptance";
  fs::create_directories(scratch);

  run(1, determinant_identity);
  run(2, yaw_invariance);
  run(3, two_branch_existence);
  run(4, planarity);
  run(5, robust_gaits_are_singularity_free);
  run(6, bias_degrades_robustness);
  run(7, exact_linearization);
  run(8, tracking_reproduction);
  run(9, [&] { return failure_reproduction(scratch); });
  run(10, [&] { return numerics_hygiene(scratch); });

  fs::remove_all(scratch);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
