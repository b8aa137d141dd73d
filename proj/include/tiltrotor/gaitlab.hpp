#pragma once

// Two-colour map solver, rectangular gaits, singular attitude curves and
// robustness metrics.
//
// A tilt configuration is "on the map" when the roll/pitch coefficients a and
// b of the determinant factorization both vanish, which leaves
// det(Delta) proportional to cos(roll) cos(pitch) c. For every (alpha1,
// alpha2) this happens on two colour sheets: blue, continuously connected to
// (alpha3, alpha4) = (0, 0) at the origin, and red, connected to (pi, pi).

#include <functional>
#include <string>
#include <vector>

#include "tiltrotor/linearization.hpp"
#include "tiltrotor/model.hpp"

namespace tiltrotor {

enum class Branch { kBlue, kRed };

const char* to_string(Branch branch);
/// Accepts "blue" or "red"; throws kInvalidInput otherwise.
Branch branch_from_string(const std::string& name);

struct ColorSolution {
  Eigen::Vector2d alpha12 = Eigen::Vector2d::Zero();
  // Lifted continuously along the colour sheet; not wrapped.
  Eigen::Vector2d alpha34 = Eigen::Vector2d::Zero();
  Branch color = Branch::kBlue;
  int residual_sign = 1;  // sign of c at the solution

  Vec4 lifted() const { return {alpha12.x(), alpha12.y(), alpha34.x(), alpha34.y()}; }
  TiltAngles tilt() const { return TiltAngles(lifted()); }
};

struct RootSolverOptions {
  int seeds_per_axis = 12;
  double fd_step = 1e-6;          // rad
  double cluster_radius = 1e-3;   // rad
  double tolerance = 1e-11;       // on (a, b) / coefficient_scale
  int max_iterations = 60;
  double degenerate_c = 1e-6;     // |c| / coefficient_scale below which a root is discarded
  double continuation_step = 0.02;  // rad
};

/// Every distinct root of a = b = 0 over the (alpha3, alpha4) torus found by
/// the multi-start solver, wrapped into [-pi, pi). Includes degenerate roots.
std::vector<Eigen::Vector2d> find_ab_roots(double alpha1, double alpha2, const Params& params,
                                           const RootSolverOptions& options = {});

/// Damped Newton on (a, b) from a seed. Returns false if it does not converge.
bool newton_ab(double alpha1, double alpha2, Eigen::Vector2d& alpha34, const Params& params,
               const RootSolverOptions& options = {});

/// The blue and red solutions for (alpha1, alpha2), in that order.
/// Throws kNoRoot or kDegenerate.
std::vector<ColorSolution> solve_color_pair(double alpha1, double alpha2, const Params& params,
                                            const RootSolverOptions& options = {});

/// Axis-aligned rectangular sample grid, inclusive of both ends.
struct Grid2D {
  double x_min = -1.55;
  double x_max = 1.55;
  double y_min = -1.55;
  double y_max = 1.55;
  int nx = 241;
  int ny = 241;

  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
  void validate() const;

  static Grid2D square(double half_range, int n) { return {-half_range, half_range, -half_range, half_range, n, n}; }
};

/// Least-squares plane value = c0 + c1 * alpha1 + c2 * alpha2.
struct PlaneFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rms = 0.0;
  double max_abs = 0.0;

  double operator()(double a1, double a2) const { return c0 + c1 * a1 + c2 * a2; }
};

struct ColorMap {
  Branch branch = Branch::kBlue;
  Grid2D grid;
  std::vector<ColorSolution> cells;  // row-major: alpha1 index outer
  PlaneFit alpha3_plane;
  PlaneFit alpha4_plane;

  const ColorSolution& at(int i, int j) const { return cells[static_cast<size_t>(i) * grid.ny + j]; }
};

/// Continuation over a grid in (alpha1, alpha2). Throws kContinuationBreak if
/// the tracked sheet jumps by more than 0.5 rad between neighbouring cells.
ColorMap color_map(const Grid2D& grid, Branch branch, const Params& params,
                   const RootSolverOptions& options = {});

struct GaitWaypoint {
  double t_frac = 0.0;
  Vec4 alpha = Vec4::Zero();  // lifted
};

struct Gait {
  double period = 10.0;  // s
  std::vector<GaitWaypoint> waypoints;
  Branch color = Branch::kBlue;
  double bias = 1.0;

  /// Throws kInvalidInput on broken invariants.
  void validate() const;
};

Gait make_rectangle_gait(const Eigen::Vector2d& center, const Eigen::Vector2d& half_extents,
                         double period, Branch branch, const Params& params,
                         int samples_per_edge = 50, const RootSolverOptions& options = {});

/// Scales alpha3 and alpha4 of every waypoint by factor in (0, 1].
Gait bias_gait(const Gait& gait, double factor);

/// Piecewise-linear, period-extended lifted schedule.
Vec4 sample_gait_lifted(const Gait& gait, double t);
TiltAngles sample_gait(const Gait& gait, double t);

struct GaitPreset {
  std::string name;
  Eigen::Vector2d center;
  Eigen::Vector2d half_extents;
  Branch branch;
  double period;
};

/// "gait1", "gait2" or "gait3".
GaitPreset gait_preset(const std::string& name);
Gait make_preset_gait(const std::string& name, const Params& params);

struct SingularCurveSet {
  std::vector<std::vector<Eigen::Vector2d>> polylines;  // (roll, pitch) vertices
  Grid2D grid;
  double tolerance = 0.0;  // bound on |g| at every vertex

  bool empty() const { return polylines.empty(); }
  size_t vertex_count() const;
};

/// Zero set of normalized_det over the attitude grid by marching squares,
/// with every vertex refined by bisection along its cell edge.
SingularCurveSet singular_curves(const DetCoefficients& coeffs, const Grid2D& grid);
SingularCurveSet singular_curves(const TiltAngles& alpha, const Params& params, const Grid2D& grid);

struct RobustnessReport {
  double area_fraction = 1.0;
  double hover_margin = 0.0;  // rad
};

/// Metrics over n_phases evenly spaced samples of the coefficient schedule,
/// phase k in [0, n_phases).
RobustnessReport robustness_report(const std::function<DetCoefficients(int)>& coefficients_at,
                                   const Grid2D& grid, int n_phases);
RobustnessReport robustness_report(const Gait& gait, const Params& params, const Grid2D& grid,
                                   int n_phases);

}  // namespace tiltrotor
