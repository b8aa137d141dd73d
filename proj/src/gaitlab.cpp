#include "tiltrotor/gaitlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tiltrotor/error.hpp"

namespace tiltrotor {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxNewtonStep = 0.5;
constexpr double kMaxSheetJump = 0.5;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

Vec2 ab_residual(double a1, double a2, const Vec2& a34, const Params& params, double scale) {
  const DetCoefficients c = det_decomposition(TiltAngles(a1, a2, a34.x(), a34.y()), params);
  return {c.a / scale, c.b / scale};
}

Mat2 ab_jacobian(double a1, double a2, const Vec2& a34, const Params& params, double scale,
                 double h) {
  Mat2 j;
  for (int k = 0; k < 2; ++k) {
    Vec2 plus = a34, minus = a34;
    plus[k] += h;
    minus[k] -= h;
    j.col(k) = (ab_residual(a1, a2, plus, params, scale) - ab_residual(a1, a2, minus, params, scale)) /
               (2.0 * h);
  }
  return j;
}

double torus_distance(const Vec2& p, const Vec2& q) {
  return std::hypot(wrap_angle(p.x() - q.x()), wrap_angle(p.y() - q.y()));
}

// Shifts q by multiples of 2 pi to lie nearest to reference.
Vec2 lift_near(const Vec2& q, const Vec2& reference) {
  return {reference.x() + wrap_angle(q.x() - reference.x()),
          reference.y() + wrap_angle(q.y() - reference.y())};
}

double c_ratio(double a1, double a2, const Vec2& a34, const Params& params) {
  return det_decomposition(TiltAngles(a1, a2, a34.x(), a34.y()), params).c / coefficient_scale(params);
}

struct TrackResult {
  Vec2 alpha34;
  double min_abs_det_jacobian = std::numeric_limits<double>::infinity();
};

// Follows one root of a = b = 0 while (alpha1, alpha2) moves on a straight
// segment, with secant prediction and step halving on Newton failure.
TrackResult track_segment(const Vec2& from, const Vec2& to, const Vec2& start34, const Params& params,
                          const RootSolverOptions& options) {
  TrackResult out{start34};
  const double length = (to - from).norm();
  if (length == 0.0) return out;
  const double scale = coefficient_scale(params);
  double s = 0.0;
  double ds = std::min(options.continuation_step, length);
  Vec2 previous = start34;
  Vec2 velocity = Vec2::Zero();  // d(alpha34)/ds from the last accepted step
  while (s < length) {
    const double step = std::min(ds, length - s);
    const Vec2 a12 = from + (to - from) * ((s + step) / length);
    Vec2 guess = previous + velocity * step;
    if (newton_ab(a12.x(), a12.y(), guess, params, options) && (guess - previous).norm() < kMaxSheetJump) {
      velocity = (guess - previous) / step;
      previous = guess;
      s += step;
      const double det_j = std::abs(ab_jacobian(a12.x(), a12.y(), guess, params, scale, options.fd_step).determinant());
      out.min_abs_det_jacobian = std::min(out.min_abs_det_jacobian, det_j);
      ds = std::min(options.continuation_step, 2.0 * step);
    } else {
      ds = 0.5 * step;
      if (ds < 1e-7) {
        std::ostringstream os;
        os << "root tracking stalled at (alpha1, alpha2) = (" << a12.x() << ", " << a12.y() << ")";
        throw Error(ErrorCode::kContinuationBreak, os.str());
      }
    }
  }
  out.alpha34 = previous;
  return out;
}

// Transports an origin anchor to (alpha1, alpha2) along the two L-shaped
// paths and keeps the one whose Jacobian stays better conditioned, which
// keeps the tracker away from crossings with degenerate root families.
Vec2 transport_anchor(const Vec2& anchor, double a1, double a2, const Params& params,
                      const RootSolverOptions& options) {
  const Vec2 origin(0.0, 0.0), target(a1, a2);
  const Vec2 corners[2] = {Vec2(a1, 0.0), Vec2(0.0, a2)};
  TrackResult best;
  best.min_abs_det_jacobian = -1.0;
  for (const Vec2& corner : corners) {
    try {
      const TrackResult leg1 = track_segment(origin, corner, anchor, params, options);
      TrackResult leg2 = track_segment(corner, target, leg1.alpha34, params, options);
      leg2.min_abs_det_jacobian = std::min(leg1.min_abs_det_jacobian, leg2.min_abs_det_jacobian);
      if (leg2.min_abs_det_jacobian > best.min_abs_det_jacobian) best = leg2;
    } catch (const Error&) {
      // the other leg ordering may still succeed
    }
  }
  if (best.min_abs_det_jacobian < 0.0) {
    std::ostringstream os;
    os << "cannot continue the colour sheet to (" << a1 << ", " << a2 << ")";
    throw Error(ErrorCode::kContinuationBreak, os.str());
  }
  return best.alpha34;
}

Vec2 branch_anchor(Branch branch) { return branch == Branch::kBlue ? Vec2(0.0, 0.0) : Vec2(kPi, kPi); }

PlaneFit fit_plane(const std::vector<ColorSolution>& cells, int component) {
  const int n = static_cast<int>(cells.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    design.row(i) << 1.0, cells[i].alpha12.x(), cells[i].alpha12.y();
    target[i] = cells[i].alpha34[component];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd residual = design * coef - target;
  PlaneFit fit;
  fit.c0 = coef[0];
  fit.c1 = coef[1];
  fit.c2 = coef[2];
  fit.rms = n > 0 ? std::sqrt(residual.squaredNorm() / n) : 0.0;
  fit.max_abs = n > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;
  return fit;
}

}  // namespace

const char* to_string(Branch branch) { return branch == Branch::kBlue ? "blue" : "red"; }

Branch branch_from_string(const std::string& name) {
  if (name == "blue") return Branch::kBlue;
  if (name == "red") return Branch::kRed;
  throw Error(ErrorCode::kInvalidInput, "unknown branch '" + name + "' (expected blue or red)");
}

bool newton_ab(double alpha1, double alpha2, Vec2& alpha34, const Params& params,
               const RootSolverOptions& options) {
  const double scale = coefficient_scale(params);
  Vec2 x = alpha34;
  Vec2 r = ab_residual(alpha1, alpha2, x, params, scale);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (r.norm() < options.tolerance) break;
    const Mat2 j = ab_jacobian(alpha1, alpha2, x, params, scale, options.fd_step);
    const Eigen::FullPivLU<Mat2> lu(j);
    if (!lu.isInvertible()) return false;
    Vec2 dx = -lu.solve(r);
    if (!dx.allFinite()) return false;
    if (dx.norm() > kMaxNewtonStep) dx *= kMaxNewtonStep / dx.norm();
    // backtracking on the residual norm
    double lambda = 1.0;
    Vec2 trial = x + dx;
    Vec2 r_trial = ab_residual(alpha1, alpha2, trial, params, scale);
    while (r_trial.norm() >= r.norm() && lambda > 1e-4) {
      lambda *= 0.5;
      trial = x + lambda * dx;
      r_trial = ab_residual(alpha1, alpha2, trial, params, scale);
    }
    if (r_trial.norm() >= r.norm()) break;
    x = trial;
    r = r_trial;
  }
  if (!(r.norm() < options.tolerance)) return false;
  alpha34 = x;
  return true;
}

std::vector<Vec2> find_ab_roots(double alpha1, double alpha2, const Params& params,
                                const RootSolverOptions& options) {
  std::vector<Vec2> roots;
  const int n = options.seeds_per_axis;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec2 x(-kPi + (i + 0.5) * 2.0 * kPi / n, -kPi + (j + 0.5) * 2.0 * kPi / n);
      if (!newton_ab(alpha1, alpha2, x, params, options)) continue;
      const Vec2 wrapped(wrap_angle(x.x()), wrap_angle(x.y()));
      const bool known = std::any_of(roots.begin(), roots.end(), [&](const Vec2& r) {
        return torus_distance(r, wrapped) < options.cluster_radius;
      });
      if (!known) roots.push_back(wrapped);
    }
  }
  return roots;
}

std::vector<ColorSolution> solve_color_pair(double alpha1, double alpha2, const Params& params,
                                            const RootSolverOptions& options) {
  const std::vector<Vec2> all_roots = find_ab_roots(alpha1, alpha2, params, options);
  std::vector<Vec2> robust;
  for (const Vec2& r : all_roots) {
    if (std::abs(c_ratio(alpha1, alpha2, r, params)) >= options.degenerate_c) robust.push_back(r);
  }
  std::ostringstream where;
  where << "(alpha1, alpha2) = (" << alpha1 << ", " << alpha2 << ")";
  if (robust.empty()) {
    // report how close the best seed got
    double best = std::numeric_limits<double>::infinity();
    const double scale = coefficient_scale(params);
    for (int i = 0; i < options.seeds_per_axis; ++i) {
      for (int j = 0; j < options.seeds_per_axis; ++j) {
        const double step = 2.0 * kPi / options.seeds_per_axis;
        const Vec2 x(-kPi + (i + 0.5) * step, -kPi + (j + 0.5) * step);
        best = std::min(best, ab_residual(alpha1, alpha2, x, params, scale).norm());
      }
    }
    std::ostringstream os;
    os << "no non-degenerate root at " << where.str() << ", best seed residual " << best;
    throw Error(ErrorCode::kNoRoot, os.str());
  }

  std::vector<ColorSolution> out;
  for (Branch branch : {Branch::kBlue, Branch::kRed}) {
    const Vec2 tracked = transport_anchor(branch_anchor(branch), alpha1, alpha2, params, options);
    const auto match = std::find_if(robust.begin(), robust.end(), [&](const Vec2& r) {
      return torus_distance(r, tracked) < options.cluster_radius;
    });
    if (match == robust.end()) {
      throw Error(ErrorCode::kNoRoot, std::string(to_string(branch)) +
                                          " sheet not confirmed by the multi-start solver at " +
                                          where.str());
    }
    ColorSolution sol;
    sol.alpha12 = Vec2(alpha1, alpha2);
    sol.alpha34 = lift_near(*match, tracked);
    sol.color = branch;
    sol.residual_sign = c_ratio(alpha1, alpha2, *match, params) > 0.0 ? 1 : -1;
    out.push_back(sol);
  }
  const int same_residual = static_cast<int>(std::count_if(robust.begin(), robust.end(), [&](const Vec2& r) {
    return (c_ratio(alpha1, alpha2, r, params) > 0.0 ? 1 : -1) == out.front().residual_sign;
  }));
  if (same_residual > 2) {
    std::ostringstream os;
    os << same_residual << " root clusters share the residual sign at " << where.str() << ":";
    for (const Vec2& r : robust) os << " (" << r.x() << ", " << r.y() << ")";
    throw Error(ErrorCode::kDegenerate, os.str());
  }
  return out;
}

void Grid2D::validate() const {
  if (nx < 2 || ny < 2) throw Error(ErrorCode::kInvalidInput, "grid needs at least 2x2 samples");
  if (!(x_max > x_min && y_max > y_min)) throw Error(ErrorCode::kInvalidInput, "grid range is empty");
}

ColorMap color_map(const Grid2D& grid, Branch branch, const Params& params,
                   const RootSolverOptions& options) {
  grid.validate();
  if (grid.x_min < -kPi / 2 || grid.x_max > kPi / 2 || grid.y_min < -kPi / 2 || grid.y_max > kPi / 2)
    throw Error(ErrorCode::kInvalidInput, "colour map grid must stay inside [-pi/2, pi/2]^2");

  ColorMap map;
  map.branch = branch;
  map.grid = grid;
  map.cells.resize(static_cast<size_t>(grid.nx) * grid.ny);

  const Vec2 start34 = transport_anchor(branch_anchor(branch), grid.x(0), grid.y(0), params, options);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double a1 = grid.x(i), a2 = grid.y(j);
      Vec2 seed;
      if (i == 0 && j == 0) {
        seed = start34;
      } else if (j == 0) {
        seed = map.at(i - 1, 0).alpha34;
      } else {
        seed = map.at(i, j - 1).alpha34;
      }
      Vec2 x = seed;
      if (!newton_ab(a1, a2, x, params, options) || (x - seed).norm() > kMaxSheetJump) {
        std::ostringstream os;
        os << to_string(branch) << " sheet breaks at (alpha1, alpha2) = (" << a1 << ", " << a2 << ")";
        throw Error(ErrorCode::kContinuationBreak, os.str());
      }
      ColorSolution& cell = map.cells[static_cast<size_t>(i) * grid.ny + j];
      cell.alpha12 = Vec2(a1, a2);
      cell.alpha34 = x;
      cell.color = branch;
      cell.residual_sign = c_ratio(a1, a2, x, params) > 0.0 ? 1 : -1;
    }
  }
  map.alpha3_plane = fit_plane(map.cells, 0);
  map.alpha4_plane = fit_plane(map.cells, 1);
  return map;
}

void Gait::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidInput, "gait: " + msg); };
  if (!(period > 0.0)) fail("period must be positive");
  if (!(bias > 0.0 && bias <= 1.0)) fail("bias must lie in (0, 1]");
  if (waypoints.size() < 2) fail("need at least two waypoints");
  if (waypoints.front().t_frac != 0.0 || waypoints.back().t_frac != 1.0)
    fail("time fractions must run from 0 to 1");
  for (size_t k = 1; k < waypoints.size(); ++k) {
    if (!(waypoints[k].t_frac > waypoints[k - 1].t_frac)) fail("time fractions must strictly increase");
  }
  for (const auto& wp : waypoints) {
    if (!wp.alpha.allFinite()) fail("angles must be finite");
  }
  if ((waypoints.front().alpha - waypoints.back().alpha).cwiseAbs().maxCoeff() > 1e-6)
    fail("waypoints must close (first = last)");
}

Gait make_rectangle_gait(const Vec2& center, const Vec2& half_extents, double period, Branch branch,
                         const Params& params, int samples_per_edge, const RootSolverOptions& options) {
  if (!(period > 0.0)) throw Error(ErrorCode::kInvalidInput, "gait period must be positive");
  if ((half_extents.array() < 0.0).any()) throw Error(ErrorCode::kInvalidInput, "half extents must be >= 0");
  if (samples_per_edge < 1) throw Error(ErrorCode::kInvalidInput, "samples_per_edge must be >= 1");

  Gait gait;
  gait.period = period;
  gait.color = branch;

  const Vec2 lower_left = center - half_extents;
  const std::vector<ColorSolution> pair = solve_color_pair(lower_left.x(), lower_left.y(), params, options);
  const Vec2 start34 = pair[branch == Branch::kBlue ? 0 : 1].alpha34;
  auto waypoint = [](double t, const Vec2& a12, const Vec2& a34) {
    return GaitWaypoint{t, Vec4(a12.x(), a12.y(), a34.x(), a34.y())};
  };

  const double perimeter = 4.0 * (half_extents.x() + half_extents.y());
  if (perimeter == 0.0) {
    gait.waypoints = {waypoint(0.0, lower_left, start34), waypoint(1.0, lower_left, start34)};
    return gait;
  }

  // counterclockwise in the (alpha1, alpha2) plane from the lower-left corner
  const Vec2 corners[5] = {lower_left, center + Vec2(half_extents.x(), -half_extents.y()),
                           center + half_extents, center + Vec2(-half_extents.x(), half_extents.y()),
                           lower_left};
  gait.waypoints.push_back(waypoint(0.0, lower_left, start34));
  Vec2 current34 = start34;
  double travelled = 0.0;
  for (int e = 0; e < 4; ++e) {
    const Vec2 from = corners[e], to = corners[e + 1];
    const double edge = (to - from).norm();
    if (edge == 0.0) continue;
    for (int k = 1; k <= samples_per_edge; ++k) {
      const Vec2 a0 = from + (to - from) * (static_cast<double>(k - 1) / samples_per_edge);
      const Vec2 a1 = from + (to - from) * (static_cast<double>(k) / samples_per_edge);
      current34 = track_segment(a0, a1, current34, params, options).alpha34;
      travelled += edge / samples_per_edge;
      gait.waypoints.push_back(waypoint(travelled / perimeter, a1, current34));
    }
  }
  GaitWaypoint& last = gait.waypoints.back();
  if ((last.alpha.tail<2>() - start34).cwiseAbs().maxCoeff() > 1e-6) {
    std::ostringstream os;
    os << "lifted gait does not close: end (" << last.alpha[2] << ", " << last.alpha[3]
       << ") vs start (" << start34.x() << ", " << start34.y() << ")";
    throw Error(ErrorCode::kContinuationBreak, os.str());
  }
  last.t_frac = 1.0;
  last.alpha = gait.waypoints.front().alpha;
  return gait;
}

Gait bias_gait(const Gait& gait, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw Error(ErrorCode::kInvalidInput, "bias factor must lie in (0, 1]");
  Gait out = gait;
  out.bias = gait.bias * factor;
  for (auto& wp : out.waypoints) wp.alpha.tail<2>() *= factor;
  return out;
}

Vec4 sample_gait_lifted(const Gait& gait, double t) {
  const auto& wps = gait.waypoints;
  double phase = std::fmod(t / gait.period, 1.0);
  if (phase < 0.0) phase += 1.0;
  const auto upper = std::upper_bound(wps.begin(), wps.end(), phase,
                                      [](double p, const GaitWaypoint& wp) { return p < wp.t_frac; });
  if (upper == wps.begin()) return wps.front().alpha;
  if (upper == wps.end()) return wps.back().alpha;
  const GaitWaypoint& hi = *upper;
  const GaitWaypoint& lo = *(upper - 1);
  const double s = (phase - lo.t_frac) / (hi.t_frac - lo.t_frac);
  return lo.alpha + s * (hi.alpha - lo.alpha);
}

TiltAngles sample_gait(const Gait& gait, double t) { return TiltAngles(sample_gait_lifted(gait, t)); }

GaitPreset gait_preset(const std::string& name) {
  if (name == "gait1") return {name, Vec2(-0.3, 0.3), Vec2(0.2, 0.2), Branch::kBlue, 10.0};
  if (name == "gait2") return {name, Vec2(-0.3, 0.3), Vec2(0.2, 0.2), Branch::kRed, 10.0};
  if (name == "gait3") return {name, Vec2(0.3, -0.3), Vec2(0.15, 0.15), Branch::kRed, 10.0};
  throw Error(ErrorCode::kInvalidInput, "unknown gait preset '" + name + "'");
}

Gait make_preset_gait(const std::string& name, const Params& params) {
  const GaitPreset p = gait_preset(name);
  return make_rectangle_gait(p.center, p.half_extents, p.period, p.branch, params);
}

}  // namespace tiltrotor
