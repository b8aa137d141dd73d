// Marching squares over g(roll, pitch) and the robustness metrics built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "tiltrotor/error.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/parallel.hpp"

namespace tiltrotor {
namespace {

using Vec2 = Eigen::Vector2d;

struct Scan {
  SingularCurveSet curves;
  long cells_with_sign_change = 0;
  long cell_count = 0;
};

bool positive(double g) { return g >= 0.0; }

// Bisection between p (g_p) and q (g_q) of opposite sign classes.
Vec2 refine_crossing(const DetCoefficients& coeffs, Vec2 p, double g_p, Vec2 q, double tol) {
  if (std::abs(g_p) < tol) return p;
  for (int it = 0; it < 200; ++it) {
    const Vec2 mid = 0.5 * (p + q);
    const double g_mid = normalized_det(mid.x(), mid.y(), coeffs);
    if (std::abs(g_mid) < tol) return mid;
    if (mid == p || mid == q) break;
    if (positive(g_mid) == positive(g_p)) {
      p = mid;
      g_p = g_mid;
    } else {
      q = mid;
    }
  }
  // interval collapsed to adjacent doubles; take the smaller residual
  const double g_q = normalized_det(q.x(), q.y(), coeffs);
  return std::abs(g_p) <= std::abs(g_q) ? p : q;
}

Scan scan_zero_set(const DetCoefficients& coeffs, const Grid2D& grid) {
  grid.validate();
  const int nx = grid.nx, ny = grid.ny;
  std::vector<double> g(static_cast<size_t>(nx) * ny);
  auto value = [&](int i, int j) -> double& { return g[static_cast<size_t>(i) * ny + j]; };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) value(i, j) = normalized_det(grid.x(i), grid.y(j), coeffs);

  Scan scan;
  scan.curves.grid = grid;
  const double magnitude = std::max({std::abs(coeffs.a), std::abs(coeffs.b), std::abs(coeffs.c)});
  scan.curves.tolerance = 1e-10 * magnitude;
  scan.cell_count = static_cast<long>(nx - 1) * (ny - 1);
  if (magnitude == 0.0) return scan;  // g vanishes identically; no isolated curve

  // Edge ids: horizontal (i,j)-(i+1,j) -> i*ny + j; vertical (i,j)-(i,j+1) -> offset + i*(ny-1) + j.
  const long vertical_offset = static_cast<long>(nx - 1) * ny;
  auto h_edge = [&](int i, int j) { return static_cast<long>(i) * ny + j; };
  auto v_edge = [&](int i, int j) { return vertical_offset + static_cast<long>(i) * (ny - 1) + j; };

  std::unordered_map<long, Vec2> vertex;
  auto crossing = [&](long id, int i0, int j0, int i1, int j1) {
    auto it = vertex.find(id);
    if (it != vertex.end()) return id;
    const Vec2 p(grid.x(i0), grid.y(j0)), q(grid.x(i1), grid.y(j1));
    vertex.emplace(id, refine_crossing(coeffs, p, value(i0, j0), q, scan.curves.tolerance));
    return id;
  };

  std::vector<std::pair<long, long>> segments;
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      // corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1)
      const bool s0 = positive(value(i, j)), s1 = positive(value(i + 1, j));
      const bool s2 = positive(value(i + 1, j + 1)), s3 = positive(value(i, j + 1));
      if (s0 == s1 && s1 == s2 && s2 == s3) continue;
      ++scan.cells_with_sign_change;
      long bottom = -1, right = -1, top = -1, left = -1;
      if (s0 != s1) bottom = crossing(h_edge(i, j), i, j, i + 1, j);
      if (s1 != s2) right = crossing(v_edge(i + 1, j), i + 1, j, i + 1, j + 1);
      if (s3 != s2) top = crossing(h_edge(i, j + 1), i, j + 1, i + 1, j + 1);
      if (s0 != s3) left = crossing(v_edge(i, j), i, j, i, j + 1);

      std::vector<long> present;
      for (long e : {bottom, right, top, left})
        if (e >= 0) present.push_back(e);
      if (present.size() == 2) {
        segments.emplace_back(present[0], present[1]);
        continue;
      }
      // saddle: resolve with the cell-centre value
      const double centre =
          normalized_det(0.5 * (grid.x(i) + grid.x(i + 1)), 0.5 * (grid.y(j) + grid.y(j + 1)), coeffs);
      if (positive(centre) == s0) {
        segments.emplace_back(bottom, right);
        segments.emplace_back(top, left);
      } else {
        segments.emplace_back(left, bottom);
        segments.emplace_back(right, top);
      }
    }
  }

  // Chain segments into polylines through shared edge vertices.
  std::unordered_map<long, std::vector<size_t>> incident;
  for (size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].first].push_back(s);
    incident[segments[s].second].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  auto next_segment = [&](long edge) -> long {
    for (size_t s : incident[edge])
      if (!used[s]) return static_cast<long>(s);
    return -1;
  };
  auto walk = [&](long edge, std::vector<long>& chain) {
    for (long s = next_segment(edge); s >= 0; s = next_segment(edge)) {
      used[s] = true;
      edge = segments[s].first == edge ? segments[s].second : segments[s].first;
      chain.push_back(edge);
    }
  };
  // Open chains start at edges with a single incident segment (grid boundary).
  std::vector<long> starts;
  for (const auto& [edge, list] : incident)
    if (list.size() == 1) starts.push_back(edge);
  std::sort(starts.begin(), starts.end());
  auto emit = [&](const std::vector<long>& chain) {
    std::vector<Vec2> line;
    line.reserve(chain.size());
    for (long e : chain) line.push_back(vertex.at(e));
    scan.curves.polylines.push_back(std::move(line));
  };
  for (long start : starts) {
    if (next_segment(start) < 0) continue;
    std::vector<long> chain{start};
    walk(start, chain);
    emit(chain);
  }
  for (size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    const long start = segments[s].first;
    std::vector<long> chain{start};
    walk(start, chain);  // closed loop returns to start
    emit(chain);
  }
  return scan;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

}  // namespace

size_t SingularCurveSet::vertex_count() const {
  size_t n = 0;
  for (const auto& line : polylines) n += line.size();
  return n;
}

SingularCurveSet singular_curves(const DetCoefficients& coeffs, const Grid2D& grid) {
  return scan_zero_set(coeffs, grid).curves;
}

SingularCurveSet singular_curves(const TiltAngles& alpha, const Params& params, const Grid2D& grid) {
  return singular_curves(det_decomposition(alpha, params), grid);
}

RobustnessReport robustness_report(const std::function<DetCoefficients(int)>& coefficients_at,
                                   const Grid2D& grid, int n_phases) {
  if (n_phases < 1) throw Error(ErrorCode::kInvalidInput, "n_phases must be >= 1");
  grid.validate();
  const double diagonal = std::hypot(grid.x_max - grid.x_min, grid.y_max - grid.y_min);
  std::vector<RobustnessReport> per_phase(n_phases);
  parallel_for(n_phases, [&](int k) {
    const Scan scan = scan_zero_set(coefficients_at(k), grid);
    RobustnessReport r;
    r.area_fraction = 1.0 - static_cast<double>(scan.cells_with_sign_change) / scan.cell_count;
    r.hover_margin = diagonal;
    const Vec2 origin = Vec2::Zero();
    for (const auto& line : scan.curves.polylines) {
      if (line.size() == 1) r.hover_margin = std::min(r.hover_margin, line.front().norm());
      for (size_t v = 0; v + 1 < line.size(); ++v)
        r.hover_margin = std::min(r.hover_margin, point_segment_distance(origin, line[v], line[v + 1]));
    }
    per_phase[k] = r;
  });
  RobustnessReport out{1.0, diagonal};
  for (const auto& r : per_phase) {
    out.area_fraction = std::min(out.area_fraction, r.area_fraction);
    out.hover_margin = std::min(out.hover_margin, r.hover_margin);
  }
  return out;
}

RobustnessReport robustness_report(const Gait& gait, const Params& params, const Grid2D& grid,
                                   int n_phases) {
  return robustness_report(
      [&](int k) {
        return det_decomposition(sample_gait(gait, gait.period * k / n_phases), params);
      },
      grid, n_phases);
}

}  // namespace tiltrotor
