#pragma once

// Decoupling matrix of the (roll, pitch, yaw, altitude) feedback
// linearization and the attitude factorization of its determinant.

#include "tiltrotor/model.hpp"

namespace tiltrotor {

/// Default relative threshold of the scale-aware singularity test.
inline constexpr double kSingularEpsilon = 1e-8;

/// Rows 0-2 map w to euler angle accelerations, row 3 to vertical acceleration.
struct DecouplingMatrix {
  Mat4 delta;

  double determinant() const { return delta.determinant(); }
  /// Geometric mean of the four row norms.
  double scaled_norm() const;
  /// |det| < epsilon * scaled_norm()^4
  bool is_singular(double epsilon = kSingularEpsilon) const;
};

/// Cofactor expansion of det(Delta) along the altitude row.
///
/// minors[j] is the determinant of the torque matrix with column j removed.
/// a, b, c pair those minors with rows 0, 1, 2 of the thrust matrix, so that
///   m * cos(pitch) * det(I_B) * det(Delta) = -sin(pitch) a + sin(roll) cos(pitch) b
///                                            + cos(roll) cos(pitch) c.
struct DetCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Vec4 minors = Vec4::Zero();
};

DecouplingMatrix decoupling_matrix(const Vec3& euler, const TiltAngles& alpha, const Params& params);

/// Drift of (roll, pitch, yaw, Z) second derivatives at w = 0.
Vec4 drift_vector(const State& state, const Params& params);

DetCoefficients det_decomposition(const TiltAngles& alpha, const Params& params);

/// g(roll, pitch) whose zero set equals that of det(Delta) for |pitch| < pi/2.
double normalized_det(double roll, double pitch, const DetCoefficients& coeffs);

/// Natural magnitude of a, b, c: K_f (L K_f + K_m)^3.
double coefficient_scale(const Params& params);

/// Time derivative of euler_rate_matrix along euler_dot.
Mat3 euler_rate_matrix_dot(const Vec3& euler, const Vec3& euler_dot);

}  // namespace tiltrotor
