#include "tiltrotor/linearization.hpp"

#include <cmath>

namespace tiltrotor {

double DecouplingMatrix::scaled_norm() const {
  double log_sum = 0.0;
  for (int i = 0; i < 4; ++i) log_sum += std::log(delta.row(i).norm());
  return std::exp(log_sum / 4.0);
}

bool DecouplingMatrix::is_singular(double epsilon) const {
  const double n = scaled_norm();
  if (!(n > 0.0)) return true;
  return std::abs(determinant()) < epsilon * n * n * n * n;
}

DecouplingMatrix decoupling_matrix(const Vec3& euler, const TiltAngles& alpha, const Params& params) {
  const Mat3 t = euler_rate_matrix(euler);
  DecouplingMatrix out;
  out.delta.topRows<3>() = t * params.inertia.llt().solve(torque_matrix(alpha, params));
  out.delta.row(3) = rotation_row3(euler[0], euler[1]) * thrust_matrix(alpha, params) / params.mass;
  return out;
}

Mat3 euler_rate_matrix_dot(const Vec3& euler, const Vec3& euler_dot) {
  const double cr = std::cos(euler[0]), sr = std::sin(euler[0]);
  const double cp = std::cos(euler[1]), tp = std::tan(euler[1]);
  const double sec = 1.0 / cp;

  Mat3 d_roll;
  d_roll << 0.0, cr * tp, -sr * tp,
            0.0, -sr, -cr,
            0.0, cr * sec, -sr * sec;
  Mat3 d_pitch;
  d_pitch << 0.0, sr * sec * sec, cr * sec * sec,
             0.0, 0.0, 0.0,
             0.0, sr * tp * sec, cr * tp * sec;
  // T does not depend on yaw.
  return d_roll * euler_dot[0] + d_pitch * euler_dot[1];
}

Vec4 drift_vector(const State& state, const Params& params) {
  const Mat3 t = euler_rate_matrix(state.euler);
  const Vec3 euler_dot = t * state.body_rates;
  Vec4 b;
  b.head<3>() = euler_rate_matrix_dot(state.euler, euler_dot) * state.body_rates;
  b[3] = -params.gravity;
  return b;
}

DetCoefficients det_decomposition(const TiltAngles& alpha, const Params& params) {
  const Mat34 tau = torque_matrix(alpha, params);
  const Mat34 f = thrust_matrix(alpha, params);
  DetCoefficients out;
  for (int j = 0; j < 4; ++j) {
    Mat3 sub;
    int col = 0;
    for (int k = 0; k < 4; ++k) {
      if (k != j) sub.col(col++) = tau.col(k);
    }
    out.minors[j] = sub.determinant();
  }
  // Cofactor sign for row 4, column j+1 is (-1)^(4 + j + 1).
  const Vec4 signed_minors(-out.minors[0], out.minors[1], -out.minors[2], out.minors[3]);
  out.a = f.row(0).dot(signed_minors);
  out.b = f.row(1).dot(signed_minors);
  out.c = f.row(2).dot(signed_minors);
  return out;
}

double normalized_det(double roll, double pitch, const DetCoefficients& coeffs) {
  const double cp = std::cos(pitch);
  return -std::sin(pitch) * coeffs.a + std::sin(roll) * cp * coeffs.b + std::cos(roll) * cp * coeffs.c;
}

double coefficient_scale(const Params& params) {
  const double lever = params.arm_length * params.k_f + params.k_m;
  return params.k_f * lever * lever * lever;
}

}  // namespace tiltrotor
