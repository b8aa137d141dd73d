#pragma once

// Rigid-body model of a quadrotor whose four thrust units tilt about their
// arms. Positions and velocities live in the world frame (Z up), body rates
// in the body frame. Attitude uses Z-Y-X Euler angles (yaw, pitch, roll).

#include <Eigen/Dense>

#include <functional>

namespace tiltrotor {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Guard band (rad) kept from |pitch| = pi/2 when evaluating Euler-rate maps.
inline constexpr double kRepresentationGuard = 1e-3;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

struct Params {
  double mass = 1.0;           // kg
  double gravity = 9.81;       // m/s^2
  double k_f = 8.048e-6;       // N s^2 / rad^2
  double k_m = 2.423e-7;       // N m s^2 / rad^2
  double arm_length = 0.3;     // m
  Mat3 inertia = Eigen::Vector3d(0.01, 0.01, 0.02).asDiagonal();
  double omega_lo = 15.0;      // rad/s
  double omega_hi = 0.0;       // rad/s; 0 selects 1.5x the hover speed
  Vec4 spin_sign = Vec4(-1.0, 1.0, -1.0, 1.0);
  // When false a rotor only spins in its nominal direction, so the
  // magnitude floor omega_lo is applied along spin_sign.
  bool reversible_rotors = false;

  /// Rotor speed magnitude that balances gravity with four vertical rotors.
  double hover_speed() const;

  /// Throws Error(kInvalidInput) when an invariant is violated. Resolves
  /// the omega_hi default before checking.
  Params& validate();

  static Params defaults();
};

struct State {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 euler = Vec3::Zero();  // (roll, pitch, yaw)
  Vec3 body_rates = Vec3::Zero();

  Vec12 to_vector() const;
  static State from_vector(const Vec12& v);
};

/// Four tilting angles, each stored in [-pi, pi).
class TiltAngles {
 public:
  TiltAngles() : values_(Vec4::Zero()) {}
  explicit TiltAngles(const Vec4& raw);
  TiltAngles(double a1, double a2, double a3, double a4) : TiltAngles(Vec4(a1, a2, a3, a4)) {}

  const Vec4& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }

 private:
  Vec4 values_;
};

Mat34 thrust_matrix(const TiltAngles& alpha, const Params& params);
Mat34 torque_matrix(const TiltAngles& alpha, const Params& params);

/// R = Rz(yaw) * Ry(pitch) * Rx(roll), mapping body vectors to world.
Mat3 rotation_matrix(const Vec3& euler);

/// Third row of rotation_matrix; independent of yaw.
Eigen::RowVector3d rotation_row3(double roll, double pitch);

/// T with euler_dot = T * body_rates. Throws kRepresentationSingular when
/// |pitch| >= pi/2 - kRepresentationGuard.
Mat3 euler_rate_matrix(const Vec3& euler);

/// w_i = varpi_i * |varpi_i|
Vec4 speeds_to_input(const Vec4& varpi);
/// varpi_i = sign(w_i) * sqrt(|w_i|)
Vec4 input_to_speeds(const Vec4& w);

State state_derivative(const State& state, const TiltAngles& alpha, const Vec4& w,
                       const Params& params);

using TiltSchedule = std::function<TiltAngles(double)>;
using SpeedSchedule = std::function<Vec4(double)>;

/// One classical RK4 step of length dt starting at time t.
State integrate_step(const State& state, const TiltSchedule& alpha_of_t,
                     const SpeedSchedule& varpi_of_t, double t, double dt,
                     const Params& params);

}  // namespace tiltrotor
