#include "tiltrotor/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tiltrotor/error.hpp"

namespace tiltrotor {

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod rounding can land exactly on +pi
  if (wrapped >= std::numbers::pi) wrapped -= two_pi;
  return wrapped;
}

double Params::hover_speed() const { return std::sqrt(mass * gravity / (4.0 * k_f)); }

Params& Params::validate() {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidInput, msg); };
  if (!(mass > 0.0)) fail("mass must be positive");
  if (!(gravity > 0.0)) fail("gravity must be positive");
  if (!(k_f > 0.0)) fail("k_f must be positive");
  if (!(k_m > 0.0)) fail("k_m must be positive");
  if (!(arm_length > 0.0)) fail("arm_length must be positive");
  if (!inertia.allFinite() || (inertia - inertia.transpose()).norm() > 1e-12 * inertia.norm())
    fail("inertia must be symmetric");
  if (Eigen::LLT<Mat3>(inertia).info() != Eigen::Success) fail("inertia must be positive definite");
  if (omega_hi == 0.0) omega_hi = 1.5 * hover_speed();
  if (!(omega_lo >= 0.0 && omega_lo < omega_hi)) fail("need 0 <= omega_lo < omega_hi");
  if (!(4.0 * k_f * omega_hi * omega_hi > mass * gravity)) {
    std::ostringstream os;
    os << "omega_hi=" << omega_hi << " cannot lift the vehicle";
    fail(os.str());
  }
  for (int i = 0; i < 4; ++i) {
    if (std::abs(spin_sign[i]) != 1.0) fail("spin_sign entries must be +1 or -1");
  }
  return *this;
}

Params Params::defaults() {
  Params p;
  p.validate();
  return p;
}

Vec12 State::to_vector() const {
  Vec12 v;
  v << position, velocity, euler, body_rates;
  return v;
}

State State::from_vector(const Vec12& v) {
  State s;
  s.position = v.segment<3>(0);
  s.velocity = v.segment<3>(3);
  s.euler = v.segment<3>(6);
  s.body_rates = v.segment<3>(9);
  return s;
}

TiltAngles::TiltAngles(const Vec4& raw) : values_(raw.unaryExpr([](double a) { return wrap_angle(a); })) {}

Mat34 thrust_matrix(const TiltAngles& alpha, const Params& params) {
  const Vec4 s = alpha.values().array().sin();
  const Vec4 c = alpha.values().array().cos();
  const double kf = params.k_f;
  Mat34 f;
  f << 0.0, kf * s[1], 0.0, -kf * s[3],
       kf * s[0], 0.0, -kf * s[2], 0.0,
       -kf * c[0], kf * c[1], -kf * c[2], kf * c[3];
  return f;
}

Mat34 torque_matrix(const TiltAngles& alpha, const Params& params) {
  const Vec4 s = alpha.values().array().sin();
  const Vec4 c = alpha.values().array().cos();
  const double lkf = params.arm_length * params.k_f;
  const double km = params.k_m;
  Mat34 t;
  t << 0.0, lkf * c[1] - km * s[1], 0.0, -lkf * c[3] + km * s[3],
       lkf * c[0] + km * s[0], 0.0, -lkf * c[2] - km * s[2], 0.0,
       lkf * s[0] - km * c[0], -lkf * s[1] - km * c[1], lkf * s[2] - km * c[2], -lkf * s[3] - km * c[3];
  return t;
}

Mat3 rotation_matrix(const Vec3& euler) {
  const double cr = std::cos(euler[0]), sr = std::sin(euler[0]);
  const double cp = std::cos(euler[1]), sp = std::sin(euler[1]);
  const double cy = std::cos(euler[2]), sy = std::sin(euler[2]);
  Mat3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  return r;
}

Eigen::RowVector3d rotation_row3(double roll, double pitch) {
  return {-std::sin(pitch), std::sin(roll) * std::cos(pitch), std::cos(roll) * std::cos(pitch)};
}

Mat3 euler_rate_matrix(const Vec3& euler) {
  const double pitch = euler[1];
  if (!(std::abs(pitch) < std::numbers::pi / 2 - kRepresentationGuard)) {
    std::ostringstream os;
    os << "pitch " << pitch << " rad is within the guard band of +-pi/2";
    throw Error(ErrorCode::kRepresentationSingular, os.str());
  }
  const double cr = std::cos(euler[0]), sr = std::sin(euler[0]);
  const double cp = std::cos(pitch), tp = std::tan(pitch);
  Mat3 t;
  t << 1.0, sr * tp, cr * tp,
       0.0, cr, -sr,
       0.0, sr / cp, cr / cp;
  return t;
}

Vec4 speeds_to_input(const Vec4& varpi) { return varpi.array() * varpi.array().abs(); }

Vec4 input_to_speeds(const Vec4& w) {
  return w.unaryExpr([](double x) { return std::copysign(std::sqrt(std::abs(x)), x); });
}

State state_derivative(const State& state, const TiltAngles& alpha, const Vec4& w,
                       const Params& params) {
  State d;
  d.position = state.velocity;
  d.velocity = Vec3(0.0, 0.0, -params.gravity) +
               rotation_matrix(state.euler) * thrust_matrix(alpha, params) * w / params.mass;
  d.euler = euler_rate_matrix(state.euler) * state.body_rates;
  d.body_rates = params.inertia.llt().solve(torque_matrix(alpha, params) * w);
  return d;
}

State integrate_step(const State& state, const TiltSchedule& alpha_of_t,
                     const SpeedSchedule& varpi_of_t, double t, double dt,
                     const Params& params) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidInput, "dt must be positive");
  auto f = [&](double time, const Vec12& x) {
    return state_derivative(State::from_vector(x), alpha_of_t(time),
                            speeds_to_input(varpi_of_t(time)), params)
        .to_vector();
  };
  const Vec12 x0 = state.to_vector();
  const Vec12 k1 = f(t, x0);
  const Vec12 k2 = f(t + 0.5 * dt, x0 + 0.5 * dt * k1);
  const Vec12 k3 = f(t + 0.5 * dt, x0 + 0.5 * dt * k2);
  const Vec12 k4 = f(t + dt, x0 + dt * k3);
  return State::from_vector(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace tiltrotor
