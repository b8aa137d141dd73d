#include "tiltrotor/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tiltrotor/error.hpp"

namespace tiltrotor {

void Gains::validate() const {
  if (!((kp.array() > 0.0).all() && (kd.array() > 0.0).all() && kp_xy > 0.0 && kd_xy > 0.0))
    throw Error(ErrorCode::kInvalidInput, "all gains must be positive");
  if (!(clamp > 0.0 && clamp < std::numbers::pi / 2))
    throw Error(ErrorCode::kInvalidInput, "attitude clamp must lie in (0, pi/2)");
}

AttitudeCommand position_decoupler(const State& state, const Reference& ref, const Gains& gains,
                                   const Params& params) {
  const Eigen::Vector2d u =
      ref.acc.head<2>() + gains.kd_xy * (ref.vel.head<2>() - state.velocity.head<2>()) +
      gains.kp_xy * (ref.pos.head<2>() - state.position.head<2>());
  const double cy = std::cos(state.euler[2]);
  const double sy = std::sin(state.euler[2]);
  const double g = params.gravity;
  AttitudeCommand cmd;
  cmd.pitch = std::clamp((u.x() * cy + u.y() * sy) / g, -gains.clamp, gains.clamp);
  cmd.roll = std::clamp((u.x() * sy - u.y() * cy) / g, -gains.clamp, gains.clamp);
  return cmd;
}

Saturation saturate(const Vec4& varpi, const Params& params) {
  Saturation out;
  for (int i = 0; i < 4; ++i) {
    double magnitude = std::abs(varpi[i]);
    double sign = varpi[i] < 0.0 ? -1.0 : 1.0;
    if (!params.reversible_rotors && sign != params.spin_sign[i]) {
      // against the nominal spin: the rotor idles at the floor
      sign = params.spin_sign[i];
      magnitude = params.omega_lo;
    }
    magnitude = std::clamp(magnitude, params.omega_lo, params.omega_hi);
    out.varpi[i] = sign * magnitude;
    out.flags[i] = out.varpi[i] != varpi[i];
  }
  return out;
}

std::pair<Vec4, Vec4> controlled_outputs(const State& state) {
  const Vec3 euler_dot = euler_rate_matrix(state.euler) * state.body_rates;
  Vec4 y, y_dot;
  y << state.euler, state.position.z();
  y_dot << euler_dot, state.velocity.z();
  return {y, y_dot};
}

ControlOutput fl_inner_loop(const State& state, const TiltAngles& alpha, const OutputReference& ref,
                            const Gains& gains, const Params& params, const Vec4& last_safe,
                            bool saturation_enabled, double singular_epsilon) {
  const auto [y, y_dot] = controlled_outputs(state);
  Vec4 error = ref.value - y;
  error[2] = wrap_angle(error[2]);
  const Vec4 v = ref.accel + gains.kd.cwiseProduct(ref.rate - y_dot) + gains.kp.cwiseProduct(error);

  const DecouplingMatrix delta = decoupling_matrix(state.euler, alpha, params);
  ControlOutput out;
  out.det_delta = delta.determinant();
  if (delta.is_singular(singular_epsilon)) {
    out.singular = true;
    out.varpi_cmd = last_safe;
    return out;
  }
  out.w_request = delta.delta.partialPivLu().solve(v - drift_vector(state, params));
  const Vec4 varpi = input_to_speeds(out.w_request);
  if (saturation_enabled) {
    const Saturation sat = saturate(varpi, params);
    out.varpi_cmd = sat.varpi;
    out.saturated = sat.flags;
  } else {
    out.varpi_cmd = varpi;
  }
  return out;
}

FeedbackLinearization::FeedbackLinearization(Params params, Gains gains, Vec4 initial_command,
                                             bool saturation_enabled)
    : params_(std::move(params)),
      gains_(std::move(gains)),
      last_safe_(std::move(initial_command)),
      saturation_enabled_(saturation_enabled) {}

ControlOutput FeedbackLinearization::step(const State& state, const TiltAngles& alpha,
                                          const OutputReference& ref) {
  ControlOutput out =
      fl_inner_loop(state, alpha, ref, gains_, params_, last_safe_, saturation_enabled_);
  if (!out.singular) last_safe_ = out.varpi_cmd;
  return out;
}

}  // namespace tiltrotor
