#include "tiltrotor/sim.hpp"

#include <cmath>

#include "tiltrotor/error.hpp"

namespace tiltrotor {

Reference circular_reference(double t) {
  Reference r;
  r.pos = Vec3(5.0 * std::cos(0.1 * t), 5.0 * std::sin(0.1 * t), 0.0);
  r.vel = Vec3(-0.5 * std::sin(0.1 * t), 0.5 * std::cos(0.1 * t), 0.0);
  return r;
}

void SimConfig::validate() const {
  if (!(duration > 0.0)) throw Error(ErrorCode::kInvalidInput, "duration must be positive");
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidInput, "dt must be positive");
  if (!reference) throw Error(ErrorCode::kInvalidInput, "reference function is empty");
}

size_t SimConfig::step_count() const { return static_cast<size_t>(std::llround(duration / dt)); }

Vec4 hover_pattern(const Params& params) { return params.hover_speed() * params.spin_sign; }

TrackLog run_tracking(const SimConfig& config, const Params& params, const Gains& gains,
                      const Gait& gait) {
  config.validate();
  gains.validate();
  gait.validate();

  const size_t steps = config.step_count();
  const double dt = config.dt;
  Vec4 applied = config.initial_rotor_speeds.value_or(0.8 * hover_pattern(params));
  std::array<bool, 4> applied_flags{};
  FeedbackLinearization inner(params, gains, applied, config.saturation);
  const TiltSchedule alpha_of_t = [&gait](double t) { return sample_gait(gait, t); };

  TrackLog log;
  log.rows.reserve(steps + 1);
  State state = config.initial_state;
  double previous_det = 0.0;
  auto abort_with = [&](double t, ErrorCode reason, std::string message) {
    log.abort = AbortInfo{t, state, reason, std::move(message)};
  };

  for (size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    TrackRow row;
    row.t = t;
    row.state = state;
    row.alpha = alpha_of_t(t);
    row.varpi = applied;
    row.ref = config.reference(t);
    row.saturated = applied_flags;

    ControlOutput out;
    try {
      const AttitudeCommand att = position_decoupler(state, row.ref, gains, params);
      OutputReference out_ref;
      out_ref.value = Vec4(att.roll, att.pitch, 0.0, row.ref.pos.z());
      out_ref.rate[3] = row.ref.vel.z();
      out_ref.accel[3] = row.ref.acc.z();
      out = inner.step(state, row.alpha, out_ref);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRepresentationSingular) throw;
      row.singular = true;
      log.rows.push_back(row);
      abort_with(t, e.code(), e.what());
      break;
    }
    row.det_delta = out.det_delta;
    // det(Delta) is continuous along the trajectory, so a sign flip between
    // samples means Delta went singular in between.
    const bool crossed = previous_det * out.det_delta < 0.0;
    row.singular = out.singular || crossed;
    previous_det = out.det_delta;
    log.rows.push_back(row);
    if (row.singular && config.abort_on_singular) {
      abort_with(t, ErrorCode::kAbortedSingular,
                 crossed ? "decoupling matrix determinant changed sign (passed through singular)"
                         : "singular decoupling matrix");
      break;
    }
    if (k == steps) break;

    try {
      const Vec4 held = applied;
      state = integrate_step(state, alpha_of_t, [&held](double) { return held; }, t, dt, params);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRepresentationSingular) throw;
      abort_with(t, e.code(), e.what());
      break;
    }
    applied = out.varpi_cmd;
    applied_flags = out.saturated;
  }
  return log;
}

ErrorSeries error_series(const TrackLog& log) {
  if (log.rows.empty()) throw Error(ErrorCode::kInvalidInput, "empty track log");
  ErrorSeries out;
  out.t.reserve(log.rows.size());
  out.error.reserve(log.rows.size());
  out.norm.reserve(log.rows.size());
  for (const TrackRow& row : log.rows) {
    const Vec3 e = row.ref.pos - row.state.position;
    out.t.push_back(row.t);
    out.error.push_back(e);
    out.norm.push_back(e.norm());
  }
  return out;
}

}  // namespace tiltrotor
