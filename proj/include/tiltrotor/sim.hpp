#pragma once

// Closed-loop tracking experiment: gait sampling, outer decoupler, inner
// feedback linearization and RK4 plant integration at a fixed step.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tiltrotor/control.hpp"
#include "tiltrotor/error.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/model.hpp"

namespace tiltrotor {

/// Circle of radius 5 m at 0.1 rad/s in the Z = 0 plane, zero acceleration.
Reference circular_reference(double t);

using ReferenceFn = std::function<Reference(double)>;

struct SimConfig {
  double duration = 120.0;  // s
  double dt = 1e-3;         // s
  State initial_state;
  // Rotor speeds acting during the first step; empty selects 0.8x the
  // nominal hover pattern.
  std::optional<Vec4> initial_rotor_speeds;
  bool abort_on_singular = true;
  bool saturation = true;
  ReferenceFn reference = circular_reference;

  void validate() const;
  size_t step_count() const;
};

/// Hover speed magnitude applied along each rotor's nominal spin direction.
Vec4 hover_pattern(const Params& params);

struct TrackRow {
  double t = 0.0;
  State state;
  TiltAngles alpha;
  Vec4 varpi = Vec4::Zero();  // rotor speeds acting on [t, t + dt)
  Reference ref;
  double det_delta = 0.0;           // evaluated at (state, alpha) of this row
  std::array<bool, 4> saturated{};  // flags of the acting command
  bool singular = false;            // controller verdict at this row
};

struct AbortInfo {
  double time = 0.0;
  State last_state;
  ErrorCode reason = ErrorCode::kAbortedSingular;
  std::string message;
};

struct TrackLog {
  std::vector<TrackRow> rows;
  std::optional<AbortInfo> abort;

  bool completed() const { return !abort.has_value(); }
};

/// Runs the loop. The command computed from the state at t_k drives the plant
/// on [t_{k+1}, t_{k+2}) (one-sample actuation latency); the initial rotor
/// speeds drive the first step. A row is flagged singular when the scale-aware
/// test fires or det(Delta) changed sign since the previous row. Stops early,
/// filling `abort`, on a singular row when abort_on_singular is set, and
/// always when the attitude reaches the Euler representation guard band.
TrackLog run_tracking(const SimConfig& config, const Params& params, const Gains& gains,
                      const Gait& gait);

struct ErrorSeries {
  std::vector<double> t;
  std::vector<Vec3> error;  // ref_pos - position
  std::vector<double> norm;
};

ErrorSeries error_series(const TrackLog& log);

}  // namespace tiltrotor
