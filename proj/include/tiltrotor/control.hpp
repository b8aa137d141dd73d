#pragma once

// Outer attitude-position decoupler and inner feedback-linearization loop.

#include <array>

#include "tiltrotor/linearization.hpp"
#include "tiltrotor/model.hpp"

namespace tiltrotor {

struct Gains {
  Vec4 kp = Vec4::Constant(4.0);  // (roll, pitch, yaw, Z), 1/s^2
  Vec4 kd = Vec4::Constant(4.0);  // 1/s
  double kp_xy = 0.5;
  double kd_xy = 1.0;
  double clamp = 0.35;  // rad, bound on roll/pitch references

  void validate() const;
};

/// Position reference at one instant.
struct Reference {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
};

/// Reference for the controlled outputs (roll, pitch, yaw, Z).
struct OutputReference {
  Vec4 value = Vec4::Zero();
  Vec4 rate = Vec4::Zero();
  Vec4 accel = Vec4::Zero();
};

struct AttitudeCommand {
  double roll = 0.0;
  double pitch = 0.0;
};

struct Saturation {
  Vec4 varpi = Vec4::Zero();
  std::array<bool, 4> flags{};

  bool any() const { return flags[0] || flags[1] || flags[2] || flags[3]; }
};

struct ControlOutput {
  Vec4 varpi_cmd = Vec4::Zero();
  Vec4 w_request = Vec4::Zero();  // unsaturated solution of Delta w = v - b
  double det_delta = 0.0;
  std::array<bool, 4> saturated{};
  bool singular = false;
};

/// Horizontal PD law mapped onto roll/pitch references through yaw.
AttitudeCommand position_decoupler(const State& state, const Reference& ref, const Gains& gains,
                                   const Params& params);

/// Clamps each rotor speed magnitude into [omega_lo, omega_hi]. Non-reversible
/// rotors are also forced onto their nominal spin direction.
Saturation saturate(const Vec4& varpi, const Params& params);

/// Measured (roll, pitch, yaw, Z) and their first derivatives.
std::pair<Vec4, Vec4> controlled_outputs(const State& state);

/// One evaluation of the inner loop. On a singular decoupling matrix the
/// returned command is last_safe and `singular` is set.
ControlOutput fl_inner_loop(const State& state, const TiltAngles& alpha, const OutputReference& ref,
                            const Gains& gains, const Params& params, const Vec4& last_safe,
                            bool saturation_enabled = true,
                            double singular_epsilon = kSingularEpsilon);

/// Inner loop with its one-step memory of the last non-singular command.
class FeedbackLinearization {
 public:
  FeedbackLinearization(Params params, Gains gains, Vec4 initial_command,
                        bool saturation_enabled = true);

  ControlOutput step(const State& state, const TiltAngles& alpha, const OutputReference& ref);

  const Vec4& last_safe() const { return last_safe_; }

 private:
  Params params_;
  Gains gains_;
  Vec4 last_safe_;
  bool saturation_enabled_;
};

}  // namespace tiltrotor
