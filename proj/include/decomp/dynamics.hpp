#pragma once

#include "decomp/types.hpp"

namespace decomp {

enum class Integrator { euler, rk4 };

Integrator integrator_from_string(const std::string& s);
const char* to_string(Integrator i);

/// Turn rate produced by a lateral command: clamp(u_lat / max(v, v_floor), +-omega_max).
double turn_rate(double u_lat, double v, const VehicleParams& params);

/// Clips a command into the admissible input box.
ControlInput clamp_input(ControlInput u, const VehicleParams& params);

/// Advances the unicycle one step with the input held constant.
///
///   xdot = v cos(psi), ydot = v sin(psi), psidot = omega(u_lat, v),
///   vdot = k_acc u_lon - k_drag v
///
/// Speed is clamped at zero from below, psi is wrapped, and the returned
/// omega is the turn rate of `input` at the new speed. Throws Error on
/// non-finite state/input or dt <= 0.
VehicleState step_dynamics(const VehicleState& state, const ControlInput& input, const VehicleParams& params,
                           double dt, Integrator integrator = Integrator::rk4);

}  // namespace decomp
