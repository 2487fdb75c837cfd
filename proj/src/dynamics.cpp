#include "decomp/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "decomp/geometry.hpp"

namespace decomp {

Integrator integrator_from_string(const std::string& s) {
    if (s == "euler") return Integrator::euler;
    if (s == "rk4") return Integrator::rk4;
    throw ValidationError("unknown integrator '" + s + "'");
}

const char* to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk4"; }

double turn_rate(double u_lat, double v, const VehicleParams& p) {
    return std::clamp(u_lat / std::max(v, p.v_floor), -p.omega_max, p.omega_max);
}

ControlInput clamp_input(ControlInput u, const VehicleParams& p) {
    return {std::clamp(u.u_lat, -p.a_lat_max, p.a_lat_max), std::clamp(u.u_lon, 0.0, p.u_lon_max)};
}

namespace {

struct Deriv {
    double x, y, psi, v;
};

// Heading is integrated unwrapped within a step.
struct Raw {
    double x, y, psi, v;
};

Deriv rhs(const Raw& s, const ControlInput& u, const VehicleParams& p) {
    const double v = std::max(s.v, 0.0);
    return {v * std::cos(s.psi), v * std::sin(s.psi), turn_rate(u.u_lat, v, p), p.k_acc * u.u_lon - p.k_drag * v};
}

Raw add(const Raw& s, const Deriv& d, double h) {
    return {s.x + h * d.x, s.y + h * d.y, s.psi + h * d.psi, s.v + h * d.v};
}

}  // namespace

VehicleState step_dynamics(const VehicleState& state, const ControlInput& input, const VehicleParams& p, double dt,
                           Integrator integrator) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("step_dynamics: dt must be finite and > 0");
    if (!std::isfinite(state.x) || !std::isfinite(state.y) || !std::isfinite(state.psi) ||
        !std::isfinite(state.v) || !std::isfinite(input.u_lat) || !std::isfinite(input.u_lon))
        throw Error("step_dynamics: non-finite state or input");

    const Raw s0{state.x, state.y, state.psi, state.v};
    Raw s1;
    if (integrator == Integrator::euler) {
        s1 = add(s0, rhs(s0, input, p), dt);
    } else {
        const Deriv k1 = rhs(s0, input, p);
        const Deriv k2 = rhs(add(s0, k1, dt / 2), input, p);
        const Deriv k3 = rhs(add(s0, k2, dt / 2), input, p);
        const Deriv k4 = rhs(add(s0, k3, dt), input, p);
        s1 = {s0.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
              s0.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
              s0.psi + dt / 6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi),
              s0.v + dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
    }
    VehicleState out;
    out.x = s1.x;
    out.y = s1.y;
    out.psi = wrap_angle(s1.psi);
    out.v = std::max(s1.v, 0.0);
    out.omega = turn_rate(input.u_lat, out.v, p);
    return out;
}

}  // namespace decomp
