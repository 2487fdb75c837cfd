#pragma once

#include <span>

#include "decomp/types.hpp"

namespace decomp {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi]. Every angular difference in the toolkit
/// goes through here.
double wrap_angle(double a);
/// wrap_angle for angles read back from 12-digit text: values within rounding of ±pi become pi.
double read_angle(double a);

/// wrap_angle(a - b).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// Centroid of the corridor edge an agent crosses when entering along psi_G.
GoalRef goal_reference(const GoalCorridor& goal);

/// theta_G = wrap(psi - bearing to goal), d_G = range.
///
/// With this sign convention the heading gap wrap(psi - psi_G) and theta_G
/// share a sign while an agent turns onto the goal heading, so the steering
/// ratio psi-gap / theta_G is positive.
GoalPolar goal_polar(const VehicleState& state, const GoalRef& goal);
GoalPolar goal_polar(const VehicleState& state, const Workspace& workspace);

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
bool is_simple_polygon(std::span<const Vec2> poly);
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// Closest point on the polygon boundary to p.
Vec2 nearest_boundary_point(Vec2 p, std::span<const Vec2> poly);

struct BoundaryHit {
    Vec2 point;
    double distance = 0.0;
    std::size_t obstacle = 0;
};

/// Nearest obstacle boundary point over the whole workspace; nullopt when
/// there are no obstacles.
std::optional<BoundaryHit> nearest_obstacle_point(Vec2 p, const Workspace& workspace);

/// A 2D rigid transform p' = R(angle) p + offset.
struct Rigid2 {
    double angle = 0.0;
    Vec2 offset;

    Vec2 apply(Vec2 p) const;
    double apply_heading(double psi) const { return wrap_angle(psi + angle); }
};

}  // namespace decomp
