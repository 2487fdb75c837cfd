#include "decomp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace decomp {

double wrap_angle(double a) {
    if (!std::isfinite(a) || (a > -kPi && a <= kPi)) return a;
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

double read_angle(double a) {
    if (std::abs(std::abs(a) - kPi) < 1e-10) return kPi;
    return wrap_angle(a);
}

GoalRef goal_reference(const GoalCorridor& goal) {
    const Rect& r = goal.rect;
    const Vec2 dir{std::cos(goal.psi_G), std::sin(goal.psi_G)};
    struct Edge {
        Vec2 normal;
        Vec2 mid;
    };
    const double cx = 0.5 * (r.xmin + r.xmax);
    const double cy = 0.5 * (r.ymin + r.ymax);
    const Edge edges[4] = {
        {{0.0, -1.0}, {cx, r.ymin}},
        {{1.0, 0.0}, {r.xmax, cy}},
        {{0.0, 1.0}, {cx, r.ymax}},
        {{-1.0, 0.0}, {r.xmin, cy}},
    };
    // Entry edge: outward normal most opposed to the exit heading.
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 4; ++i) {
        const double s = dot(edges[i].normal, dir);
        if (s < best_score - 1e-12) {
            best_score = s;
            best = i;
        }
    }
    return {edges[best].mid.x, edges[best].mid.y, wrap_angle(goal.psi_G)};
}

GoalPolar goal_polar(const VehicleState& state, const GoalRef& goal) {
    const double dx = goal.x - state.x;
    const double dy = goal.y - state.y;
    GoalPolar out;
    out.d_G = std::hypot(dx, dy);
    if (out.d_G == 0.0) return out;
    out.theta_G = angle_diff(state.psi, std::atan2(dy, dx));
    return out;
}

GoalPolar goal_polar(const VehicleState& state, const Workspace& workspace) {
    return goal_polar(state, goal_reference(workspace.goal));
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    if (std::abs(v) < 1e-12) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

Vec2 closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return a;
    double s = dot(p - a, ab) / len2;
    s = std::clamp(s, 0.0, 1.0);
    return a + s * ab;
}

}  // namespace

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    const int o1 = orientation(a0, a1, b0);
    const int o2 = orientation(a0, a1, b1);
    const int o3 = orientation(b0, b1, a0);
    const int o4 = orientation(b0, b1, a1);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a0, a1, b0)) return true;
    if (o2 == 0 && on_segment(a0, a1, b1)) return true;
    if (o3 == 0 && on_segment(b0, b1, a0)) return true;
    if (o4 == 0 && on_segment(b0, b1, a1)) return true;
    return false;
}

bool is_simple_polygon(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a0 = poly[i];
        const Vec2 a1 = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Adjacent edges share a vertex by construction.
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(a0, a1, poly[j], poly[(j + 1) % n])) return false;
        }
    }
    return true;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

Vec2 nearest_boundary_point(Vec2 p, std::span<const Vec2> poly) {
    Vec2 best = poly.empty() ? p : poly[0];
    double best_d = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 q = closest_on_segment(p, poly[i], poly[(i + 1) % n]);
        const Vec2 d = q - p;
        const double dd = dot(d, d);
        if (dd < best_d) {
            best_d = dd;
            best = q;
        }
    }
    return best;
}

std::optional<BoundaryHit> nearest_obstacle_point(Vec2 p, const Workspace& workspace) {
    std::optional<BoundaryHit> best;
    for (std::size_t k = 0; k < workspace.obstacles.size(); ++k) {
        const Vec2 q = nearest_boundary_point(p, workspace.obstacles[k]);
        const double d = std::hypot(q.x - p.x, q.y - p.y);
        if (!best || d < best->distance) best = BoundaryHit{q, d, k};
    }
    return best;
}

Vec2 Rigid2::apply(Vec2 p) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p.x - s * p.y + offset.x, s * p.x + c * p.y + offset.y};
}

}  // namespace decomp
