#include "decomp/types.hpp"

#include <cmath>
#include <sstream>

#include "decomp/geometry.hpp"

namespace decomp {

namespace {

std::string parse_message(const std::string& path, std::size_t row, const std::string& field,
                          const std::string& what) {
    std::ostringstream os;
    os << path;
    if (row > 0) os << ": row " << row;
    if (!field.empty()) os << ", field '" << field << "'";
    os << ": " << what;
    return os.str();
}

bool finite(const VehicleState& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) &&
           std::isfinite(s.v) && std::isfinite(s.omega);
}

}  // namespace

ParseError::ParseError(std::string path, std::size_t row, std::string field, const std::string& what)
    : Error(parse_message(path, row, field, what)),
      path_(std::move(path)),
      row_(row),
      field_(std::move(field)) {}

const char* to_string(PlantedMode m) {
    switch (m) {
        case PlantedMode::rectilinear: return "rectilinear";
        case PlantedMode::turn: return "turn";
        case PlantedMode::brake: return "brake";
    }
    return "unknown";
}

void VehicleParams::validate() const {
    const double vals[] = {k_acc, k_drag, omega_max, u_lon_max, a_lat_max, v_floor};
    const char* names[] = {"k_acc", "k_drag", "omega_max", "u_lon_max", "a_lat_max", "v_floor"};
    for (std::size_t i = 0; i < 6; ++i) {
        if (!(std::isfinite(vals[i]) && vals[i] > 0.0))
            throw ValidationError(std::string("vehicle parameter ") + names[i] + " must be finite and > 0");
    }
    if (!(std::isfinite(v_max()) && v_max() > 0.0))
        throw ValidationError("steady-state speed k_acc*u_lon_max/k_drag is not finite and positive");
}

Trajectory::Trajectory(std::vector<TrajectorySample> samples, TrajectoryMeta meta,
                       std::optional<std::vector<int>> modes)
    : samples_(std::move(samples)), meta_(std::move(meta)), modes_(std::move(modes)) {
    if (samples_.size() >= 2) period_ = samples_[1].t - samples_[0].t;
    validate();
}

void Trajectory::validate() const {
    if (samples_.empty()) throw ValidationError("trajectory is empty");
    if (modes_ && modes_->size() != samples_.size())
        throw ValidationError("mode label count does not match sample count");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!std::isfinite(s.t) || !finite(s.state) || !std::isfinite(s.input.u_lat) ||
            !std::isfinite(s.input.u_lon))
            throw ValidationError("sample " + std::to_string(i) + ": non-finite value");
        if (s.state.v < 0.0) throw ValidationError("sample " + std::to_string(i) + ": negative speed");
        if (i == 0) continue;
        const double dt = s.t - samples_[i - 1].t;
        if (!(dt > 0.0))
            throw ValidationError("sample " + std::to_string(i) + ": time not strictly increasing");
        if (std::abs(dt - period_) > 1e-9 * std::abs(period_) + 1e-12)
            throw ValidationError("sample " + std::to_string(i) + ": non-uniform sample period");
    }
}

void Trajectory::validate(const VehicleParams& p) const {
    validate();
    constexpr double slack = 1e-9;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        const std::string at = "sample " + std::to_string(i) + ": ";
        if (std::abs(s.input.u_lat) > p.a_lat_max * (1 + slack))
            throw ValidationError(at + "|u_lat| exceeds a_lat_max");
        if (s.input.u_lon < -slack || s.input.u_lon > p.u_lon_max * (1 + slack))
            throw ValidationError(at + "u_lon outside [0, u_lon_max]");
        if (std::abs(s.state.omega) > p.omega_max * (1 + slack))
            throw ValidationError(at + "|omega| exceeds omega_max");
    }
}

void Workspace::validate() const {
    if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin))
        throw ValidationError("workspace bounds are empty");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (!is_simple_polygon(obstacles[i]))
            throw ValidationError("obstacle " + std::to_string(i) + " is not a simple polygon");
    }
    if (!(goal.rect.xmax >= goal.rect.xmin && goal.rect.ymax >= goal.rect.ymin))
        throw ValidationError("goal corridor rectangle is malformed");
    if (!bounds.contains(goal.rect)) throw ValidationError("goal corridor lies outside workspace bounds");
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const Vec2 p{starts[i].x, starts[i].y};
        if (!bounds.contains(p)) throw ValidationError("start " + std::to_string(i) + " outside bounds");
        for (const auto& ob : obstacles) {
            if (point_in_polygon(p, ob))
                throw ValidationError("start " + std::to_string(i) + " lies inside an obstacle");
        }
    }
}

}  // namespace decomp
