#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decomp {

/// Base error for everything the toolkit reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rejected input file. Row is 1-based over data rows (header excluded),
/// 0 when the problem is file-level.
class ParseError : public Error {
public:
    ParseError(std::string path, std::size_t row, std::string field, const std::string& what);

    const std::string& path() const { return path_; }
    std::size_t row() const { return row_; }
    const std::string& field() const { return field_; }

private:
    std::string path_;
    std::size_t row_;
    std::string field_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct VehicleParams {
    double k_acc = 5.0;      // speed-units/s per unit command
    double k_drag = 0.5;     // 1/s
    double omega_max = 1.0;  // rad/s
    double u_lon_max = 1.0;
    double a_lat_max = 5.0;  // length/s^2
    double v_floor = 0.5;    // length/s, denominator floor for turn rate

    /// Terminal speed under full longitudinal command.
    double v_max() const { return k_acc * u_lon_max / k_drag; }
    void validate() const;
};

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double v = 0.0;
    double omega = 0.0;

    Vec2 position() const { return {x, y}; }
};

struct ControlInput {
    double u_lat = 0.0;
    double u_lon = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    VehicleState state;
    ControlInput input;
};

struct TrajectoryMeta {
    std::string trial_id;
    std::string start_id;
};

/// Ground-truth control modes planted by the simulator.
enum class PlantedMode : int { rectilinear = 0, turn = 1, brake = 2 };

const char* to_string(PlantedMode m);

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<TrajectorySample> samples, TrajectoryMeta meta = {},
               std::optional<std::vector<int>> modes = std::nullopt);

    const std::vector<TrajectorySample>& samples() const { return samples_; }
    const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    double period() const { return period_; }
    const TrajectoryMeta& meta() const { return meta_; }
    TrajectoryMeta& meta() { return meta_; }
    const std::optional<std::vector<int>>& modes() const { return modes_; }

    /// Checks time ordering, uniform period and state/input finiteness. Throws
    /// ValidationError naming the offending sample index.
    void validate() const;
    /// Like validate() plus the bound invariants against `params`.
    void validate(const VehicleParams& params) const;

private:
    std::vector<TrajectorySample> samples_;
    TrajectoryMeta meta_;
    std::optional<std::vector<int>> modes_;
    double period_ = 0.0;
};

using Polygon = std::vector<Vec2>;

struct Rect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    bool contains(const Rect& r) const {
        return r.xmin >= xmin && r.xmax <= xmax && r.ymin >= ymin && r.ymax <= ymax;
    }
};

struct GoalCorridor {
    Rect rect;
    double psi_G = 0.0;
};

struct StartPose {
    double x = 0.0;
    double y = 0.0;
    double psi0 = 0.0;
};

struct Workspace {
    Rect bounds;
    std::vector<Polygon> obstacles;
    GoalCorridor goal;
    std::vector<StartPose> starts;

    void validate() const;
};

/// Goal position relative to the agent: bearing error and range.
struct GoalPolar {
    double theta_G = 0.0;
    double d_G = 0.0;
};

/// Reference pose a gap closes onto (subgoal or goal corridor entry).
struct GoalRef {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;

    Vec2 position() const { return {x, y}; }
};

struct GazeSample {
    double t = 0.0;
    double gx = 0.0;
    double gy = 0.0;
    bool valid = true;
};

/// A gaze trace plus optional per-sample ground truth (see GazeKind).
struct GazeTrace {
    std::vector<GazeSample> samples;
    std::optional<std::vector<int>> modes;
};

}  // namespace decomp
