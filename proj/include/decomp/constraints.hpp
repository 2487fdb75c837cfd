#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decomp/geometry.hpp"
#include "decomp/types.hpp"

namespace decomp {

/// Per-channel activation over {u_lat, u_lon, omega, v}, each in {-1, 0, +1}.
struct ConstraintState {
    int c_ulat = 0;
    int c_ulon = 0;
    int c_omega = 0;
    int c_v = 0;

    auto operator<=>(const ConstraintState&) const = default;

    /// Dense index in [0, 81).
    int code_index() const { return (c_ulat + 1) * 27 + (c_ulon + 1) * 9 + (c_omega + 1) * 3 + (c_v + 1); }
    static ConstraintState from_index(int idx);
    std::string to_string() const;
    int at(std::size_t channel) const;
};

int l1_distance(const ConstraintState& a, const ConstraintState& b);

/// Per-channel "approximately at the bound" tolerances.
struct ConstraintTolerances {
    double u_lat = 0.0;
    double u_lon = 0.0;
    double omega = 0.0;
    double v = 0.0;

    /// `fraction` of each channel's range (default 2%).
    static ConstraintTolerances defaults(const VehicleParams& p, double fraction = 0.02);
};

/// Evaluates one value against [lo, hi]: +1 at the top, -1 at the bottom.
int constraint_level(double x, double lo, double hi, double eps);

ConstraintState label_sample(const TrajectorySample& s, const VehicleParams& p, const ConstraintTolerances& eps);

/// Pointwise labelling with bounds u_lat in [-a_lat_max, a_lat_max],
/// u_lon in [0, u_lon_max], omega in [-omega_max, omega_max], v in [0, v_max].
/// Throws ValidationError for eps <= 0 or eps covering half a channel range.
std::vector<ConstraintState> label_constraints(const Trajectory& traj, const VehicleParams& p,
                                               const ConstraintTolerances& eps);

struct ConstraintClass {
    int id = 0;
    ConstraintState code;
    std::size_t count = 0;
    double frequency = 0.0;
};

struct ClassCatalog {
    /// Sorted by descending count, ties broken by ascending code index.
    std::vector<ConstraintClass> classes;

    std::optional<int> id_of(const ConstraintState& code) const;
    std::size_t size() const { return classes.size(); }
};

ClassCatalog catalog_classes(std::span<const ConstraintState> labels);
/// Catalog over several trajectories' labels at once.
ClassCatalog catalog_classes(const std::vector<std::vector<ConstraintState>>& labels);

/// Class id per sample; codes absent from the catalog map to -1.
std::vector<int> class_ids(std::span<const ConstraintState> labels, const ClassCatalog& catalog);

struct TurnPredicate {
    double omega_turn = 0.0;

    /// omega_turn = fraction * omega_max (default 0.15).
    static TurnPredicate defaults(const VehicleParams& p, double fraction = 0.15) {
        return {fraction * p.omega_max};
    }
    bool operator()(const ConstraintState& c, double omega) const;
};

std::vector<bool> turning_flags(const Trajectory& traj, std::span<const ConstraintState> labels,
                                const TurnPredicate& pred);

void write_constraint_labels(const Trajectory& traj, std::span<const ConstraintState> labels,
                             std::span<const int> class_id, std::ostream& out);
void save_constraint_labels(const Trajectory& traj, std::span<const ConstraintState> labels,
                            std::span<const int> class_id, const std::filesystem::path& path);

struct LabelRow {
    double t = 0.0;
    ConstraintState code;
    int class_id = -1;
};
std::vector<LabelRow> load_constraint_labels(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Subgoals

struct Subgoal {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    std::size_t trajectory = 0;  // index into the dataset
    std::size_t sample = 0;      // exit sample of the turning run
    std::optional<int> cluster_id;
};

struct SubgoalOptions {
    /// Turning runs shorter than this are ignored and rectilinear gaps shorter
    /// than this inside a turn are bridged.
    double debounce = 0.2;
};

/// One subgoal at the first rectilinear sample after each maximal turning run.
std::vector<Subgoal> extract_subgoals(const Trajectory& traj, std::span<const bool> turning,
                                      std::size_t trajectory_index = 0, const SubgoalOptions& opt = {});

struct ClusterCenter {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;  // circular mean of member headings
    std::size_t members = 0;

    GoalRef ref() const { return {x, y, psi}; }
};

struct SubgoalClustering {
    std::vector<Subgoal> subgoals;  // input order, cluster_id filled (nullopt = noise)
    std::vector<ClusterCenter> centers;
};

/// DBSCAN over (x, y). Cluster ids follow discovery order over the input.
SubgoalClustering cluster_subgoals(std::vector<Subgoal> subgoals, double eps, std::size_t min_pts);

// ---------------------------------------------------------------------------
// Guidance segments

struct GuidanceSegment {
    std::size_t trajectory = 0;
    std::size_t begin = 0;  // inclusive
    std::size_t end = 0;    // inclusive; shared with the next segment's begin
    std::optional<std::size_t> start_subgoal;  // index into the subgoal list
    std::optional<std::size_t> end_subgoal;
    std::vector<TrajectorySample> samples;
    /// Same slice with end position at the origin and end velocity along +y.
    std::vector<TrajectorySample> aligned;
    Rigid2 transform;
    /// Pose the segment's gaps close onto.
    GoalRef goal;

    std::size_t size() const { return samples.size(); }
};

/// Cuts at the given subgoals (ordered by sample) plus start and end. The last
/// segment's goal is `final_goal` when given, else its own end pose.
std::vector<GuidanceSegment> cut_and_align(const Trajectory& traj, std::span<const Subgoal> subgoals,
                                           std::optional<GoalRef> final_goal = std::nullopt,
                                           std::size_t trajectory_index = 0);

/// Transform taking `end` to the origin and `direction` onto +y.
Rigid2 goal_frame(Vec2 end, double direction);

}  // namespace decomp
