#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decomp/types.hpp"

namespace decomp {

enum class GazeMotion : int { fixation = 0, pursuit = 1, saccade = 2 };
enum class GazeFunction : int { unlabeled = 0, cue = 1, anticipation = 2 };

const char* to_string(GazeMotion m);
const char* to_string(GazeFunction f);

struct GazeClassifierOptions {
    double v_fix = 5.0;   // length/s
    double v_sac = 60.0;  // length/s
    double stay = 0.95;   // self-transition probability of the smoothing chain
    double hit = 0.9;     // probability the threshold class is the true class
    std::size_t max_bridge = 3;  // invalid samples interpolated across
};

struct GazeSegment {
    std::size_t begin = 0;  // inclusive, trace index
    std::size_t end = 0;    // inclusive
    GazeMotion motion = GazeMotion::fixation;
    GazeFunction function = GazeFunction::unlabeled;
    double median_distance = 0.0;  // to the nearest obstacle boundary
    std::optional<Vec2> principal_dir;
    std::optional<double> psi_g;
    std::optional<double> psi_t;  // nearest_traj_heading

    std::size_t size() const { return end - begin + 1; }
};

struct GazeClassification {
    std::vector<double> speed;             // NaN where invalid
    std::vector<int> raw;                  // threshold class, -1 where invalid
    std::vector<int> motion;               // smoothed class, -1 where invalid
    std::vector<GazeSample> samples;       // after bridging short invalid gaps
    std::vector<GazeSegment> segments;
};

/// Velocity thresholds (fixation < v_fix <= pursuit < v_sac <= saccade)
/// smoothed by Viterbi over a sticky 3-state chain, then cut into runs.
/// Invalid gaps up to max_bridge samples are interpolated; longer gaps split.
/// Throws ValidationError for traces shorter than five samples.
GazeClassification classify_gaze(const GazeTrace& trace, const GazeClassifierOptions& opt = {});

/// Cue when the median point-to-obstacle distance is below d_cue, else
/// anticipation; saccades stay unlabeled.
void label_gaze_function(std::vector<GazeSegment>& segments, std::span<const GazeSample> samples,
                         const Workspace& workspace, double d_cue = 0.5);

struct AnticipationResult {
    double rho = 0.0;
    std::vector<std::pair<double, double>> pairs;  // (psi_g, psi_t)
    std::vector<std::size_t> used;                  // segment indices
    std::vector<std::size_t> skipped;               // degenerate covariance
};

/// Principal direction of a point cloud, signed along its progression from
/// first to last point. nullopt when the covariance is degenerate.
std::optional<Vec2> principal_direction(std::span<const Vec2> pts);

/// Pearson correlation after unwrapping all angles about their circular mean.
double circular_pearson(std::span<const std::pair<double, double>> pairs);

/// Correlates each anticipation segment's principal heading with the heading
/// of the trajectory point nearest its mid-time gaze point. Fills psi_g /
/// psi_t on the segments. Throws ValidationError with fewer than
/// `min_segments` usable segments.
AnticipationResult anticipation_correlation(std::vector<GazeSegment>& segments, std::span<const GazeSample> samples,
                                            const Trajectory& traj, std::size_t min_points = 5,
                                            std::size_t min_segments = 3);

/// Intersection of a gaze ray with the ground plane z = 0.
std::optional<Vec2> ground_intersection(double cx, double cy, double cz, double dx, double dy, double dz);

nlohmann::json gaze_segments_to_json(const std::vector<GazeSegment>& segments, std::span<const GazeSample> samples);

/// Header `t,gx,gy,valid,motion,function`.
void save_gaze_labels(const std::filesystem::path& path, const GazeClassification& c);

}  // namespace decomp
