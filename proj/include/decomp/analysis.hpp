#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decomp/constraints.hpp"
#include "decomp/gaze.hpp"
#include "decomp/graph.hpp"
#include "decomp/modes.hpp"
#include "decomp/tau.hpp"
#include "decomp/types.hpp"

namespace decomp {

/// Stage settings for the analysis chain; every field has the documented
/// default.
struct AnalysisConfig {
    double eps_fraction = 0.02;
    double omega_turn_fraction = 0.15;

    SubgoalOptions subgoal;
    double cluster_eps = 2.0;
    std::size_t cluster_min_pts = 3;

    ClassGraphOptions mrf;
    std::vector<std::string> signals = default_signals();

    std::size_t n_modes = 5;
    double w = 0.125;
    double smoothing = 1.0;

    double tau_window = 0.5;
    GapOptions gap;
    double onset_tol = 0.02;
    std::size_t onset_slack = 3;  // samples, for the planted comparison
    /// Where tau-fit finds turns: "predicate" (turning flags) or "viterbi".
    std::string turn_source = "predicate";

    GazeClassifierOptions gaze;
    double d_cue = 0.5;
};

struct LabelSet {
    std::vector<std::vector<ConstraintState>> labels;
    ClassCatalog catalog;
    std::vector<std::vector<int>> class_ids;
};

LabelSet label_dataset(const std::vector<Trajectory>& trajs, const VehicleParams& p, const AnalysisConfig& cfg,
                       std::size_t workers = 1);

std::vector<std::vector<bool>> turning_dataset(const std::vector<Trajectory>& trajs,
                                               const std::vector<std::vector<ConstraintState>>& labels,
                                               const VehicleParams& p, const AnalysisConfig& cfg);

/// Subgoals of every trajectory (trajectory order), DBSCAN-clustered.
SubgoalClustering find_subgoals(const std::vector<Trajectory>& trajs, const std::vector<std::vector<bool>>& turning,
                                const AnalysisConfig& cfg);

struct SegmentRecord {
    std::size_t trajectory = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::optional<std::size_t> start_subgoal;  // index into the global subgoal list
    std::optional<std::size_t> end_subgoal;
    GoalRef goal;
    std::string goal_source;  // "cluster", "subgoal" or "corridor"
    Rigid2 transform;
};

/// Cuts every trajectory at its subgoals. A segment closes onto its end
/// subgoal's cluster centre (the subgoal itself when unclustered); the last
/// one onto the goal corridor reference.
std::vector<SegmentRecord> segment_dataset(const std::vector<Trajectory>& trajs, const SubgoalClustering& sg,
                                           const Workspace& workspace);

/// Owning segment per sample: begin <= i < end, the final sample to the last
/// segment. -1 when a trajectory has no segment.
std::vector<std::vector<int>> segment_owner(const std::vector<Trajectory>& trajs,
                                            const std::vector<SegmentRecord>& segments);

/// Signals of all samples, trajectory-major, relative to each sample's
/// segment goal.
SignalMatrix dataset_signals(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                             const std::vector<std::string>& names);

std::map<int, ClassStats> class_stats(const std::vector<Trajectory>& trajs,
                                      const std::vector<std::vector<int>>& class_ids);

ClassGraphs fit_dataset_graphs(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                               const LabelSet& labels, const AnalysisConfig& cfg);

ModeModel build_mode_model(const ClassGraphs& graphs, const ClassCatalog& catalog,
                           const std::vector<std::vector<int>>& class_ids, const std::map<int, ClassStats>& stats,
                           const VehicleParams& p, const AnalysisConfig& cfg);

struct Decoded {
    std::vector<std::vector<int>> raw;
    std::vector<std::vector<int>> viterbi;
};

Decoded decode_dataset(const std::vector<std::vector<int>>& class_ids, const ModeModel& model,
                       std::size_t workers = 1);

/// Planted mode (0 rectilinear, 1 turn, 2 brake) a semantic label stands for;
/// -1 for mixed labels.
int planted_of_label(const std::string& label);

/// Fraction of samples whose decoded label maps to the planted mode. nullopt
/// when no trajectory carries planted modes.
std::optional<double> planted_frame_accuracy(const std::vector<Trajectory>& trajs,
                                             const std::vector<std::vector<int>>& decoded, const ModeModel& model);

struct TauSegmentResult {
    std::size_t segment = 0;
    std::optional<std::size_t> turn_begin;  // absolute sample index
    std::optional<CouplingFit> heading;     // psi gap on theta gap
    std::optional<CouplingFit> tau_heading;  // tau_psi on tau_theta
    std::optional<CouplingFit> tau_distance;  // tau_psi on tau_d
    std::optional<std::size_t> onset;          // detected, absolute
    std::optional<std::size_t> planted_onset;  // first planted turn sample
    std::string note;
    std::vector<std::pair<double, double>> points;  // (psi gap, theta gap) in the fit window
};

struct TauReport {
    std::vector<TauSegmentResult> segments;
    std::optional<CouplingFit> pooled;  // heading fit over all windows together
    std::size_t onset_total = 0;
    std::size_t onset_hits = 0;

    nlohmann::json to_json() const;
};

/// Per-segment coupling fits over the last turning run of each segment.
TauReport tau_dataset(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                      const std::vector<std::vector<bool>>& turning, const AnalysisConfig& cfg,
                      std::size_t workers = 1);

struct GazeTraceResult {
    GazeClassification classification;
    std::optional<AnticipationResult> anticipation;
    std::string note;
    std::optional<double> motion_accuracy;    // vs planted
    std::optional<double> function_accuracy;  // segment level, vs planted
};

GazeTraceResult analyze_gaze(const GazeTrace& trace, const Trajectory& traj, const Workspace& ws,
                             const AnalysisConfig& cfg);

struct GazeReport {
    std::vector<GazeTraceResult> traces;
    std::optional<double> rho;  // pooled over all traces
    std::vector<std::pair<double, double>> pairs;
    std::optional<double> motion_accuracy;
    std::optional<double> function_accuracy;

    nlohmann::json to_json() const;
};

GazeReport gaze_dataset(const std::vector<GazeTrace>& traces, const std::vector<Trajectory>& trajs,
                        const Workspace& ws, const AnalysisConfig& cfg, std::size_t workers = 1);

nlohmann::json analysis_config_to_json(const AnalysisConfig& c);
/// Reads the per-stage config blocks keyed by stage name.
AnalysisConfig analysis_config_from_json(const nlohmann::json& j, AnalysisConfig base = {});

}  // namespace decomp
