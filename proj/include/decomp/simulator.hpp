#pragma once

#include <cstdint>
#include <vector>

#include "decomp/dynamics.hpp"
#include "decomp/types.hpp"

namespace decomp {

enum class Approach { turn, straight };

/// One scheduled subgoal. `approach` fixes the mode schedule used to reach it:
/// turn = Rectilinear -> (Brake) -> Turn, straight = Rectilinear only.
struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    Approach approach = Approach::turn;

    GoalRef ref() const { return {x, y, psi}; }
};

/// Gains of the Tau-coupled guidance agent.
///
/// In Turn the heading gap is held at k_theta times the goal bearing error
/// (psi - psi_G = k_theta * theta_G). Near closure this is the Tau coupling
/// tau_psi = (k_theta - 1) tau_d, so the heading/distance coupling is not a
/// separate gain. Rectilinear holds heading and watches the steering-ratio gap
/// dk = psi-gap / theta_G - k_steer, switching to Turn when tau_k predicts the
/// crossing within half a step.
struct AgentParams {
    double k_theta = 1.76;
    double k_steer = 1.76;
    /// Brake once tau_v >= k_v * tau_d, tau_d measured to the predicted turn onset.
    double k_v = 1.0;
    /// Synthetic speed/steering trade: when > 0, also brake once v exceeds
    /// v_turn + k_b * dk. Disabled at 0.
    double k_b = 0.0;
    double heading_gain = 4.0;  // 1/s
    double speed_gain = 0.5;    // 1/s
    /// Fraction of the lateral-acceleration and turn-rate limits a turn may use.
    double turn_margin = 0.8;
    /// Waypoints in visiting order; the goal corridor entry is appended implicitly.
    std::vector<Waypoint> subgoals;
    Approach goal_approach = Approach::straight;

    double implied_k_psi() const { return k_theta - 1.0; }
    void validate() const;
};

struct ControlNoise {
    double u_lat = 0.0;  // std, command units
    double u_lon = 0.0;

    /// Std as a fraction of each channel's limit magnitude.
    static ControlNoise fraction(double f, const VehicleParams& p) { return {f * p.a_lat_max, f * p.u_lon_max}; }
};

struct SimConfig {
    double dt = 0.02;
    Integrator integrator = Integrator::rk4;
    double duration_max = 120.0;
    ControlNoise noise;
    std::uint64_t seed = 0;
    /// A subgoal counts as reached inside this radius, or once the agent crosses
    /// the subgoal's gate line (through the point, normal to psi) within gate_radius.
    double reach_radius = 0.5;
    double gate_radius = 3.0;
    double v0 = 0.0;
    std::size_t start_index = 0;

    void validate() const;
};

struct SimResult {
    Trajectory trajectory;  // carries ground-truth PlantedMode labels
    bool reached_goal = false;
    /// Per-sample index of the active target (subgoals.size() = goal corridor).
    std::vector<int> target;
    std::vector<GoalRef> targets;
};

/// Closed-loop rollout from `start`. Never throws on a missed goal; check
/// `reached_goal`.
SimResult run_tau_agent(const Workspace& workspace, const StartPose& start, const AgentParams& agent,
                        const VehicleParams& vehicle, const SimConfig& cfg);
/// Uses workspace.starts[cfg.start_index].
SimResult run_tau_agent(const Workspace& workspace, const AgentParams& agent, const VehicleParams& vehicle,
                        const SimConfig& cfg);

/// Ground-truth gaze behaviour planted by synth_gaze.
enum class GazeKind : int { cue = 0, anticipation = 1, saccade = 2 };

const char* to_string(GazeKind k);
GazeKind gaze_kind_from_string(const std::string& s);

struct GazeScheduleEntry {
    GazeKind kind = GazeKind::cue;
    double duration = 0.0;  // s
};

struct GazeSynthOptions {
    double lookahead = 1.5;  // s
    double noise = 0.0;      // std of additive point noise, length units
};

/// Synthesises a labelled gaze trace over the trajectory's timestamps.
///
/// Cue entries fixate the obstacle boundary point nearest the agent at entry
/// start; anticipation entries track the trajectory `lookahead` seconds ahead;
/// saccades interpolate linearly and land on the next entry's first point at
/// their last sample. Throws ValidationError if the schedule outlasts the
/// trajectory or a saccade is not bracketed by fixation/anticipation entries.
GazeTrace synth_gaze(const Trajectory& traj, const Workspace& workspace,
                     const std::vector<GazeScheduleEntry>& schedule, std::uint64_t seed,
                     const GazeSynthOptions& options = {});

/// Position linearly interpolated at time t, clamped to the trajectory span.
Vec2 trajectory_position_at(const Trajectory& traj, double t);

}  // namespace decomp
