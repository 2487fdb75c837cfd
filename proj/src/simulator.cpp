#include "decomp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "decomp/geometry.hpp"

namespace decomp {

void AgentParams::validate() const {
    if (!(k_theta > 1.0) || !std::isfinite(k_theta))
        throw ValidationError("k_theta must be finite and > 1 for the heading law to close");
    const double gains[] = {k_steer, k_v, k_b, heading_gain, speed_gain, turn_margin};
    for (double g : gains)
        if (!std::isfinite(g)) throw ValidationError("agent gains must be finite");
    if (!(turn_margin > 0.0 && turn_margin <= 1.0)) throw ValidationError("turn_margin must be in (0, 1]");
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(duration_max > 0.0)) throw ValidationError("duration_max must be > 0");
    if (noise.u_lat < 0.0 || noise.u_lon < 0.0) throw ValidationError("noise std must be >= 0");
    if (!(reach_radius > 0.0)) throw ValidationError("reach_radius must be > 0");
}

namespace {

enum class Phase { rectilinear, brake, turn };

struct Target {
    GoalRef ref;
    Approach approach;
};

struct OnsetPrediction {
    double distance = 0.0;  // along-track distance to the onset point
    double v_turn = 0.0;    // highest speed the turn can be entered at
};

/// Where along the current straight line the steering ratio reaches k_steer,
/// and the entry speed allowed by the curvature there.
std::optional<OnsetPrediction> predict_onset(const VehicleState& s, const GoalRef& g, const AgentParams& a,
                                             const VehicleParams& p) {
    const double phi = angle_diff(s.psi, g.psi);
    const double theta_star = phi / a.k_steer;
    if (std::abs(theta_star) < 1e-3 || std::abs(theta_star) >= kPi / 2) return std::nullopt;
    const Vec2 h{std::cos(s.psi), std::sin(s.psi)};
    const Vec2 n{-h.y, h.x};
    const Vec2 rel = g.position() - s.position();
    const double along = dot(rel, h);
    const double lateral = dot(rel, n);
    // The goal sits at relative bearing -theta on the onset line.
    if (lateral * -theta_star <= 0.0) return std::nullopt;
    const double dist = along - lateral / std::tan(-theta_star);
    const double r0 = std::abs(lateral / std::sin(theta_star));
    const double k = a.k_theta;
    const double kappa0 = k / (k - 1.0) * std::abs(std::sin(theta_star)) / r0;
    OnsetPrediction out;
    out.distance = std::max(dist, 0.0);
    out.v_turn = std::min(std::sqrt(a.turn_margin * p.a_lat_max / kappa0), a.turn_margin * p.omega_max / kappa0);
    return out;
}

bool target_reached(const VehicleState& s, const GoalRef& g, const SimConfig& cfg) {
    const Vec2 rel = s.position() - g.position();
    const double d = std::hypot(rel.x, rel.y);
    if (d < cfg.reach_radius) return true;
    const double past = dot(rel, {std::cos(g.psi), std::sin(g.psi)});
    return past >= 0.0 && d < cfg.gate_radius;
}

}  // namespace

SimResult run_tau_agent(const Workspace& ws, const StartPose& start, const AgentParams& a, const VehicleParams& p,
                        const SimConfig& cfg) {
    p.validate();
    a.validate();
    cfg.validate();

    std::vector<Target> targets;
    for (const auto& w : a.subgoals) targets.push_back({w.ref(), w.approach});
    targets.push_back({goal_reference(ws.goal), a.goal_approach});

    SimResult result;
    for (const auto& t : targets) result.targets.push_back(t.ref);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    VehicleState s{start.x, start.y, wrap_angle(start.psi0), std::max(cfg.v0, 0.0), 0.0};
    std::size_t ti = 0;
    Phase phase = Phase::rectilinear;
    double psi_hold = s.psi;
    double v_turn = p.v_max();
    double prev_dk = std::numeric_limits<double>::quiet_NaN();

    std::vector<TrajectorySample> samples;
    std::vector<int> modes;
    const auto n_max = static_cast<std::size_t>(std::floor(cfg.duration_max / cfg.dt)) + 1;

    for (std::size_t i = 0; i < n_max; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        if (ti < targets.size() - 1 && target_reached(s, targets[ti].ref, cfg)) {
            ++ti;
            phase = Phase::rectilinear;
            psi_hold = s.psi;
            prev_dk = std::numeric_limits<double>::quiet_NaN();
        }
        const Target& tgt = targets[ti];
        const GoalRef& g = tgt.ref;
        const GoalPolar gp = goal_polar(s, g);
        const double phi = angle_diff(s.psi, g.psi);

        if (phase != Phase::turn && tgt.approach == Approach::turn) {
            double dk = std::numeric_limits<double>::quiet_NaN();
            if (std::abs(gp.theta_G) > 1e-2 && phi * gp.theta_G > 0.0) dk = phi / gp.theta_G - a.k_steer;
            const double dk_rate = (dk - prev_dk) / cfg.dt;
            const bool crossing =
                std::isfinite(dk) && (dk <= 0.0 || (std::isfinite(dk_rate) && dk_rate < 0.0 && dk / -dk_rate < cfg.dt / 2));
            prev_dk = dk;
            if (crossing) {
                phase = Phase::turn;
            } else if (auto onset = predict_onset(s, g, a, p)) {
                v_turn = onset->v_turn;
                if (phase == Phase::rectilinear && s.v > v_turn) {
                    // tau_v = (v - v_turn) / (k_drag v) under coasting, tau_d = D / v.
                    const bool tau_brake = (s.v - v_turn) / p.k_drag >= a.k_v * onset->distance;
                    const bool ratio_brake = a.k_b > 0.0 && std::isfinite(dk) && s.v > v_turn + a.k_b * dk;
                    if (tau_brake || ratio_brake) phase = Phase::brake;
                }
            }
        }

        ControlInput u;
        const double v_eff = std::max(s.v, p.v_floor);
        if (phase == Phase::turn) {
            const double beta = std::atan2(g.y - s.y, g.x - s.x);
            const double b = angle_diff(beta, g.psi);
            const double k = a.k_theta;
            const double psi_ref = g.psi + k * b / (k - 1.0);
            const double beta_rate = gp.d_G > 1e-9 ? s.v * std::sin(beta - s.psi) / gp.d_G : 0.0;
            const double omega_cmd = k / (k - 1.0) * beta_rate + a.heading_gain * angle_diff(psi_ref, s.psi);
            u.u_lat = omega_cmd * v_eff;
            u.u_lon = (p.k_drag * v_turn + a.speed_gain * (v_turn - s.v)) / p.k_acc;
        } else {
            u.u_lat = a.heading_gain * angle_diff(psi_hold, s.psi) * v_eff;
            u.u_lon = phase == Phase::brake ? 0.0 : p.u_lon_max;
        }
        u = clamp_input(u, p);
        if (cfg.noise.u_lat > 0.0) u.u_lat += cfg.noise.u_lat * gauss(rng);
        if (cfg.noise.u_lon > 0.0) u.u_lon += cfg.noise.u_lon * gauss(rng);
        u = clamp_input(u, p);

        s.omega = turn_rate(u.u_lat, s.v, p);
        samples.push_back({t, s, u});
        const PlantedMode mode = phase == Phase::turn    ? PlantedMode::turn
                                 : phase == Phase::brake ? PlantedMode::brake
                                                         : PlantedMode::rectilinear;
        modes.push_back(static_cast<int>(mode));
        result.target.push_back(static_cast<int>(ti));

        if (ti == targets.size() - 1 && ws.goal.rect.contains(s.position())) {
            result.reached_goal = true;
            break;
        }
        s = step_dynamics(s, u, p, cfg.dt, cfg.integrator);
    }

    TrajectoryMeta meta;
    meta.start_id = std::to_string(cfg.start_index);
    result.trajectory = Trajectory(std::move(samples), std::move(meta), std::move(modes));
    return result;
}

SimResult run_tau_agent(const Workspace& ws, const AgentParams& a, const VehicleParams& p, const SimConfig& cfg) {
    if (cfg.start_index >= ws.starts.size()) throw ValidationError("start_index out of range");
    return run_tau_agent(ws, ws.starts[cfg.start_index], a, p, cfg);
}

const char* to_string(GazeKind k) {
    switch (k) {
        case GazeKind::cue: return "cue";
        case GazeKind::anticipation: return "anticipation";
        case GazeKind::saccade: return "saccade";
    }
    return "unknown";
}

GazeKind gaze_kind_from_string(const std::string& s) {
    if (s == "cue" || s == "fixation") return GazeKind::cue;
    if (s == "anticipation") return GazeKind::anticipation;
    if (s == "saccade") return GazeKind::saccade;
    throw ValidationError("unknown gaze kind '" + s + "'");
}

Vec2 trajectory_position_at(const Trajectory& traj, double t) {
    const auto& sm = traj.samples();
    if (t <= sm.front().t) return sm.front().state.position();
    if (t >= sm.back().t) return sm.back().state.position();
    const double f = (t - sm.front().t) / traj.period();
    auto i = static_cast<std::size_t>(std::floor(f));
    i = std::min(i, sm.size() - 2);
    const double w = (t - sm[i].t) / (sm[i + 1].t - sm[i].t);
    const Vec2 a = sm[i].state.position();
    const Vec2 b = sm[i + 1].state.position();
    return a + w * (b - a);
}

GazeTrace synth_gaze(const Trajectory& traj, const Workspace& ws, const std::vector<GazeScheduleEntry>& schedule,
                     std::uint64_t seed, const GazeSynthOptions& opt) {
    if (schedule.empty()) throw ValidationError("gaze schedule is empty");
    double total = 0.0;
    for (const auto& e : schedule) {
        if (!(e.duration > 0.0)) throw ValidationError("gaze schedule durations must be > 0");
        total += e.duration;
    }
    const double t0 = traj[0].t;
    const double span = traj.samples().back().t - t0 + traj.period();
    if (total > span + 1e-9) throw ValidationError("gaze schedule outlasts the trajectory");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (schedule[k].kind != GazeKind::saccade) continue;
        if (k == 0 || k + 1 == schedule.size() || schedule[k - 1].kind == GazeKind::saccade ||
            schedule[k + 1].kind == GazeKind::saccade)
            throw ValidationError("each saccade must sit between two fixation/anticipation entries");
    }

    // Assign samples to schedule entries by elapsed time.
    std::vector<std::vector<std::size_t>> members(schedule.size());
    {
        std::size_t k = 0;
        double end = schedule[0].duration;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double el = traj[i].t - t0;
            while (k < schedule.size() && el >= end - 1e-9) {
                ++k;
                if (k < schedule.size()) end += schedule[k].duration;
            }
            if (k >= schedule.size()) break;
            members[k].push_back(i);
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec2> pts(traj.size());
    std::vector<int> kind(traj.size(), -1);

    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const auto& idx = members[k];
        if (idx.empty() || schedule[k].kind == GazeKind::saccade) continue;
        Vec2 fixed{};
        if (schedule[k].kind == GazeKind::cue) {
            const auto hit = nearest_obstacle_point(traj[idx.front()].state.position(), ws);
            if (!hit) throw ValidationError("cue fixation requires at least one obstacle");
            fixed = hit->point;
        }
        for (std::size_t i : idx) {
            Vec2 q = schedule[k].kind == GazeKind::cue ? fixed : trajectory_position_at(traj, traj[i].t + opt.lookahead);
            if (opt.noise > 0.0) q = q + Vec2{opt.noise * gauss(rng), opt.noise * gauss(rng)};
            pts[i] = q;
            kind[i] = static_cast<int>(schedule[k].kind);
        }
    }
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const auto& idx = members[k];
        if (idx.empty() || schedule[k].kind != GazeKind::saccade) continue;
        if (idx.front() == 0 || members[k + 1].empty())
            throw ValidationError("saccade has no landing point inside the trajectory");
        const Vec2 from = pts[idx.front() - 1];
        const Vec2 to = pts[members[k + 1].front()];
        const double n = static_cast<double>(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            pts[idx[j]] = from + ((static_cast<double>(j) + 1.0) / n) * (to - from);
            kind[idx[j]] = static_cast<int>(GazeKind::saccade);
        }
    }

    GazeTrace trace;
    std::vector<int> modes;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (kind[i] < 0) break;
        trace.samples.push_back({traj[i].t, pts[i].x, pts[i].y, true});
        modes.push_back(kind[i]);
    }
    trace.modes = std::move(modes);
    return trace;
}

}  // namespace decomp
