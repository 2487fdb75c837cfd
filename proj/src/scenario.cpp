#include "decomp/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"
#include "decomp/json_util.hpp"

namespace decomp {

using nlohmann::json;

void Scenario::validate() const {
    workspace.validate();
    vehicle.validate();
    agent.validate();
    sim.validate();
    if (workspace.starts.empty()) throw ValidationError("scenario: workspace has no starts");
    if (!(noise_fraction >= 0.0)) throw ValidationError("scenario: noise_fraction must be >= 0");
    if (gaze.enabled) {
        if (gaze.pattern.empty()) throw ValidationError("scenario: gaze pattern is empty");
        if (gaze.pattern.front().kind == GazeKind::saccade)
            throw ValidationError("scenario: gaze pattern must not start with a saccade");
        for (const auto& e : gaze.pattern)
            if (!(e.duration > 0.0)) throw ValidationError("scenario: gaze durations must be > 0");
    }
}

Scenario planted_course() {
    Scenario s;
    auto& ws = s.workspace;
    ws.bounds = {-40.0, -10.0, 40.0, 90.0};
    ws.goal.rect = {-20.0, 75.0, -10.0, 85.0};
    ws.goal.psi_G = kPi / 2;
    ws.obstacles = {
        {{0, 18}, {8, 18}, {8, 28}, {0, 28}},
        {{30, 30}, {36, 30}, {36, 45}, {30, 45}},
        {{-35, 25}, {-27, 25}, {-27, 40}, {-35, 40}},
        {{-5, 62}, {3, 62}, {3, 70}, {-5, 70}},
    };
    for (int k = 0; k < 20; ++k) ws.starts.push_back({-20.0 + (k % 5) * 2.5, (k / 5) * 1.5, 0.0});
    s.agent.subgoals = {{20, 12, kPi / 2, Approach::turn}, {10, 40, kPi, Approach::turn}, {-15, 55, kPi / 2, Approach::turn}};
    s.sim.reach_radius = 0.15;
    s.gaze.pattern = {{GazeKind::cue, 0.6}, {GazeKind::saccade, 0.1}, {GazeKind::anticipation, 1.5}, {GazeKind::saccade, 0.1}};
    s.gaze.synth.noise = 0.01;
    return s;
}

std::vector<GazeScheduleEntry> fill_schedule(const std::vector<GazeScheduleEntry>& pattern, double span,
                                             double lookahead) {
    std::vector<GazeScheduleEntry> out;
    if (pattern.empty()) return out;
    const double budget = span - lookahead;
    double total = 0.0;
    for (std::size_t q = 0; q < 100000; ++q) {
        const auto& e = pattern[q % pattern.size()];
        double need = e.duration;
        // A saccade is only useful together with the entry it lands on.
        if (e.kind == GazeKind::saccade) need += pattern[(q + 1) % pattern.size()].duration;
        if (total + need > budget + 1e-9) break;
        out.push_back(e);
        total += e.duration;
    }
    while (!out.empty() && out.back().kind == GazeKind::saccade) out.pop_back();
    return out;
}

json vehicle_to_json(const VehicleParams& p) {
    using io::round12;
    return {{"k_acc", round12(p.k_acc)},         {"k_drag", round12(p.k_drag)},
            {"omega_max", round12(p.omega_max)}, {"u_lon_max", round12(p.u_lon_max)},
            {"a_lat_max", round12(p.a_lat_max)}, {"v_floor", round12(p.v_floor)}};
}

VehicleParams vehicle_from_json(const json& j, VehicleParams p) {
    jsonutil::check_keys(j, {"k_acc", "k_drag", "omega_max", "u_lon_max", "a_lat_max", "v_floor"}, "vehicle");
    jsonutil::read(j, "k_acc", p.k_acc);
    jsonutil::read(j, "k_drag", p.k_drag);
    jsonutil::read(j, "omega_max", p.omega_max);
    jsonutil::read(j, "u_lon_max", p.u_lon_max);
    jsonutil::read(j, "a_lat_max", p.a_lat_max);
    jsonutil::read(j, "v_floor", p.v_floor);
    p.validate();
    return p;
}

namespace {

Approach approach_from(const std::string& s) {
    if (s == "turn") return Approach::turn;
    if (s == "straight") return Approach::straight;
    throw ValidationError("approach must be 'turn' or 'straight', got '" + s + "'");
}

const char* approach_name(Approach a) { return a == Approach::turn ? "turn" : "straight"; }

}  // namespace

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
    jsonutil::check_keys(j, {"workspace", "agent", "vehicle", "sim", "gaze"}, "scenario");
    Scenario s;
    try {
        const auto& w = j.at("workspace");
        if (w.is_string()) {
            std::filesystem::path p = w.get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!std::filesystem::exists(p)) throw ValidationError("scenario: workspace file not found: " + p.string());
            s.workspace = io::load_workspace(p);
        } else {
            s.workspace = io::workspace_from_json(w);
        }
        if (j.contains("vehicle")) s.vehicle = vehicle_from_json(j["vehicle"]);
        if (j.contains("agent")) {
            const auto& a = j["agent"];
            jsonutil::check_keys(a,
                                 {"k_theta", "k_steer", "k_v", "k_b", "heading_gain", "speed_gain", "turn_margin",
                                  "subgoals", "goal_approach"},
                                 "agent");
            jsonutil::read(a, "k_theta", s.agent.k_theta);
            jsonutil::read(a, "k_steer", s.agent.k_steer);
            jsonutil::read(a, "k_v", s.agent.k_v);
            jsonutil::read(a, "k_b", s.agent.k_b);
            jsonutil::read(a, "heading_gain", s.agent.heading_gain);
            jsonutil::read(a, "speed_gain", s.agent.speed_gain);
            jsonutil::read(a, "turn_margin", s.agent.turn_margin);
            if (a.contains("goal_approach")) s.agent.goal_approach = approach_from(a["goal_approach"].get<std::string>());
            for (const auto& w : a.value("subgoals", json::array())) {
                jsonutil::check_keys(w, {"x", "y", "psi", "approach"}, "agent.subgoals[]");
                Waypoint wp;
                wp.x = w.at("x").get<double>();
                wp.y = w.at("y").get<double>();
                wp.psi = read_angle(w.at("psi").get<double>());
                if (w.contains("approach")) wp.approach = approach_from(w["approach"].get<std::string>());
                s.agent.subgoals.push_back(wp);
            }
        }
        if (j.contains("sim")) {
            const auto& c = j["sim"];
            jsonutil::check_keys(c,
                                 {"dt", "integrator", "duration_max", "noise_fraction", "reach_radius", "gate_radius",
                                  "v0"},
                                 "sim");
            jsonutil::read(c, "dt", s.sim.dt);
            if (c.contains("integrator")) s.sim.integrator = integrator_from_string(c["integrator"].get<std::string>());
            jsonutil::read(c, "duration_max", s.sim.duration_max);
            jsonutil::read(c, "noise_fraction", s.noise_fraction);
            jsonutil::read(c, "reach_radius", s.sim.reach_radius);
            jsonutil::read(c, "gate_radius", s.sim.gate_radius);
            jsonutil::read(c, "v0", s.sim.v0);
        }
        if (j.contains("gaze")) {
            const auto& g = j["gaze"];
            jsonutil::check_keys(g, {"enabled", "pattern", "lookahead", "noise"}, "gaze");
            jsonutil::read(g, "enabled", s.gaze.enabled);
            jsonutil::read(g, "lookahead", s.gaze.synth.lookahead);
            jsonutil::read(g, "noise", s.gaze.synth.noise);
            for (const auto& e : g.value("pattern", json::array())) {
                jsonutil::check_keys(e, {"kind", "duration"}, "gaze.pattern[]");
                s.gaze.pattern.push_back({gaze_kind_from_string(e.at("kind").get<std::string>()),
                                          e.at("duration").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    s.sim.noise = ControlNoise::fraction(s.noise_fraction, s.vehicle);
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    using io::round12;
    json j;
    j["workspace"] = io::workspace_to_json(s.workspace);
    j["vehicle"] = vehicle_to_json(s.vehicle);
    json wps = json::array();
    for (const auto& w : s.agent.subgoals)
        wps.push_back({{"x", round12(w.x)}, {"y", round12(w.y)}, {"psi", round12(w.psi)}, {"approach", approach_name(w.approach)}});
    j["agent"] = {{"k_theta", round12(s.agent.k_theta)},
                  {"k_steer", round12(s.agent.k_steer)},
                  {"k_v", round12(s.agent.k_v)},
                  {"k_b", round12(s.agent.k_b)},
                  {"heading_gain", round12(s.agent.heading_gain)},
                  {"speed_gain", round12(s.agent.speed_gain)},
                  {"turn_margin", round12(s.agent.turn_margin)},
                  {"subgoals", wps},
                  {"goal_approach", approach_name(s.agent.goal_approach)}};
    j["sim"] = {{"dt", round12(s.sim.dt)},
                {"integrator", to_string(s.sim.integrator)},
                {"duration_max", round12(s.sim.duration_max)},
                {"noise_fraction", round12(s.noise_fraction)},
                {"reach_radius", round12(s.sim.reach_radius)},
                {"gate_radius", round12(s.sim.gate_radius)},
                {"v0", round12(s.sim.v0)}};
    json pat = json::array();
    for (const auto& e : s.gaze.pattern) pat.push_back({{"kind", to_string(e.kind)}, {"duration", round12(e.duration)}});
    j["gaze"] = {{"enabled", s.gaze.enabled},
                 {"pattern", pat},
                 {"lookahead", round12(s.gaze.synth.lookahead)},
                 {"noise", round12(s.gaze.synth.noise)}};
    return j;
}

}  // namespace decomp
