#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "decomp/simulator.hpp"
#include "decomp/types.hpp"

namespace decomp {

struct GazeScenario {
    bool enabled = true;
    /// Repeated until the trajectory span (minus the lookahead) is filled.
    std::vector<GazeScheduleEntry> pattern;
    GazeSynthOptions synth;
};

/// Everything the simulate stage needs: one rollout per workspace start.
struct Scenario {
    Workspace workspace;
    AgentParams agent;
    VehicleParams vehicle;
    SimConfig sim;
    /// Control-noise std as a fraction of each channel's limit.
    double noise_fraction = 0.0;
    GazeScenario gaze;

    void validate() const;
};

/// Three turn waypoints, four obstacles and 20 starts in a 5x4 grid.
Scenario planted_course();

/// Repeats `pattern` while it fits in `span - lookahead` seconds; never ends
/// on a saccade.
std::vector<GazeScheduleEntry> fill_schedule(const std::vector<GazeScheduleEntry>& pattern, double span,
                                             double lookahead);

nlohmann::json vehicle_to_json(const VehicleParams& p);
VehicleParams vehicle_from_json(const nlohmann::json& j, VehicleParams base = {});

/// `workspace` may be inline or a path relative to `base_dir`.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace decomp
