#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "decomp/analysis.hpp"
#include "decomp/scenario.hpp"
#include "decomp/types.hpp"

namespace decomp {

/// Stage names in execution order.
const std::vector<std::string>& stage_names();
/// Position in stage_names(); throws ValidationError for unknown names.
std::size_t stage_index(const std::string& name);

/// A stage threw; the run stops and keeps whatever was already written.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct RunManifest {
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> stages = stage_names();
    std::size_t workers = 1;

    /// Scenario file, or the built-in planted course when `planted_course` is set.
    std::optional<std::filesystem::path> scenario;
    bool planted_course = false;
    std::optional<std::filesystem::path> workspace;
    std::optional<std::filesystem::path> trajectories;  // directory of trajectory CSVs
    std::optional<std::filesystem::path> gaze;          // directory of gaze CSVs, matched by file stem

    std::optional<VehicleParams> vehicle;
    AnalysisConfig config;

    /// Checks stage order, referenced paths and that every stage's inputs are
    /// either produced earlier in the run or already present in output_dir.
    void validate() const;
};

/// Default worker count: $DECOMP_WORKERS when set and positive, else 1.
std::size_t default_workers();

/// Relative paths resolve against `base_dir`.
RunManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

/// Runs the listed stages in order. Each stage reads its inputs back from
/// output_dir, writes its files plus stages/<stage>.json, and report.json
/// aggregates the stages of this invocation. Validates first; throws
/// ValidationError before anything runs, StageError once a stage fails.
nlohmann::json run_pipeline(const RunManifest& manifest);

}  // namespace decomp
