#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "decomp/constraints.hpp"
#include "decomp/io.hpp"
#include "decomp/pipeline.hpp"
#include "decomp/scenario.hpp"
#include "decomp_oracle/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace decomp;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kStageFailure = 2;

struct StageFlags {
    std::string out;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string scenario, trajectories, workspace, gaze, vehicle, config;
};

int run_manifest(RunManifest m) {
    const json report = run_pipeline(m);
    std::cout << "wrote " << (m.output_dir / "report.json").string() << " (" << report["stages"].size()
              << " stages)\n";
    return kOk;
}

RunManifest stage_manifest(const std::string& stage, const StageFlags& f) {
    RunManifest m;
    m.output_dir = f.out;
    m.seed = f.seed;
    m.stages = {stage};
    m.workers = f.workers ? f.workers : default_workers();
    if (!f.scenario.empty()) {
        if (f.scenario == "planted-course")
            m.planted_course = true;
        else
            m.scenario = f.scenario;
    }
    if (!f.trajectories.empty()) m.trajectories = f.trajectories;
    if (!f.workspace.empty()) m.workspace = f.workspace;
    if (!f.gaze.empty()) m.gaze = f.gaze;
    if (!f.vehicle.empty()) m.vehicle = vehicle_from_json(io::load_json(f.vehicle));
    if (!f.config.empty()) m.config = analysis_config_from_json(io::load_json(f.config));
    return m;
}

VehicleParams vehicle_or_default(const std::string& path) {
    return path.empty() ? VehicleParams{} : vehicle_from_json(io::load_json(path));
}

oracle::Matrix matrix_of(const json& j, const char* name) {
    try {
        return j.at(name).get<oracle::Matrix>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("oracle input: '") + name + "' must be a matrix");
    }
}

int oracle_viterbi(const std::string& input) {
    const json j = io::load_json(input);
    std::vector<int> obs;
    std::vector<double> prior;
    try {
        obs = j.at("observations").get<std::vector<int>>();
        prior = j.at("prior").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("oracle input: ") + e.what());
    }
    const auto r = oracle::exhaustive_viterbi(obs, matrix_of(j, "T"), matrix_of(j, "Z"), prior);
    std::cout << json{{"path", r.path}, {"probability", io::round12(r.probability)}}.dump() << "\n";
    return kOk;
}

int oracle_euler(double dt, double duration, double every, const std::array<double, 4>& s0, double u_lat,
                 double u_lon, const std::string& vehicle) {
    const auto p = vehicle_or_default(vehicle);
    const auto rows = oracle::euler_reference({s0[0], s0[1], s0[2], s0[3]}, u_lat, u_lon, p, dt, duration, every);
    io::CsvWriter w(std::cout, {"t", "x", "y", "psi", "v"});
    for (const auto& [t, s] : rows) {
        w << t << s.x << s.y << s.psi << s.v;
        w.end_row();
    }
    return kOk;
}

int oracle_constraints(const std::string& traj_path, const std::string& labels_path, const std::string& vehicle,
                       double fraction) {
    const auto p = vehicle_or_default(vehicle);
    const Trajectory traj = io::load_trajectory(traj_path);
    std::vector<LabelRow> given;
    if (!labels_path.empty()) {
        given = load_constraint_labels(labels_path);
        if (given.size() != traj.size()) throw ValidationError("label file and trajectory differ in length");
    }
    io::CsvWriter w(std::cout, {"t", "c_ulat", "c_ulon", "c_omega", "c_v"});
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto c = oracle::relabel(traj[i], p, fraction);
        w << traj[i].t << c[0] << c[1] << c[2] << c[3];
        w.end_row();
        if (!given.empty()) {
            const auto& g = given[i].code;
            if (g.c_ulat != c[0] || g.c_ulon != c[1] || g.c_omega != c[2] || g.c_v != c[3]) ++mismatches;
        }
    }
    if (!given.empty()) {
        std::cerr << mismatches << " mismatches over " << traj.size() << " samples\n";
        if (mismatches) return kStageFailure;
    }
    return kOk;
}

int oracle_covariance(const std::string& input) {
    std::ifstream in(input);
    if (!in) throw ValidationError("cannot open " + input);
    std::string line;
    std::getline(in, line);
    oracle::Matrix rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> r;
        for (auto f : io::split_csv(line)) {
            try {
                r.push_back(std::stod(std::string(f)));
            } catch (const std::exception&) {
                throw ParseError(input, row, "value", "not a number");
            }
        }
        rows.push_back(std::move(r));
    }
    const auto c = oracle::hand_covariance(rows);
    json out = json::array();
    for (const auto& r : c) {
        json jr = json::array();
        for (double v : r) jr.push_back(io::round12(v));
        out.push_back(jr);
    }
    std::cout << json{{"covariance", out}}.dump() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guidance-behaviour decomposition toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    std::string manifest_path;
    std::size_t run_workers = 0;
    auto* run = app.add_subcommand("run", "Run the stages listed in a manifest");
    run->add_option("manifest", manifest_path, "Manifest JSON")->required();
    run->add_option("--workers", run_workers, "Worker threads (default: manifest, then $DECOMP_WORKERS)");
    run->callback([&] {
        action = [&] {
            RunManifest m = load_manifest(manifest_path);
            if (run_workers) m.workers = run_workers;
            return run_manifest(m);
        };
    });

    StageFlags flags;
    for (const auto& stage : stage_names()) {
        auto* sc = app.add_subcommand(stage, "Run the " + stage + " stage alone");
        sc->add_option("--out", flags.out, "Output directory")->required();
        sc->add_option("--seed", flags.seed, "Run seed");
        sc->add_option("--workers", flags.workers, "Worker threads");
        sc->add_option("--scenario", flags.scenario, "Scenario JSON, or 'planted-course'");
        sc->add_option("--trajectories", flags.trajectories, "Directory of trajectory CSVs to ingest");
        sc->add_option("--workspace", flags.workspace, "Workspace JSON to ingest");
        sc->add_option("--gaze", flags.gaze, "Directory of gaze CSVs to ingest");
        sc->add_option("--vehicle", flags.vehicle, "Vehicle parameter JSON");
        sc->add_option("--config", flags.config, "Stage config JSON (blocks keyed by stage name)");
        sc->callback([&, stage] { action = [&, stage] { return run_manifest(stage_manifest(stage, flags)); }; });
    }

    auto* orc = app.add_subcommand("oracle", "Brute-force reference computations");
    orc->require_subcommand(1);
    std::string input, traj, labels, vehicle;
    double dt = 1e-5, duration = 5.0, every = 0.0, u_lat = 0.0, u_lon = 0.0, fraction = 0.02;
    std::array<double, 4> s0{};

    auto* ov = orc->add_subcommand("viterbi", "Exhaustive best path for {T, Z, prior, observations}");
    ov->add_option("input", input, "JSON input")->required()->check(CLI::ExistingFile);
    ov->callback([&] { action = [&] { return oracle_viterbi(input); }; });

    auto* oe = orc->add_subcommand("euler", "Fine-step Euler trajectory with held inputs (CSV on stdout)");
    oe->add_option("--dt", dt, "Step (s)");
    oe->add_option("--duration", duration, "Horizon (s)");
    oe->add_option("--every", every, "Output spacing (s); 0 prints the final state only");
    oe->add_option("--x", s0[0]);
    oe->add_option("--y", s0[1]);
    oe->add_option("--psi", s0[2]);
    oe->add_option("--v", s0[3]);
    oe->add_option("--u-lat", u_lat);
    oe->add_option("--u-lon", u_lon);
    oe->add_option("--vehicle", vehicle, "Vehicle parameter JSON");
    oe->callback([&] { action = [&] { return oracle_euler(dt, duration, every, s0, u_lat, u_lon, vehicle); }; });

    auto* oc = orc->add_subcommand("constraints", "Re-derive constraint codes; compare with a label CSV if given");
    oc->add_option("trajectory", traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    oc->add_option("--labels", labels, "Label CSV to check")->check(CLI::ExistingFile);
    oc->add_option("--vehicle", vehicle, "Vehicle parameter JSON");
    oc->add_option("--eps-fraction", fraction, "Band width as a fraction of each range");
    oc->callback([&] { action = [&] { return oracle_constraints(traj, labels, vehicle, fraction); }; });

    auto* ocv = orc->add_subcommand("covariance", "Unbiased covariance of a CSV (header row, <= 5 columns)");
    ocv->add_option("input", input, "CSV input")->required()->check(CLI::ExistingFile);
    ocv->callback([&] { action = [&] { return oracle_covariance(input); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }
    try {
        return action();
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageFailure;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageFailure;
    }
}
