#include "decomp/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"
#include "decomp/json_util.hpp"
#include "decomp/parallel.hpp"

namespace decomp {

namespace fs = std::filesystem;
using nlohmann::json;
using io::round12;

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"simulate", "label-constraints", "subgoals", "segment", "fit-mrf",
                                                "cluster-modes", "viterbi", "tau-fit", "gaze"};
    return names;
}

std::size_t stage_index(const std::string& name) {
    const auto& n = stage_names();
    const auto it = std::find(n.begin(), n.end(), name);
    if (it == n.end()) throw ValidationError("unknown stage '" + name + "'");
    return static_cast<std::size_t>(it - n.begin());
}

StageError::StageError(std::string stage, const std::string& what)
    : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

std::size_t default_workers() {
    if (const char* e = std::getenv("DECOMP_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

namespace {

// Artifacts passed between stages through output_dir.
enum class Artifact { trajectories, workspace, labels, subgoals, segments, graphs, model, gaze };

const char* artifact_name(Artifact a) {
    switch (a) {
        case Artifact::trajectories: return "trajectories";
        case Artifact::workspace: return "workspace.json";
        case Artifact::labels: return "classes.json";
        case Artifact::subgoals: return "subgoals.json";
        case Artifact::segments: return "segments.json";
        case Artifact::graphs: return "graphs.json";
        case Artifact::model: return "mode_model.json";
        case Artifact::gaze: return "gaze";
    }
    return "";
}

std::vector<Artifact> stage_needs(const std::string& s, const AnalysisConfig& cfg) {
    using A = Artifact;
    if (s == "label-constraints") return {A::trajectories};
    if (s == "subgoals") return {A::trajectories, A::labels};
    if (s == "segment") return {A::trajectories, A::subgoals, A::workspace};
    if (s == "fit-mrf") return {A::trajectories, A::labels, A::segments};
    if (s == "cluster-modes") return {A::trajectories, A::labels, A::graphs};
    if (s == "viterbi") return {A::trajectories, A::labels, A::model};
    if (s == "tau-fit") {
        std::vector<A> v{A::trajectories, A::labels, A::segments};
        if (cfg.turn_source == "viterbi") v.push_back(A::model);
        return v;
    }
    if (s == "gaze") return {A::trajectories, A::workspace, A::gaze};
    return {};
}

std::vector<Artifact> stage_makes(const std::string& s) {
    using A = Artifact;
    if (s == "simulate") return {A::trajectories, A::workspace, A::gaze};
    if (s == "label-constraints") return {A::labels};
    if (s == "subgoals") return {A::subgoals};
    if (s == "segment") return {A::segments};
    if (s == "fit-mrf") return {A::graphs};
    if (s == "cluster-modes") return {A::model};
    return {};
}

std::vector<fs::path> csv_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

bool artifact_on_disk(const fs::path& root, Artifact a) {
    if (a == Artifact::trajectories || a == Artifact::gaze) return !csv_files(root / artifact_name(a)).empty();
    return fs::exists(root / artifact_name(a));
}

void reset_dir(const fs::path& d) {
    fs::remove_all(d);
    fs::create_directories(d);
}

json code_json(const ConstraintState& c) { return json::array({c.c_ulat, c.c_ulon, c.c_omega, c.c_v}); }

ConstraintState code_from(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 4) throw ValidationError("constraint code must have 4 entries");
    return {v[0], v[1], v[2], v[3]};
}

json catalog_json(const ClassCatalog& cat) {
    json a = json::array();
    for (const auto& c : cat.classes)
        a.push_back({{"id", c.id}, {"code", code_json(c.code)}, {"label", c.code.to_string()}, {"count", c.count},
                     {"frequency", round12(c.frequency)}});
    return a;
}

json pose_json(double x, double y, double psi) { return {{"x", round12(x)}, {"y", round12(y)}, {"psi", round12(psi)}}; }

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// Reads stage inputs back from the output directory.
class Store {
public:
    Store(fs::path root, std::optional<VehicleParams> vehicle) : root_(std::move(root)), vehicle_(vehicle) {}

    const fs::path& root() const { return root_; }

    std::vector<std::string> stems() const {
        std::vector<std::string> s;
        for (const auto& p : csv_files(root_ / "trajectories")) s.push_back(p.stem().string());
        return s;
    }

    std::vector<Trajectory> trajectories() const {
        std::vector<Trajectory> out;
        for (const auto& p : csv_files(root_ / "trajectories")) out.push_back(io::load_trajectory(p));
        if (out.empty()) throw ValidationError("no trajectories in " + (root_ / "trajectories").string());
        return out;
    }

    Workspace workspace() const { return io::load_workspace(root_ / "workspace.json"); }

    VehicleParams vehicle() const {
        if (vehicle_) return *vehicle_;
        const auto ds = root_ / "dataset.json";
        if (fs::exists(ds)) {
            const json j = io::load_json(ds);
            if (j.contains("vehicle")) return vehicle_from_json(j["vehicle"]);
        }
        return {};
    }

    LabelSet labels(const std::vector<std::string>& stems) const {
        const json j = io::load_json(root_ / "classes.json");
        LabelSet ls;
        try {
            for (const auto& c : j.at("classes")) {
                ConstraintClass k;
                k.id = c.at("id").get<int>();
                k.code = code_from(c.at("code"));
                k.count = c.at("count").get<std::size_t>();
                k.frequency = c.at("frequency").get<double>();
                ls.catalog.classes.push_back(k);
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("classes.json: ") + e.what());
        }
        for (const auto& s : stems) {
            const auto rows = load_constraint_labels(root_ / "labels" / (s + ".csv"));
            std::vector<ConstraintState> codes;
            std::vector<int> ids;
            for (const auto& r : rows) {
                codes.push_back(r.code);
                ids.push_back(r.class_id);
            }
            ls.labels.push_back(std::move(codes));
            ls.class_ids.push_back(std::move(ids));
        }
        return ls;
    }

    SubgoalClustering subgoals() const {
        const json j = io::load_json(root_ / "subgoals.json");
        SubgoalClustering sg;
        try {
            for (const auto& s : j.at("subgoals")) {
                Subgoal g;
                g.trajectory = s.at("trajectory").get<std::size_t>();
                g.sample = s.at("sample").get<std::size_t>();
                g.x = s.at("x").get<double>();
                g.y = s.at("y").get<double>();
                g.psi = s.at("psi").get<double>();
                if (!s.at("cluster").is_null()) g.cluster_id = s["cluster"].get<int>();
                sg.subgoals.push_back(g);
            }
            for (const auto& c : j.at("centers")) {
                ClusterCenter k;
                k.id = c.at("id").get<int>();
                k.x = c.at("x").get<double>();
                k.y = c.at("y").get<double>();
                k.psi = c.at("psi").get<double>();
                k.members = c.at("members").get<std::size_t>();
                sg.centers.push_back(k);
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("subgoals.json: ") + e.what());
        }
        return sg;
    }

    std::vector<SegmentRecord> segments() const {
        const json j = io::load_json(root_ / "segments.json");
        std::vector<SegmentRecord> out;
        try {
            for (const auto& s : j.at("segments")) {
                SegmentRecord r;
                r.trajectory = s.at("trajectory").get<std::size_t>();
                r.begin = s.at("begin").get<std::size_t>();
                r.end = s.at("end").get<std::size_t>();
                if (!s.at("start_subgoal").is_null()) r.start_subgoal = s["start_subgoal"].get<std::size_t>();
                if (!s.at("end_subgoal").is_null()) r.end_subgoal = s["end_subgoal"].get<std::size_t>();
                const auto& g = s.at("goal");
                r.goal = {g.at("x").get<double>(), g.at("y").get<double>(), g.at("psi").get<double>()};
                r.goal_source = s.at("goal_source").get<std::string>();
                const auto& t = s.at("transform");
                r.transform.angle = t.at("angle").get<double>();
                r.transform.offset = {t.at("offset").at(0).get<double>(), t.at("offset").at(1).get<double>()};
                out.push_back(r);
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("segments.json: ") + e.what());
        }
        return out;
    }

    ClassGraphs graphs() const {
        const json j = io::load_json(root_ / "graphs.json");
        ClassGraphs g;
        try {
            for (auto it = j.at("graphs").begin(); it != j.at("graphs").end(); ++it)
                g.graphs[std::stoi(it.key())] = graph_from_json(it.value());
            g.skipped = j.at("skipped").get<std::vector<int>>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("graphs.json: ") + e.what());
        }
        return g;
    }

    ModeModel model() const { return ModeModel::from_json(io::load_json(root_ / "mode_model.json")); }

    /// Gaze trace per trajectory stem, when one exists.
    std::vector<std::optional<GazeTrace>> gaze(const std::vector<std::string>& stems) const {
        std::vector<std::optional<GazeTrace>> out;
        for (const auto& s : stems) {
            const auto p = root_ / "gaze" / (s + ".csv");
            out.push_back(fs::exists(p) ? std::optional(io::load_gaze(p)) : std::nullopt);
        }
        return out;
    }

private:
    fs::path root_;
    std::optional<VehicleParams> vehicle_;
};

std::string traj_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "traj_%03zu", i);
    return buf;
}

Scenario manifest_scenario(const RunManifest& m) {
    Scenario s;
    if (m.planted_course) {
        s = planted_course();
        s.sim.noise = ControlNoise::fraction(s.noise_fraction, s.vehicle);
    } else {
        s = scenario_from_json(io::load_json(*m.scenario), m.scenario->parent_path());
    }
    if (m.vehicle) {
        s.vehicle = *m.vehicle;
        s.sim.noise = ControlNoise::fraction(s.noise_fraction, s.vehicle);
    }
    return s;
}

json dataset_json(const std::vector<std::string>& stems, const VehicleParams& p, bool gaze, const std::string& source) {
    return {{"trajectories", stems}, {"vehicle", vehicle_to_json(p)}, {"gaze", gaze}, {"source", source}};
}

json stage_simulate(const RunManifest& m, const Store& st) {
    const Scenario sc = manifest_scenario(m);
    const auto n = sc.workspace.starts.size();
    const std::uint64_t sim_seed = derive_seed(m.seed, "simulate");
    const std::uint64_t gaze_seed = derive_seed(m.seed, "gaze-synth");
    std::vector<SimResult> runs(n);
    std::vector<std::optional<GazeTrace>> gaze(n);
    parallel_for(n, m.workers, [&](std::size_t i) {
        SimConfig cfg = sc.sim;
        cfg.seed = derive_seed(sim_seed, i);
        cfg.start_index = i;
        runs[i] = run_tau_agent(sc.workspace, sc.agent, sc.vehicle, cfg);
        auto& meta = runs[i].trajectory.meta();
        meta.trial_id = traj_name(i);
        meta.start_id = std::to_string(i);
        if (sc.gaze.enabled) {
            const auto& tr = runs[i].trajectory;
            const double span = tr.samples().back().t - tr.samples().front().t;
            const auto schedule = fill_schedule(sc.gaze.pattern, span, sc.gaze.synth.lookahead);
            if (!schedule.empty())
                gaze[i] = synth_gaze(tr, sc.workspace, schedule, derive_seed(gaze_seed, i), sc.gaze.synth);
        }
    });

    const fs::path root = st.root();
    reset_dir(root / "trajectories");
    reset_dir(root / "gaze");
    std::vector<std::string> stems;
    std::size_t reached = 0, samples = 0, traces = 0;
    std::array<std::size_t, 3> planted{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tr = runs[i].trajectory;
        stems.push_back(traj_name(i));
        io::save_trajectory(tr, root / "trajectories" / (stems.back() + ".csv"));
        if (gaze[i]) {
            io::save_gaze(*gaze[i], root / "gaze" / (stems.back() + ".csv"));
            ++traces;
        }
        reached += runs[i].reached_goal ? 1 : 0;
        samples += tr.size();
        if (tr.modes())
            for (int md : *tr.modes())
                if (md >= 0 && md < 3) ++planted[static_cast<std::size_t>(md)];
    }
    io::save_workspace(sc.workspace, root / "workspace.json");
    io::save_json(scenario_to_json(sc), root / "scenario.json");
    io::save_json(dataset_json(stems, sc.vehicle, traces > 0, "simulate"), root / "dataset.json");
    return {{"n_trajectories", n},
            {"reached_goal", reached},
            {"n_samples", samples},
            {"gaze_traces", traces},
            {"planted_frames",
             {{"rectilinear", planted[0]}, {"turn", planted[1]}, {"brake", planted[2]}}}};
}

void ingest(const RunManifest& m) {
    const fs::path root = m.output_dir;
    std::vector<std::string> stems;
    if (m.trajectories) {
        reset_dir(root / "trajectories");
        for (const auto& p : csv_files(*m.trajectories)) {
            io::load_trajectory(p).validate();
            fs::copy_file(p, root / "trajectories" / p.filename(), fs::copy_options::overwrite_existing);
            stems.push_back(p.stem().string());
        }
    }
    if (m.workspace) io::save_workspace(io::load_workspace(*m.workspace), root / "workspace.json");
    if (m.gaze) {
        reset_dir(root / "gaze");
        for (const auto& p : csv_files(*m.gaze)) {
            io::load_gaze(p);
            fs::copy_file(p, root / "gaze" / p.filename(), fs::copy_options::overwrite_existing);
        }
    }
    if (m.trajectories)
        io::save_json(dataset_json(stems, m.vehicle.value_or(VehicleParams{}), m.gaze.has_value(), "external"),
                      root / "dataset.json");
}

json stage_label(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const auto p = st.vehicle();
    const LabelSet ls = label_dataset(trajs, p, m.config, m.workers);
    reset_dir(st.root() / "labels");
    for (std::size_t i = 0; i < trajs.size(); ++i)
        save_constraint_labels(trajs[i], ls.labels[i], ls.class_ids[i], st.root() / "labels" / (stems[i] + ".csv"));
    std::size_t total = 0;
    for (const auto& c : ls.catalog.classes) total += c.count;
    const auto tol = ConstraintTolerances::defaults(p, m.config.eps_fraction);
    io::save_json({{"classes", catalog_json(ls.catalog)},
                   {"n_samples", total},
                   {"eps", {{"u_lat", round12(tol.u_lat)}, {"u_lon", round12(tol.u_lon)},
                            {"omega", round12(tol.omega)}, {"v", round12(tol.v)}}}},
                  st.root() / "classes.json");
    return {{"class_count", ls.catalog.size()}, {"n_samples", total}, {"classes", catalog_json(ls.catalog)}};
}

std::vector<std::vector<bool>> dataset_turning(const RunManifest& m, const Store& st, const std::vector<Trajectory>& trajs,
                                               const LabelSet& ls) {
    if (m.config.turn_source == "viterbi") {
        const ModeModel model = st.model();
        const Decoded d = decode_dataset(ls.class_ids, model, m.workers);
        std::vector<std::vector<bool>> out;
        for (const auto& path : d.viterbi) {
            std::vector<bool> f;
            for (int md : path) f.push_back(model.labels.at(static_cast<std::size_t>(md)) == "turn");
            out.push_back(std::move(f));
        }
        return out;
    }
    return turning_dataset(trajs, ls.labels, st.vehicle(), m.config);
}

json stage_subgoals(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const LabelSet ls = st.labels(stems);
    const auto turning = turning_dataset(trajs, ls.labels, st.vehicle(), m.config);
    const SubgoalClustering sg = find_subgoals(trajs, turning, m.config);
    json subs = json::array(), centers = json::array();
    std::size_t noise = 0;
    for (const auto& s : sg.subgoals) {
        json j = pose_json(s.x, s.y, s.psi);
        j["trajectory"] = s.trajectory;
        j["file"] = stems[s.trajectory];
        j["sample"] = s.sample;
        j["t"] = round12(trajs[s.trajectory][s.sample].t);
        j["cluster"] = opt_json(s.cluster_id);
        subs.push_back(j);
        if (!s.cluster_id) ++noise;
    }
    for (const auto& c : sg.centers) {
        json j = pose_json(c.x, c.y, c.psi);
        j["id"] = c.id;
        j["members"] = c.members;
        centers.push_back(j);
    }
    io::save_json({{"subgoals", subs}, {"centers", centers}}, st.root() / "subgoals.json");
    return {{"n_subgoals", sg.subgoals.size()}, {"n_clusters", sg.centers.size()}, {"noise", noise},
            {"centers", centers}};
}

json stage_segment(const RunManifest&, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const auto segs = segment_dataset(trajs, st.subgoals(), st.workspace());
    json arr = json::array();
    std::map<std::string, std::size_t> sources;
    std::ofstream csv(st.root() / "segments_aligned.csv");
    if (!csv) throw Error("cannot write segments_aligned.csv");
    io::CsvWriter w(csv, {"segment", "t", "x", "y", "psi"});
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        arr.push_back({{"trajectory", s.trajectory},
                       {"file", stems[s.trajectory]},
                       {"begin", s.begin},
                       {"end", s.end},
                       {"start_subgoal", opt_json(s.start_subgoal)},
                       {"end_subgoal", opt_json(s.end_subgoal)},
                       {"goal", pose_json(s.goal.x, s.goal.y, s.goal.psi)},
                       {"goal_source", s.goal_source},
                       {"transform",
                        {{"angle", round12(s.transform.angle)},
                         {"offset", {round12(s.transform.offset.x), round12(s.transform.offset.y)}}}}});
        ++sources[s.goal_source];
        for (std::size_t i = s.begin; i <= s.end; ++i) {
            const auto& smp = trajs[s.trajectory][i];
            const Vec2 q = s.transform.apply(smp.state.position());
            w << k << smp.t << q.x << q.y << s.transform.apply_heading(smp.state.psi);
            w.end_row();
        }
    }
    io::save_json({{"segments", arr}}, st.root() / "segments.json");
    return {{"n_segments", segs.size()}, {"goal_sources", sources}};
}

json stage_fit_mrf(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const LabelSet ls = st.labels(stems);
    const ClassGraphs g = fit_dataset_graphs(trajs, st.segments(), ls, m.config);
    json graphs = json::object(), edges = json::object();
    for (const auto& [id, pg] : g.graphs) {
        graphs[std::to_string(id)] = graph_to_json(pg);
        json e = json::array();
        for (const auto& [a, b] : pg.edge_set()) e.push_back({a, b});
        edges[std::to_string(id)] = e;
    }
    io::save_json({{"graphs", graphs}, {"skipped", g.skipped}, {"signals", m.config.signals}}, st.root() / "graphs.json");
    return {{"n_graphs", g.graphs.size()}, {"skipped", g.skipped}, {"edges", edges}};
}

json mode_frequencies(const std::vector<std::vector<int>>& paths, std::size_t n_modes) {
    std::vector<double> c(n_modes, 0.0);
    double total = 0.0;
    for (const auto& p : paths)
        for (int md : p) {
            c.at(static_cast<std::size_t>(md)) += 1.0;
            total += 1.0;
        }
    json a = json::array();
    for (double v : c) a.push_back(round12(total > 0 ? v / total : 0.0));
    return a;
}

json stage_cluster(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const LabelSet ls = st.labels(stems);
    const ModeModel model =
        build_mode_model(st.graphs(), ls.catalog, ls.class_ids, class_stats(trajs, ls.class_ids), st.vehicle(), m.config);
    io::save_json(model.to_json(), st.root() / "mode_model.json");
    std::vector<std::vector<int>> raw;
    for (const auto& ids : ls.class_ids) {
        std::vector<int> r;
        for (int c : ids) r.push_back(model.assignment.at(static_cast<std::size_t>(c)));
        raw.push_back(std::move(r));
    }
    return {{"class_count", ls.catalog.size()},
            {"mode_count", model.n_modes},
            {"labels", model.labels},
            {"assignment", model.assignment},
            {"mode_frequencies", mode_frequencies(raw, model.n_modes)}};
}

json stage_viterbi(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const LabelSet ls = st.labels(stems);
    const ModeModel model = st.model();
    const Decoded d = decode_dataset(ls.class_ids, model, m.workers);
    reset_dir(st.root() / "decoded");
    std::size_t switches = 0, changed = 0, total = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        std::vector<double> t;
        for (const auto& s : trajs[i].samples()) t.push_back(s.t);
        save_decoded(st.root() / "decoded" / (stems[i] + ".csv"), t, ls.class_ids[i], d.raw[i], d.viterbi[i]);
        for (std::size_t k = 0; k < d.viterbi[i].size(); ++k) {
            if (k > 0 && d.viterbi[i][k] != d.viterbi[i][k - 1]) ++switches;
            if (d.viterbi[i][k] != d.raw[i][k]) ++changed;
            ++total;
        }
    }
    const auto acc = planted_frame_accuracy(trajs, d.viterbi, model);
    return {{"mode_frequencies", mode_frequencies(d.viterbi, model.n_modes)},
            {"labels", model.labels},
            {"switches", switches},
            {"smoothed_fraction", round12(total ? static_cast<double>(changed) / static_cast<double>(total) : 0.0)},
            {"planted_accuracy", acc ? json(round12(*acc)) : json(nullptr)}};
}

json stage_tau(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto trajs = st.trajectories();
    const LabelSet ls = st.labels(stems);
    const auto segs = st.segments();
    const auto turning = dataset_turning(m, st, trajs, ls);
    const TauReport rep = tau_dataset(trajs, segs, turning, m.config, m.workers);
    const json j = rep.to_json();
    io::save_json(j, st.root() / "coupling.json");
    std::ofstream csv(st.root() / "coupling_points.csv");
    if (!csv) throw Error("cannot write coupling_points.csv");
    io::CsvWriter w(csv, {"segment", "psi_gap", "theta_gap"});
    for (const auto& r : rep.segments)
        for (auto [a, b] : r.points) {
            w << r.segment << a << b;
            w.end_row();
        }
    return j["aggregate"];
}

json stage_gaze(const RunManifest& m, const Store& st) {
    const auto stems = st.stems();
    const auto all = st.trajectories();
    const auto gz = st.gaze(stems);
    std::vector<GazeTrace> traces;
    std::vector<Trajectory> trajs;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (gz[i]) {
            traces.push_back(*gz[i]);
            trajs.push_back(all[i]);
            names.push_back(stems[i]);
        }
    if (traces.empty()) throw ValidationError("no gaze trace matches a trajectory");
    const GazeReport rep = gaze_dataset(traces, trajs, st.workspace(), m.config, m.workers);
    json j = rep.to_json();
    for (std::size_t i = 0; i < names.size(); ++i) j["traces"][i]["file"] = names[i];
    io::save_json(j, st.root() / "gaze_report.json");
    reset_dir(st.root() / "gaze_labels");
    for (std::size_t i = 0; i < names.size(); ++i)
        save_gaze_labels(st.root() / "gaze_labels" / (names[i] + ".csv"), rep.traces[i].classification);
    std::size_t segments = 0;
    for (const auto& t : rep.traces) segments += t.classification.segments.size();
    return {{"n_traces", traces.size()},
            {"n_segments", segments},
            {"n_pairs", rep.pairs.size()},
            {"rho", j["rho"]},
            {"motion_accuracy", j["motion_accuracy"]},
            {"function_accuracy", j["function_accuracy"]}};
}

json run_stage(const std::string& s, const RunManifest& m, const Store& st) {
    if (s == "simulate") return stage_simulate(m, st);
    if (s == "label-constraints") return stage_label(m, st);
    if (s == "subgoals") return stage_subgoals(m, st);
    if (s == "segment") return stage_segment(m, st);
    if (s == "fit-mrf") return stage_fit_mrf(m, st);
    if (s == "cluster-modes") return stage_cluster(m, st);
    if (s == "viterbi") return stage_viterbi(m, st);
    if (s == "tau-fit") return stage_tau(m, st);
    if (s == "gaze") return stage_gaze(m, st);
    throw ValidationError("unknown stage '" + s + "'");
}

}  // namespace

void RunManifest::validate() const {
    if (output_dir.empty()) throw ValidationError("manifest: output_dir is required");
    if (stages.empty()) throw ValidationError("manifest: stage list is empty");
    if (workers == 0) throw ValidationError("manifest: workers must be >= 1");
    std::size_t last = 0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const std::size_t idx = stage_index(stages[k]);
        if (k > 0 && idx <= last)
            throw ValidationError("manifest: stage '" + stages[k] + "' is out of order or repeated");
        last = idx;
    }
    auto must_exist = [](const std::optional<fs::path>& p, const char* what) {
        if (p && !fs::exists(*p)) throw ValidationError(std::string("manifest: ") + what + " not found: " + p->string());
    };
    must_exist(scenario, "scenario");
    must_exist(workspace, "workspace");
    must_exist(trajectories, "trajectories");
    must_exist(gaze, "gaze");
    const bool sim = stages.front() == "simulate";
    if (sim && !scenario && !planted_course) throw ValidationError("manifest: simulate needs inputs.scenario");
    if (sim && (trajectories || workspace || gaze))
        throw ValidationError("manifest: external inputs cannot be combined with simulate");
    if (sim && scenario) {
        try {
            scenario_from_json(io::load_json(*scenario), scenario->parent_path()).validate();
        } catch (const ParseError& e) {
            throw ValidationError(std::string("manifest: ") + e.what());
        }
    }
    if (workspace) {
        try {
            io::load_workspace(*workspace);
        } catch (const ParseError& e) {
            throw ValidationError(std::string("manifest: ") + e.what());
        }
    }

    std::set<Artifact> have;
    for (auto a : {Artifact::trajectories, Artifact::workspace, Artifact::labels, Artifact::subgoals,
                   Artifact::segments, Artifact::graphs, Artifact::model, Artifact::gaze})
        if (artifact_on_disk(output_dir, a)) have.insert(a);
    if (trajectories) {
        if (csv_files(*trajectories).empty())
            throw ValidationError("manifest: no CSV files in " + trajectories->string());
        have.insert(Artifact::trajectories);
    }
    if (workspace) have.insert(Artifact::workspace);
    if (gaze) have.insert(Artifact::gaze);
    for (const auto& s : stages) {
        for (auto a : stage_needs(s, config))
            if (!have.count(a))
                throw ValidationError("manifest: stage '" + s + "' needs " + artifact_name(a) +
                                      ", which no earlier stage produces and " + output_dir.string() + " lacks");
        for (auto a : stage_makes(s)) have.insert(a);
    }
}

RunManifest manifest_from_json(const json& j, const fs::path& base_dir) {
    jsonutil::check_keys(j, {"output_dir", "seed", "stages", "workers", "inputs", "vehicle", "config"}, "manifest");
    RunManifest m;
    m.workers = default_workers();
    auto resolve = [&](const std::string& s) {
        fs::path p = s;
        return p.is_relative() ? base_dir / p : p;
    };
    try {
        m.output_dir = resolve(j.at("output_dir").get<std::string>());
        m.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("stages")) m.stages = j["stages"].get<std::vector<std::string>>();
        if (j.contains("workers")) m.workers = j["workers"].get<std::size_t>();
        if (j.contains("inputs")) {
            const auto& in = j["inputs"];
            jsonutil::check_keys(in, {"scenario", "workspace", "trajectories", "gaze"}, "manifest.inputs");
            if (in.contains("scenario")) {
                const auto s = in["scenario"].get<std::string>();
                if (s == "planted-course")
                    m.planted_course = true;
                else
                    m.scenario = resolve(s);
            }
            if (in.contains("workspace")) m.workspace = resolve(in["workspace"].get<std::string>());
            if (in.contains("trajectories")) m.trajectories = resolve(in["trajectories"].get<std::string>());
            if (in.contains("gaze")) m.gaze = resolve(in["gaze"].get<std::string>());
        }
        if (j.contains("vehicle")) m.vehicle = vehicle_from_json(j["vehicle"]);
        if (j.contains("config")) m.config = analysis_config_from_json(j["config"]);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const fs::path& path) {
    if (!fs::exists(path)) throw ValidationError("manifest not found: " + path.string());
    return manifest_from_json(io::load_json(path), path.parent_path());
}

json run_pipeline(const RunManifest& m) {
    m.validate();
    fs::create_directories(m.output_dir);
    fs::create_directories(m.output_dir / "stages");
    if (m.stages.front() != "simulate" && (m.trajectories || m.workspace || m.gaze)) {
        try {
            ingest(m);
        } catch (const Error& e) {
            throw ValidationError(std::string("ingest: ") + e.what());
        }
    }
    const Store st(m.output_dir, m.vehicle);
    json report;
    report["seed"] = m.seed;
    report["stages"] = m.stages;
    report["config"] = analysis_config_to_json(m.config);
    for (const auto& s : m.stages) {
        json block;
        try {
            block = run_stage(s, m, st);
        } catch (const std::exception& e) {
            throw StageError(s, e.what());
        }
        io::save_json(block, m.output_dir / "stages" / (s + ".json"));
        report[s] = block;
        io::save_json(report, m.output_dir / "report.json");
    }
    return report;
}

}  // namespace decomp
