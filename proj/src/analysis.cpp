#include "decomp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"
#include "decomp/json_util.hpp"
#include "decomp/parallel.hpp"

namespace decomp {

using nlohmann::json;
using io::round12;

namespace {

// std::vector<bool> has no contiguous storage, but the span APIs need it.
struct BoolBuf {
    explicit BoolBuf(const std::vector<bool>& v) : n(v.size()), data(new bool[v.size()]) {
        for (std::size_t i = 0; i < n; ++i) data[i] = v[i];
    }
    std::span<const bool> span() const { return {data.get(), n}; }
    std::size_t n;
    std::unique_ptr<bool[]> data;
};

}  // namespace

LabelSet label_dataset(const std::vector<Trajectory>& trajs, const VehicleParams& p, const AnalysisConfig& cfg,
                       std::size_t workers) {
    if (trajs.empty()) throw ValidationError("no trajectories to label");
    LabelSet out;
    out.labels.resize(trajs.size());
    const auto tol = ConstraintTolerances::defaults(p, cfg.eps_fraction);
    parallel_for(trajs.size(), workers, [&](std::size_t i) { out.labels[i] = label_constraints(trajs[i], p, tol); });
    out.catalog = catalog_classes(out.labels);
    for (const auto& l : out.labels) out.class_ids.push_back(class_ids(l, out.catalog));
    return out;
}

std::vector<std::vector<bool>> turning_dataset(const std::vector<Trajectory>& trajs,
                                               const std::vector<std::vector<ConstraintState>>& labels,
                                               const VehicleParams& p, const AnalysisConfig& cfg) {
    if (labels.size() != trajs.size()) throw ValidationError("label sets do not match trajectories");
    const auto pred = TurnPredicate::defaults(p, cfg.omega_turn_fraction);
    std::vector<std::vector<bool>> out;
    for (std::size_t i = 0; i < trajs.size(); ++i) out.push_back(turning_flags(trajs[i], labels[i], pred));
    return out;
}

SubgoalClustering find_subgoals(const std::vector<Trajectory>& trajs, const std::vector<std::vector<bool>>& turning,
                                const AnalysisConfig& cfg) {
    if (turning.size() != trajs.size()) throw ValidationError("turning flags do not match trajectories");
    std::vector<Subgoal> all;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const BoolBuf flags(turning[i]);
        auto sg = extract_subgoals(trajs[i], flags.span(), i, cfg.subgoal);
        all.insert(all.end(), sg.begin(), sg.end());
    }
    return cluster_subgoals(std::move(all), cfg.cluster_eps, cfg.cluster_min_pts);
}

std::vector<SegmentRecord> segment_dataset(const std::vector<Trajectory>& trajs, const SubgoalClustering& sg,
                                           const Workspace& workspace) {
    const GoalRef corridor = goal_reference(workspace.goal);
    std::vector<SegmentRecord> out;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        std::vector<Subgoal> local;
        std::vector<std::size_t> global;
        for (std::size_t k = 0; k < sg.subgoals.size(); ++k)
            if (sg.subgoals[k].trajectory == i) {
                local.push_back(sg.subgoals[k]);
                global.push_back(k);
            }
        for (const auto& seg : cut_and_align(trajs[i], local, corridor, i)) {
            SegmentRecord r;
            r.trajectory = i;
            r.begin = seg.begin;
            r.end = seg.end;
            r.transform = seg.transform;
            if (seg.start_subgoal) r.start_subgoal = global[*seg.start_subgoal];
            if (seg.end_subgoal) {
                r.end_subgoal = global[*seg.end_subgoal];
                const auto& s = sg.subgoals[*r.end_subgoal];
                if (s.cluster_id) {
                    r.goal = sg.centers[static_cast<std::size_t>(*s.cluster_id)].ref();
                    r.goal_source = "cluster";
                } else {
                    r.goal = {s.x, s.y, s.psi};
                    r.goal_source = "subgoal";
                }
            } else {
                r.goal = corridor;
                r.goal_source = "corridor";
            }
            out.push_back(r);
        }
    }
    return out;
}

std::vector<std::vector<int>> segment_owner(const std::vector<Trajectory>& trajs,
                                            const std::vector<SegmentRecord>& segments) {
    std::vector<std::vector<int>> owner;
    for (const auto& t : trajs) owner.emplace_back(t.size(), -1);
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        if (s.trajectory >= trajs.size() || s.end >= trajs[s.trajectory].size())
            throw ValidationError("segment " + std::to_string(k) + " lies outside its trajectory");
        auto& o = owner[s.trajectory];
        for (std::size_t i = s.begin; i < s.end; ++i) o[i] = static_cast<int>(k);
        if (s.end + 1 == o.size()) o[s.end] = static_cast<int>(k);
    }
    return owner;
}

SignalMatrix dataset_signals(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                             const std::vector<std::string>& names) {
    const auto owner = segment_owner(trajs, segments);
    std::size_t rows = 0;
    for (const auto& t : trajs) rows += t.size();
    SignalMatrix m;
    m.names = names;
    m.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i)
        for (std::size_t k = 0; k < trajs[i].size(); ++k, ++r) {
            const int s = owner[i][k];
            if (s < 0)
                throw ValidationError("sample " + std::to_string(k) + " of trajectory " + std::to_string(i) +
                                      " belongs to no segment");
            const auto one = compute_signals(std::span(&trajs[i][k], 1), segments[static_cast<std::size_t>(s)].goal, names);
            m.data.row(r) = one.data.row(0);
        }
    return m;
}

std::map<int, ClassStats> class_stats(const std::vector<Trajectory>& trajs,
                                      const std::vector<std::vector<int>>& class_ids) {
    std::map<int, std::pair<ClassStats, std::size_t>> acc;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& t = trajs[i];
        const std::size_t n = t.size();
        for (std::size_t k = 0; k < n; ++k) {
            double vdot = 0.0;
            if (n >= 2) {
                const std::size_t a = k > 0 ? k - 1 : 0;
                const std::size_t b = k + 1 < n ? k + 1 : n - 1;
                vdot = (t[b].state.v - t[a].state.v) / (t[b].t - t[a].t);
            }
            auto& e = acc[class_ids[i][k]];
            e.first.mean_abs_omega += std::abs(t[k].state.omega);
            e.first.mean_vdot += vdot;
            ++e.second;
        }
    }
    std::map<int, ClassStats> out;
    for (auto& [id, e] : acc) {
        const double n = static_cast<double>(e.second);
        out[id] = {e.first.mean_abs_omega / n, e.first.mean_vdot / n};
    }
    return out;
}

ClassGraphs fit_dataset_graphs(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                               const LabelSet& labels, const AnalysisConfig& cfg) {
    const SignalMatrix sig = dataset_signals(trajs, segments, cfg.signals);
    std::vector<int> flat;
    for (const auto& c : labels.class_ids) flat.insert(flat.end(), c.begin(), c.end());
    return fit_class_graphs(sig, flat, labels.catalog, cfg.mrf);
}

ModeModel build_mode_model(const ClassGraphs& graphs, const ClassCatalog& catalog,
                           const std::vector<std::vector<int>>& class_ids, const std::map<int, ClassStats>& stats,
                           const VehicleParams& p, const AnalysisConfig& cfg) {
    std::vector<int> ids;
    for (const auto& [id, g] : graphs.graphs) ids.push_back(id);
    const Eigen::MatrixXd S = similarity_matrix(graphs.graphs, ids, catalog, cfg.w);
    const auto modes = cluster_modes(S, cfg.n_modes);
    ModeModel m;
    m.n_modes = cfg.n_modes;
    m.w = cfg.w;
    m.smoothing = cfg.smoothing;
    m.graphed = ids;
    m.assignment = complete_assignment(catalog, ids, modes);
    const Hmm hmm = estimate_hmm(class_ids, m.assignment, cfg.n_modes, cfg.smoothing);
    m.T = hmm.T;
    m.Z = hmm.Z;
    m.prior = stationary_distribution(m.T);
    m.labels = semantic_label(m.assignment, catalog, stats, cfg.omega_turn_fraction * p.omega_max);
    for (const auto& c : catalog.classes) m.codes.push_back(c.code);
    return m;
}

Decoded decode_dataset(const std::vector<std::vector<int>>& class_ids, const ModeModel& model, std::size_t workers) {
    Decoded d;
    d.raw.resize(class_ids.size());
    d.viterbi.resize(class_ids.size());
    parallel_for(class_ids.size(), workers, [&](std::size_t i) {
        for (int c : class_ids[i]) {
            if (c < 0 || static_cast<std::size_t>(c) >= model.assignment.size())
                throw ValidationError("class id " + std::to_string(c) + " missing from the mode model");
            d.raw[i].push_back(model.assignment[static_cast<std::size_t>(c)]);
        }
        d.viterbi[i] = viterbi_decode(class_ids[i], model.T, model.Z, model.prior);
    });
    return d;
}

int planted_of_label(const std::string& label) {
    if (label == "turn") return static_cast<int>(PlantedMode::turn);
    if (label == "brake") return static_cast<int>(PlantedMode::brake);
    if (label == "rectilinear" || label == "cruise") return static_cast<int>(PlantedMode::rectilinear);
    return -1;
}

std::optional<double> planted_frame_accuracy(const std::vector<Trajectory>& trajs,
                                             const std::vector<std::vector<int>>& decoded, const ModeModel& model) {
    std::size_t total = 0, hit = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        if (!trajs[i].modes()) continue;
        const auto& m = *trajs[i].modes();
        for (std::size_t k = 0; k < m.size() && k < decoded[i].size(); ++k) {
            ++total;
            const auto mode = static_cast<std::size_t>(decoded[i][k]);
            if (mode < model.labels.size() && planted_of_label(model.labels[mode]) == m[k]) ++hit;
        }
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(hit) / static_cast<double>(total);
}

TauReport tau_dataset(const std::vector<Trajectory>& trajs, const std::vector<SegmentRecord>& segments,
                      const std::vector<std::vector<bool>>& turning, const AnalysisConfig& cfg, std::size_t workers) {
    TauReport rep;
    rep.segments.resize(segments.size());
    parallel_for(segments.size(), workers, [&](std::size_t k) {
        const auto& seg = segments[k];
        const auto& traj = trajs.at(seg.trajectory);
        const auto& flags = turning.at(seg.trajectory);
        auto& r = rep.segments[k];
        r.segment = k;
        if (traj.modes())
            for (std::size_t i = seg.begin; i <= seg.end; ++i)
                if (i > seg.begin && (*traj.modes())[i] == static_cast<int>(PlantedMode::turn) &&
                    (*traj.modes())[i - 1] != static_cast<int>(PlantedMode::turn)) {
                    r.planted_onset = i;
                    break;
                }
        const std::span<const TrajectorySample> all(traj.samples().data() + seg.begin, seg.end - seg.begin + 1);
        if (const auto on = detect_turn_onset(gap_series(all, seg.goal, GapKind::k, cfg.gap), cfg.onset_tol))
            r.onset = seg.begin + *on;

        // Last turning run long enough to count.
        const auto min_run = static_cast<std::size_t>(std::llround(cfg.subgoal.debounce / traj.period()));
        std::optional<std::pair<std::size_t, std::size_t>> run;
        for (std::size_t i = seg.begin; i <= seg.end;) {
            if (!flags[i]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j <= seg.end && flags[j]) ++j;
            if (j - i >= std::max<std::size_t>(min_run, 1)) run = std::make_pair(i, j);
            i = j;
        }
        if (!run) {
            r.note = "no turning run";
            return;
        }
        r.turn_begin = run->first;
        const std::span<const TrajectorySample> turn(traj.samples().data() + run->first, seg.end - run->first + 1);
        const auto psi = gap_series(turn, seg.goal, GapKind::psi, cfg.gap);
        const auto theta = gap_series(turn, seg.goal, GapKind::theta, cfg.gap);
        const auto d = gap_series(turn, seg.goal, GapKind::d, cfg.gap);
        try {
            r.heading = fit_coupling(psi, theta, cfg.tau_window, FitQuantity::gap);
            r.points = coupling_points(psi, theta, cfg.tau_window, FitQuantity::gap);
        } catch (const ValidationError& e) {
            r.note = e.what();
        }
        try {
            r.tau_heading = fit_coupling(psi, theta, cfg.tau_window, FitQuantity::tau);
        } catch (const ValidationError&) {
        }
        try {
            r.tau_distance = fit_coupling(psi, d, cfg.tau_window, FitQuantity::tau);
        } catch (const ValidationError&) {
        }
    });
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    std::size_t n = 0;
    for (const auto& r : rep.segments) {
        for (auto [y, x] : r.points) {
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
            ++n;
        }
        if (r.planted_onset) {
            ++rep.onset_total;
            if (r.onset && (*r.onset > *r.planted_onset ? *r.onset - *r.planted_onset : *r.planted_onset - *r.onset) <=
                               cfg.onset_slack)
                ++rep.onset_hits;
        }
    }
    if (n > 0 && sxx > 0.0) {
        CouplingFit f;
        f.a = "psi";
        f.b = "theta";
        f.quantity = FitQuantity::gap;
        f.window = cfg.tau_window;
        f.n = n;
        f.k_hat = sxy / sxx;
        const double ss_res = syy - 2 * f.k_hat * sxy + f.k_hat * f.k_hat * sxx;
        f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
        rep.pooled = f;
    }
    return rep;
}

json TauReport::to_json() const {
    json segs = json::array();
    double lo = 0.0, hi = 0.0;
    std::size_t fitted = 0;
    for (const auto& r : segments) {
        json j;
        j["segment"] = r.segment;
        j["turn_begin"] = r.turn_begin ? json(*r.turn_begin) : json(nullptr);
        j["heading"] = r.heading ? coupling_to_json(*r.heading) : json(nullptr);
        j["tau_heading"] = r.tau_heading ? coupling_to_json(*r.tau_heading) : json(nullptr);
        j["tau_distance"] = r.tau_distance ? coupling_to_json(*r.tau_distance) : json(nullptr);
        j["onset"] = r.onset ? json(*r.onset) : json(nullptr);
        j["planted_onset"] = r.planted_onset ? json(*r.planted_onset) : json(nullptr);
        if (!r.note.empty()) j["note"] = r.note;
        segs.push_back(j);
        if (r.heading) {
            lo = fitted ? std::min(lo, r.heading->k_hat) : r.heading->k_hat;
            hi = fitted ? std::max(hi, r.heading->k_hat) : r.heading->k_hat;
            ++fitted;
        }
    }
    json agg;
    agg["pooled"] = pooled ? coupling_to_json(*pooled) : json(nullptr);
    agg["fitted_segments"] = fitted;
    agg["k_min"] = fitted ? json(round12(lo)) : json(nullptr);
    agg["k_max"] = fitted ? json(round12(hi)) : json(nullptr);
    agg["onset_total"] = onset_total;
    agg["onset_hits"] = onset_hits;
    return {{"segments", segs}, {"aggregate", agg}};
}

GazeTraceResult analyze_gaze(const GazeTrace& trace, const Trajectory& traj, const Workspace& ws,
                             const AnalysisConfig& cfg) {
    GazeTraceResult r;
    r.classification = classify_gaze(trace, cfg.gaze);
    auto& c = r.classification;
    label_gaze_function(c.segments, c.samples, ws, cfg.d_cue);
    try {
        r.anticipation = anticipation_correlation(c.segments, c.samples, traj);
    } catch (const ValidationError& e) {
        r.note = e.what();
    }
    if (trace.modes) {
        // cue -> fixation, anticipation -> pursuit, saccade -> saccade
        const auto& m = *trace.modes;
        std::size_t total = 0, hit = 0;
        for (std::size_t i = 0; i < m.size() && i < c.motion.size(); ++i) {
            if (!trace.samples[i].valid) continue;
            ++total;
            if (c.motion[i] == m[i]) ++hit;
        }
        if (total) r.motion_accuracy = static_cast<double>(hit) / static_cast<double>(total);
        std::size_t seg_total = 0, seg_hit = 0;
        for (const auto& seg : c.segments) {
            std::array<std::size_t, 3> cnt{};
            for (std::size_t i = seg.begin; i <= seg.end; ++i)
                if (m[i] >= 0 && m[i] < 3) ++cnt[static_cast<std::size_t>(m[i])];
            const auto maj = std::max_element(cnt.begin(), cnt.end()) - cnt.begin();
            const GazeFunction want = maj == 0 ? GazeFunction::cue
                                      : maj == 1 ? GazeFunction::anticipation
                                                 : GazeFunction::unlabeled;
            ++seg_total;
            if (seg.function == want) ++seg_hit;
        }
        if (seg_total) r.function_accuracy = static_cast<double>(seg_hit) / static_cast<double>(seg_total);
    }
    return r;
}

GazeReport gaze_dataset(const std::vector<GazeTrace>& traces, const std::vector<Trajectory>& trajs,
                        const Workspace& ws, const AnalysisConfig& cfg, std::size_t workers) {
    if (traces.size() != trajs.size()) throw ValidationError("each gaze trace needs a matching trajectory");
    GazeReport rep;
    rep.traces.resize(traces.size());
    parallel_for(traces.size(), workers,
                 [&](std::size_t i) { rep.traces[i] = analyze_gaze(traces[i], trajs[i], ws, cfg); });
    double m_hit = 0.0, m_tot = 0.0, f_hit = 0.0, f_tot = 0.0;
    for (std::size_t i = 0; i < rep.traces.size(); ++i) {
        const auto& r = rep.traces[i];
        if (r.anticipation) rep.pairs.insert(rep.pairs.end(), r.anticipation->pairs.begin(), r.anticipation->pairs.end());
        if (r.motion_accuracy) {
            const double n = static_cast<double>(traces[i].samples.size());
            m_hit += *r.motion_accuracy * n;
            m_tot += n;
        }
        if (r.function_accuracy) {
            const double n = static_cast<double>(r.classification.segments.size());
            f_hit += *r.function_accuracy * n;
            f_tot += n;
        }
    }
    if (rep.pairs.size() >= 3) {
        try {
            rep.rho = circular_pearson(rep.pairs);
        } catch (const ValidationError&) {
        }
    }
    if (m_tot > 0) rep.motion_accuracy = m_hit / m_tot;
    if (f_tot > 0) rep.function_accuracy = f_hit / f_tot;
    return rep;
}

json GazeReport::to_json() const {
    json tr = json::array();
    for (const auto& r : traces) {
        json j;
        j["segments"] = gaze_segments_to_json(r.classification.segments, r.classification.samples);
        j["rho"] = r.anticipation ? json(round12(r.anticipation->rho)) : json(nullptr);
        if (!r.note.empty()) j["note"] = r.note;
        if (r.motion_accuracy) j["motion_accuracy"] = round12(*r.motion_accuracy);
        if (r.function_accuracy) j["function_accuracy"] = round12(*r.function_accuracy);
        tr.push_back(j);
    }
    json pairs = json::array();
    for (auto [g, t] : this->pairs) pairs.push_back({round12(g), round12(t)});
    json out;
    out["traces"] = tr;
    out["pairs"] = pairs;
    out["rho"] = rho ? json(round12(*rho)) : json(nullptr);
    out["motion_accuracy"] = motion_accuracy ? json(round12(*motion_accuracy)) : json(nullptr);
    out["function_accuracy"] = function_accuracy ? json(round12(*function_accuracy)) : json(nullptr);
    return out;
}

json analysis_config_to_json(const AnalysisConfig& c) {
    return {
        {"label-constraints", {{"eps_fraction", round12(c.eps_fraction)}, {"turn_fraction", round12(c.omega_turn_fraction)}}},
        {"subgoals",
         {{"debounce", round12(c.subgoal.debounce)}, {"cluster_eps", round12(c.cluster_eps)}, {"min_pts", c.cluster_min_pts}}},
        {"fit-mrf",
         {{"lambda", round12(c.mrf.sice.lambda)},
          {"edge_tol", round12(c.mrf.edge_tol)},
          {"n_min", c.mrf.n_min},
          {"tol", round12(c.mrf.sice.tol)},
          {"max_iter", c.mrf.sice.max_iter},
          {"ridge", round12(c.mrf.sice.ridge)},
          {"signals", c.signals}}},
        {"cluster-modes", {{"n_modes", c.n_modes}, {"w", round12(c.w)}, {"smoothing", round12(c.smoothing)}}},
        {"tau-fit",
         {{"window", round12(c.tau_window)},
          {"gdot_floor", round12(c.gap.gdot_floor)},
          {"k_steer", round12(c.gap.k_steer)},
          {"v_ref", round12(c.gap.v_ref)},
          {"theta_min", round12(c.gap.theta_min)},
          {"d_min", round12(c.gap.d_min)},
          {"onset_tol", round12(c.onset_tol)},
          {"onset_slack", c.onset_slack},
          {"turn_source", c.turn_source}}},
        {"gaze",
         {{"v_fix", round12(c.gaze.v_fix)},
          {"v_sac", round12(c.gaze.v_sac)},
          {"stay", round12(c.gaze.stay)},
          {"hit", round12(c.gaze.hit)},
          {"max_bridge", c.gaze.max_bridge},
          {"d_cue", round12(c.d_cue)}}},
    };
}

AnalysisConfig analysis_config_from_json(const json& j, AnalysisConfig c) {
    using jsonutil::check_keys;
    using jsonutil::read;
    check_keys(j, {"simulate", "label-constraints", "subgoals", "segment", "fit-mrf", "cluster-modes", "viterbi", "tau-fit", "gaze"},
               "config");
    if (j.contains("label-constraints")) {
        const auto& b = j["label-constraints"];
        check_keys(b, {"eps_fraction", "turn_fraction"}, "config.label-constraints");
        read(b, "eps_fraction", c.eps_fraction);
        read(b, "turn_fraction", c.omega_turn_fraction);
    }
    if (j.contains("subgoals")) {
        const auto& b = j["subgoals"];
        check_keys(b, {"debounce", "cluster_eps", "min_pts"}, "config.subgoals");
        read(b, "debounce", c.subgoal.debounce);
        read(b, "cluster_eps", c.cluster_eps);
        read(b, "min_pts", c.cluster_min_pts);
    }
    if (j.contains("fit-mrf")) {
        const auto& b = j["fit-mrf"];
        check_keys(b, {"lambda", "edge_tol", "n_min", "tol", "max_iter", "ridge", "signals"}, "config.fit-mrf");
        read(b, "lambda", c.mrf.sice.lambda);
        read(b, "edge_tol", c.mrf.edge_tol);
        read(b, "n_min", c.mrf.n_min);
        read(b, "tol", c.mrf.sice.tol);
        read(b, "max_iter", c.mrf.sice.max_iter);
        read(b, "ridge", c.mrf.sice.ridge);
        read(b, "signals", c.signals);
    }
    if (j.contains("cluster-modes")) {
        const auto& b = j["cluster-modes"];
        check_keys(b, {"n_modes", "w", "smoothing"}, "config.cluster-modes");
        read(b, "n_modes", c.n_modes);
        read(b, "w", c.w);
        read(b, "smoothing", c.smoothing);
    }
    if (j.contains("tau-fit")) {
        const auto& b = j["tau-fit"];
        check_keys(b, {"window", "gdot_floor", "k_steer", "v_ref", "theta_min", "d_min", "onset_tol", "onset_slack", "turn_source"},
                   "config.tau-fit");
        read(b, "window", c.tau_window);
        read(b, "gdot_floor", c.gap.gdot_floor);
        read(b, "k_steer", c.gap.k_steer);
        read(b, "v_ref", c.gap.v_ref);
        read(b, "theta_min", c.gap.theta_min);
        read(b, "d_min", c.gap.d_min);
        read(b, "onset_tol", c.onset_tol);
        read(b, "onset_slack", c.onset_slack);
        read(b, "turn_source", c.turn_source);
    }
    if (j.contains("gaze")) {
        const auto& b = j["gaze"];
        check_keys(b, {"v_fix", "v_sac", "stay", "hit", "max_bridge", "d_cue"}, "config.gaze");
        read(b, "v_fix", c.gaze.v_fix);
        read(b, "v_sac", c.gaze.v_sac);
        read(b, "stay", c.gaze.stay);
        read(b, "hit", c.gaze.hit);
        read(b, "max_bridge", c.gaze.max_bridge);
        read(b, "d_cue", c.d_cue);
    }
    if (!(c.eps_fraction > 0.0 && c.eps_fraction < 0.5)) throw ValidationError("eps_fraction must be in (0, 0.5)");
    if (!(c.cluster_eps > 0.0) || c.cluster_min_pts == 0) throw ValidationError("subgoal clustering needs eps > 0, min_pts >= 1");
    if (!(c.mrf.sice.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    if (c.n_modes == 0) throw ValidationError("n_modes must be >= 1");
    if (!(c.tau_window > 0.0 && c.tau_window <= 1.0)) throw ValidationError("tau window must be in (0, 1]");
    if (c.turn_source != "predicate" && c.turn_source != "viterbi")
        throw ValidationError("turn_source must be 'predicate' or 'viterbi'");
    for (const auto& s : c.signals) {
        static const std::vector<std::string> known{"v", "omega", "u_lat", "u_lon", "theta_G", "d_G", "psi_err"};
        if (std::find(known.begin(), known.end(), s) == known.end()) throw ValidationError("unknown signal '" + s + "'");
    }
    return c;
}

}  // namespace decomp
