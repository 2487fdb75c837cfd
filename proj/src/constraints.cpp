#include "decomp/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "decomp/io.hpp"

namespace decomp {

ConstraintState ConstraintState::from_index(int idx) {
    if (idx < 0 || idx >= 81) throw ValidationError("constraint code index out of range");
    return {idx / 27 - 1, (idx / 9) % 3 - 1, (idx / 3) % 3 - 1, idx % 3 - 1};
}

std::string ConstraintState::to_string() const {
    std::ostringstream os;
    os << '[' << c_ulat << ',' << c_ulon << ',' << c_omega << ',' << c_v << ']';
    return os.str();
}

int ConstraintState::at(std::size_t channel) const {
    switch (channel) {
        case 0: return c_ulat;
        case 1: return c_ulon;
        case 2: return c_omega;
        case 3: return c_v;
    }
    throw std::out_of_range("constraint channel");
}

int l1_distance(const ConstraintState& a, const ConstraintState& b) {
    return std::abs(a.c_ulat - b.c_ulat) + std::abs(a.c_ulon - b.c_ulon) + std::abs(a.c_omega - b.c_omega) +
           std::abs(a.c_v - b.c_v);
}

ConstraintTolerances ConstraintTolerances::defaults(const VehicleParams& p, double f) {
    return {f * 2.0 * p.a_lat_max, f * p.u_lon_max, f * 2.0 * p.omega_max, f * p.v_max()};
}

int constraint_level(double x, double lo, double hi, double eps) {
    if (x >= hi - eps) return 1;
    if (x <= lo + eps) return -1;
    return 0;
}

ConstraintState label_sample(const TrajectorySample& s, const VehicleParams& p, const ConstraintTolerances& e) {
    return {constraint_level(s.input.u_lat, -p.a_lat_max, p.a_lat_max, e.u_lat),
            constraint_level(s.input.u_lon, 0.0, p.u_lon_max, e.u_lon),
            constraint_level(s.state.omega, -p.omega_max, p.omega_max, e.omega),
            constraint_level(s.state.v, 0.0, p.v_max(), e.v)};
}

std::vector<ConstraintState> label_constraints(const Trajectory& traj, const VehicleParams& p,
                                               const ConstraintTolerances& e) {
    p.validate();
    const double eps[4] = {e.u_lat, e.u_lon, e.omega, e.v};
    const double range[4] = {2 * p.a_lat_max, p.u_lon_max, 2 * p.omega_max, p.v_max()};
    for (int k = 0; k < 4; ++k) {
        if (!(eps[k] > 0.0)) throw ValidationError("constraint tolerances must be > 0");
        if (2 * eps[k] >= range[k]) throw ValidationError("constraint tolerance covers half the channel range");
    }
    std::vector<ConstraintState> out;
    out.reserve(traj.size());
    for (const auto& s : traj.samples()) out.push_back(label_sample(s, p, e));
    return out;
}

std::optional<int> ClassCatalog::id_of(const ConstraintState& code) const {
    for (const auto& c : classes)
        if (c.code == code) return c.id;
    return std::nullopt;
}

namespace {

ClassCatalog build_catalog(const std::array<std::size_t, 81>& counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw ValidationError("catalog_classes: no labels");
    std::vector<int> codes;
    for (int i = 0; i < 81; ++i)
        if (counts[i] > 0) codes.push_back(i);
    std::stable_sort(codes.begin(), codes.end(), [&](int a, int b) { return counts[a] > counts[b]; });
    ClassCatalog cat;
    for (std::size_t k = 0; k < codes.size(); ++k) {
        const auto n = counts[codes[k]];
        cat.classes.push_back({static_cast<int>(k), ConstraintState::from_index(codes[k]), n,
                               static_cast<double>(n) / static_cast<double>(total)});
    }
    return cat;
}

}  // namespace

ClassCatalog catalog_classes(std::span<const ConstraintState> labels) {
    std::array<std::size_t, 81> counts{};
    for (const auto& c : labels) ++counts[c.code_index()];
    return build_catalog(counts);
}

ClassCatalog catalog_classes(const std::vector<std::vector<ConstraintState>>& labels) {
    std::array<std::size_t, 81> counts{};
    for (const auto& seq : labels)
        for (const auto& c : seq) ++counts[c.code_index()];
    return build_catalog(counts);
}

std::vector<int> class_ids(std::span<const ConstraintState> labels, const ClassCatalog& catalog) {
    std::array<int, 81> lut;
    lut.fill(-1);
    for (const auto& c : catalog.classes) lut[c.code.code_index()] = c.id;
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& c : labels) out.push_back(lut[c.code_index()]);
    return out;
}

bool TurnPredicate::operator()(const ConstraintState& c, double omega) const {
    return std::abs(c.c_omega) == 1 || std::abs(c.c_ulat) == 1 || std::abs(omega) > omega_turn;
}

std::vector<bool> turning_flags(const Trajectory& traj, std::span<const ConstraintState> labels,
                                const TurnPredicate& pred) {
    if (labels.size() != traj.size()) throw ValidationError("label count does not match trajectory length");
    std::vector<bool> out(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) out[i] = pred(labels[i], traj[i].state.omega);
    return out;
}

void write_constraint_labels(const Trajectory& traj, std::span<const ConstraintState> labels,
                             std::span<const int> class_id, std::ostream& out) {
    if (labels.size() != traj.size() || class_id.size() != traj.size())
        throw ValidationError("label/class count does not match trajectory length");
    io::CsvWriter w(out, {"t", "c_ulat", "c_ulon", "c_omega", "c_v", "class_id"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& c = labels[i];
        w << traj[i].t << c.c_ulat << c.c_ulon << c.c_omega << c.c_v << class_id[i];
        w.end_row();
    }
}

void save_constraint_labels(const Trajectory& traj, std::span<const ConstraintState> labels,
                            std::span<const int> class_id, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_constraint_labels(traj, labels, class_id, out);
}

std::vector<LabelRow> load_constraint_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,c_ulat,c_ulon,c_omega,c_v,class_id", 0) != 0)
        throw ParseError(path.string(), 0, "header", "expected 't,c_ulat,c_ulon,c_omega,c_v,class_id'");
    static const char* const names[] = {"t", "c_ulat", "c_ulon", "c_omega", "c_v", "class_id"};
    std::vector<LabelRow> rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = io::split_csv(line);
        if (cells.size() != 6) throw ParseError(path.string(), row, "", "expected 6 fields");
        LabelRow r;
        int vals[5];
        try {
            r.t = std::stod(std::string(cells[0]));
            for (int k = 0; k < 5; ++k) vals[k] = std::stoi(std::string(cells[k + 1]));
        } catch (const std::exception&) {
            throw ParseError(path.string(), row, "", "malformed value");
        }
        for (int k = 0; k < 4; ++k)
            if (vals[k] < -1 || vals[k] > 1) throw ParseError(path.string(), row, names[k + 1], "expected -1, 0 or 1");
        r.code = {vals[0], vals[1], vals[2], vals[3]};
        r.class_id = vals[4];
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------

std::vector<Subgoal> extract_subgoals(const Trajectory& traj, std::span<const bool> turning,
                                      std::size_t trajectory_index, const SubgoalOptions& opt) {
    if (turning.size() != traj.size()) throw ValidationError("turning flags do not match trajectory length");
    const std::size_t n = traj.size();
    const double dt = n >= 2 ? traj.period() : 1.0;
    const auto window = static_cast<std::size_t>(std::llround(opt.debounce / dt));

    std::vector<bool> flags(turning.begin(), turning.end());
    // Bridge short rectilinear gaps between turning samples.
    for (std::size_t i = 0; i < n;) {
        if (flags[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !flags[j]) ++j;
        if (i > 0 && j < n && j - i < window) std::fill(flags.begin() + i, flags.begin() + j, true);
        i = j;
    }

    std::vector<Subgoal> out;
    for (std::size_t i = 0; i < n;) {
        if (!flags[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && flags[j]) ++j;
        if (j - i >= window && j < n) {
            const auto& s = traj[j].state;
            out.push_back({s.x, s.y, s.psi, trajectory_index, j, std::nullopt});
        }
        i = j;
    }
    return out;
}

SubgoalClustering cluster_subgoals(std::vector<Subgoal> subgoals, double eps, std::size_t min_pts) {
    if (!(eps > 0.0)) throw ValidationError("cluster_subgoals: eps must be > 0");
    const std::size_t n = subgoals.size();
    auto neighbours = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j)
            if (std::hypot(subgoals[i].x - subgoals[j].x, subgoals[i].y - subgoals[j].y) <= eps) out.push_back(j);
        return out;
    };

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_id = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        auto seeds = neighbours(i);
        if (seeds.size() < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int id = next_id++;
        label[i] = id;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const std::size_t q = seeds[k];
            if (label[q] == kNoise) label[q] = id;  // border point
            if (label[q] != kUnvisited) continue;
            label[q] = id;
            auto more = neighbours(q);
            if (more.size() >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
        }
    }

    SubgoalClustering out;
    out.centers.resize(static_cast<std::size_t>(next_id));
    std::vector<double> sx(next_id, 0.0), sy(next_id, 0.0), sc(next_id, 0.0), ss(next_id, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] < 0) {
            subgoals[i].cluster_id.reset();
            continue;
        }
        const auto c = static_cast<std::size_t>(label[i]);
        subgoals[i].cluster_id = label[i];
        sx[c] += subgoals[i].x;
        sy[c] += subgoals[i].y;
        sc[c] += std::cos(subgoals[i].psi);
        ss[c] += std::sin(subgoals[i].psi);
        ++out.centers[c].members;
    }
    for (std::size_t c = 0; c < out.centers.size(); ++c) {
        auto& ctr = out.centers[c];
        const auto m = static_cast<double>(ctr.members);
        ctr.id = static_cast<int>(c);
        ctr.x = sx[c] / m;
        ctr.y = sy[c] / m;
        ctr.psi = std::atan2(ss[c], sc[c]);
    }
    out.subgoals = std::move(subgoals);
    return out;
}

// ---------------------------------------------------------------------------

Rigid2 goal_frame(Vec2 end, double direction) {
    Rigid2 tf;
    tf.angle = wrap_angle(kPi / 2 - direction);
    const double c = std::cos(tf.angle);
    const double s = std::sin(tf.angle);
    tf.offset = {-(c * end.x - s * end.y), -(s * end.x + c * end.y)};
    return tf;
}

std::vector<GuidanceSegment> cut_and_align(const Trajectory& traj, std::span<const Subgoal> subgoals,
                                           std::optional<GoalRef> final_goal, std::size_t trajectory_index) {
    std::vector<std::size_t> cuts{0};
    for (std::size_t k = 0; k < subgoals.size(); ++k) {
        const auto idx = subgoals[k].sample;
        if (idx >= traj.size()) throw ValidationError("subgoal sample outside trajectory");
        if (idx <= cuts.back() && !(k == 0 && idx == 0))
            throw ValidationError("subgoals must be ordered along the trajectory");
        if (idx > 0) cuts.push_back(idx);
    }
    if (cuts.back() != traj.size() - 1) cuts.push_back(traj.size() - 1);
    const bool first_is_subgoal = !subgoals.empty() && subgoals.front().sample == 0;

    std::vector<GuidanceSegment> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        GuidanceSegment seg;
        seg.trajectory = trajectory_index;
        seg.begin = cuts[k];
        seg.end = cuts[k + 1];
        // cuts[0] is the start unless the first subgoal sits on sample 0.
        const std::size_t sg_offset = first_is_subgoal ? 0 : 1;
        if (k >= sg_offset && k - sg_offset < subgoals.size()) seg.start_subgoal = k - sg_offset;
        if (k + 1 - sg_offset < subgoals.size() && k + 1 >= sg_offset) seg.end_subgoal = k + 1 - sg_offset;
        seg.samples.assign(traj.samples().begin() + static_cast<std::ptrdiff_t>(seg.begin),
                           traj.samples().begin() + static_cast<std::ptrdiff_t>(seg.end) + 1);

        const auto& last = seg.samples.back().state;
        double direction = last.psi;
        if (seg.samples.size() >= 2) {
            const auto& prev = seg.samples[seg.samples.size() - 2].state;
            const double dx = last.x - prev.x;
            const double dy = last.y - prev.y;
            if (std::hypot(dx, dy) > 1e-12) direction = std::atan2(dy, dx);
        }
        seg.transform = goal_frame(last.position(), direction);
        seg.aligned = seg.samples;
        for (auto& s : seg.aligned) {
            const Vec2 p = seg.transform.apply(s.state.position());
            s.state.x = p.x;
            s.state.y = p.y;
            s.state.psi = seg.transform.apply_heading(s.state.psi);
        }
        if (seg.end_subgoal) {
            const auto& sg = subgoals[*seg.end_subgoal];
            seg.goal = {sg.x, sg.y, sg.psi};
        } else if (final_goal) {
            seg.goal = *final_goal;
        } else {
            seg.goal = {last.x, last.y, last.psi};
        }
        out.push_back(std::move(seg));
    }
    return out;
}

}  // namespace decomp
