#include "decomp/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"
#include "decomp/modes.hpp"

namespace decomp {

const char* to_string(GazeMotion m) {
    switch (m) {
        case GazeMotion::fixation: return "fixation";
        case GazeMotion::pursuit: return "pursuit";
        case GazeMotion::saccade: return "saccade";
    }
    return "?";
}

const char* to_string(GazeFunction f) {
    switch (f) {
        case GazeFunction::unlabeled: return "unlabeled";
        case GazeFunction::cue: return "cue";
        case GazeFunction::anticipation: return "anticipation";
    }
    return "?";
}

namespace {

void bridge_gaps(std::vector<GazeSample>& s, std::size_t max_bridge) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n;) {
        if (s[i].valid) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !s[j].valid) ++j;
        if (i > 0 && j < n && j - i <= max_bridge) {
            const auto& a = s[i - 1];
            const auto& b = s[j];
            for (std::size_t k = i; k < j; ++k) {
                const double f = (s[k].t - a.t) / (b.t - a.t);
                s[k].gx = a.gx + f * (b.gx - a.gx);
                s[k].gy = a.gy + f * (b.gy - a.gy);
                s[k].valid = true;
            }
        }
        i = j;
    }
}

}  // namespace

GazeClassification classify_gaze(const GazeTrace& trace, const GazeClassifierOptions& opt) {
    const auto& in = trace.samples;
    if (in.size() < 5) throw ValidationError("classify_gaze: need at least 5 samples");
    for (std::size_t i = 1; i < in.size(); ++i)
        if (!(in[i].t > in[i - 1].t)) throw ValidationError("classify_gaze: time must increase at sample " + std::to_string(i));
    if (!(opt.v_fix > 0.0 && opt.v_sac > opt.v_fix)) throw ValidationError("classify_gaze: need 0 < v_fix < v_sac");
    if (!(opt.stay > 0.0 && opt.stay < 1.0 && opt.hit > 0.0 && opt.hit < 1.0))
        throw ValidationError("classify_gaze: stay and hit must lie in (0, 1)");
    for (const auto& s : in)
        if (s.valid && !(std::isfinite(s.gx) && std::isfinite(s.gy)))
            throw ValidationError("classify_gaze: non-finite gaze point");

    GazeClassification out;
    out.samples = in;
    bridge_gaps(out.samples, opt.max_bridge);
    const auto& s = out.samples;
    const std::size_t n = s.size();
    out.speed.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.raw.assign(n, -1);
    out.motion.assign(n, -1);

    Eigen::MatrixXd T = Eigen::MatrixXd::Constant(3, 3, (1.0 - opt.stay) / 2.0);
    T.diagonal().setConstant(opt.stay);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Constant(3, 3, (1.0 - opt.hit) / 2.0);
    Z.diagonal().setConstant(opt.hit);
    const Eigen::VectorXd prior = Eigen::VectorXd::Constant(3, 1.0 / 3.0);

    for (std::size_t i = 0; i < n;) {
        if (!s[i].valid) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && s[j].valid) ++j;
        // Chunk [i, j): backward differences, forward at the first sample.
        for (std::size_t k = i; k < j; ++k) {
            double v = 0.0;
            if (k > i)
                v = std::hypot(s[k].gx - s[k - 1].gx, s[k].gy - s[k - 1].gy) / (s[k].t - s[k - 1].t);
            else if (k + 1 < j)
                v = std::hypot(s[k + 1].gx - s[k].gx, s[k + 1].gy - s[k].gy) / (s[k + 1].t - s[k].t);
            out.speed[k] = v;
            out.raw[k] = v < opt.v_fix ? 0 : (v < opt.v_sac ? 1 : 2);
        }
        const std::span<const int> obs(out.raw.data() + i, j - i);
        const auto path = viterbi_decode(obs, T, Z, prior);
        std::copy(path.begin(), path.end(), out.motion.begin() + static_cast<std::ptrdiff_t>(i));
        for (std::size_t a = i; a < j;) {
            std::size_t b = a;
            while (b + 1 < j && out.motion[b + 1] == out.motion[a]) ++b;
            GazeSegment seg;
            seg.begin = a;
            seg.end = b;
            seg.motion = static_cast<GazeMotion>(out.motion[a]);
            out.segments.push_back(seg);
            a = b + 1;
        }
        i = j;
    }
    return out;
}

void label_gaze_function(std::vector<GazeSegment>& segments, std::span<const GazeSample> samples,
                         const Workspace& workspace, double d_cue) {
    for (auto& seg : segments) {
        if (seg.end >= samples.size()) throw ValidationError("label_gaze_function: segment outside the trace");
        if (seg.motion == GazeMotion::saccade) {
            seg.function = GazeFunction::unlabeled;
            continue;
        }
        std::vector<double> d;
        for (std::size_t i = seg.begin; i <= seg.end; ++i) {
            const auto hit = nearest_obstacle_point({samples[i].gx, samples[i].gy}, workspace);
            d.push_back(hit ? hit->distance : std::numeric_limits<double>::infinity());
        }
        std::sort(d.begin(), d.end());
        const std::size_t m = d.size();
        seg.median_distance = m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
        seg.function = seg.median_distance < d_cue ? GazeFunction::cue : GazeFunction::anticipation;
    }
}

std::optional<Vec2> principal_direction(std::span<const Vec2> pts) {
    if (pts.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    const double n = static_cast<double>(pts.size());
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        syy += (p.y - my) * (p.y - my);
    }
    Eigen::Matrix2d C;
    C << sxx, sxy, sxy, syy;
    C /= n - 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
    const double l0 = es.eigenvalues()(0);
    const double l1 = es.eigenvalues()(1);
    if (!(l1 > 1e-14) || l1 - l0 <= 1e-9 * l1) return std::nullopt;
    Vec2 dir{es.eigenvectors()(0, 1), es.eigenvectors()(1, 1)};
    const double norm = std::hypot(dir.x, dir.y);
    dir = (1.0 / norm) * dir;
    if (dot(dir, pts.back() - pts.front()) < 0.0) dir = -1.0 * dir;
    return dir;
}

double circular_pearson(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) throw ValidationError("circular_pearson: need at least two pairs");
    double c = 0.0, s = 0.0;
    for (auto [a, b] : pairs) {
        c += std::cos(a) + std::cos(b);
        s += std::sin(a) + std::sin(b);
    }
    const double mean = std::atan2(s, c);
    std::vector<double> x, y;
    for (auto [a, b] : pairs) {
        x.push_back(mean + angle_diff(a, mean));
        y.push_back(mean + angle_diff(b, mean));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw ValidationError("circular_pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

AnticipationResult anticipation_correlation(std::vector<GazeSegment>& segments, std::span<const GazeSample> samples,
                                            const Trajectory& traj, std::size_t min_points,
                                            std::size_t min_segments) {
    AnticipationResult r;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        auto& seg = segments[k];
        if (seg.function != GazeFunction::anticipation || seg.size() < min_points) continue;
        if (seg.end >= samples.size()) throw ValidationError("anticipation_correlation: segment outside the trace");
        std::vector<Vec2> pts;
        for (std::size_t i = seg.begin; i <= seg.end; ++i) pts.push_back({samples[i].gx, samples[i].gy});
        const auto dir = principal_direction(pts);
        if (!dir) {
            r.skipped.push_back(k);
            continue;
        }
        const double t_mid = 0.5 * (samples[seg.begin].t + samples[seg.end].t);
        std::size_t mid = seg.begin;
        for (std::size_t i = seg.begin; i <= seg.end; ++i)
            if (std::abs(samples[i].t - t_mid) < std::abs(samples[mid].t - t_mid)) mid = i;
        const Vec2 g{samples[mid].gx, samples[mid].gy};
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double d = std::hypot(traj[i].state.x - g.x, traj[i].state.y - g.y);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        seg.principal_dir = dir;
        seg.psi_g = std::atan2(dir->y, dir->x);
        seg.psi_t = traj[best].state.psi;
        r.pairs.emplace_back(*seg.psi_g, *seg.psi_t);
        r.used.push_back(k);
    }
    if (r.pairs.size() < min_segments)
        throw ValidationError("anticipation_correlation: " + std::to_string(r.pairs.size()) +
                              " usable anticipation segments, need " + std::to_string(min_segments));
    r.rho = circular_pearson(r.pairs);
    return r;
}

std::optional<Vec2> ground_intersection(double cx, double cy, double cz, double dx, double dy, double dz) {
    if (!(cz > 0.0) || !(dz < 0.0)) return std::nullopt;
    const double s = -cz / dz;
    return Vec2{cx + s * dx, cy + s * dy};
}

nlohmann::json gaze_segments_to_json(const std::vector<GazeSegment>& segments, std::span<const GazeSample> samples) {
    using io::round12;
    auto arr = nlohmann::json::array();
    for (const auto& seg : segments) {
        nlohmann::json j;
        j["begin"] = seg.begin;
        j["end"] = seg.end;
        j["t0"] = round12(samples[seg.begin].t);
        j["t1"] = round12(samples[seg.end].t);
        j["motion"] = to_string(seg.motion);
        j["function"] = to_string(seg.function);
        j["median_distance"] = std::isfinite(seg.median_distance) ? nlohmann::json(round12(seg.median_distance))
                                                                   : nlohmann::json(nullptr);
        if (seg.principal_dir) j["principal_dir"] = {round12(seg.principal_dir->x), round12(seg.principal_dir->y)};
        if (seg.psi_g) j["psi_g"] = round12(*seg.psi_g);
        if (seg.psi_t) j["psi_t"] = round12(*seg.psi_t);
        arr.push_back(j);
    }
    return arr;
}

void save_gaze_labels(const std::filesystem::path& path, const GazeClassification& c) {
    std::vector<const GazeSegment*> owner(c.samples.size(), nullptr);
    for (const auto& seg : c.segments)
        for (std::size_t i = seg.begin; i <= seg.end; ++i) owner[i] = &seg;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    io::CsvWriter w(out, {"t", "gx", "gy", "valid", "motion", "function"});
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const auto& s = c.samples[i];
        w << s.t;
        if (s.valid)
            w << s.gx << s.gy;
        else
            w << std::string_view{} << std::string_view{};
        w << (s.valid ? 1 : 0);
        w << std::string_view(owner[i] ? to_string(owner[i]->motion) : "");
        w << std::string_view(owner[i] ? to_string(owner[i]->function) : "");
        w.end_row();
    }
}

}  // namespace decomp
