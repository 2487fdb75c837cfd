#include "decomp/tau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"

namespace decomp {

const char* to_string(GapKind k) {
    switch (k) {
        case GapKind::psi: return "psi";
        case GapKind::theta: return "theta";
        case GapKind::d: return "d";
        case GapKind::v: return "v";
        case GapKind::k: return "k";
    }
    return "?";
}

GapKind gap_kind_from_string(const std::string& s) {
    if (s == "psi") return GapKind::psi;
    if (s == "theta") return GapKind::theta;
    if (s == "d") return GapKind::d;
    if (s == "v") return GapKind::v;
    if (s == "k") return GapKind::k;
    throw ValidationError("unknown gap '" + s + "'");
}

GapSeries make_gap_series(std::string name, std::span<const double> t, std::span<const double> g,
                          std::span<const bool> defined, double gdot_floor) {
    const std::size_t n = t.size();
    if (g.size() != n || defined.size() != n) throw ValidationError("gap series: length mismatch");
    GapSeries s;
    s.name = std::move(name);
    s.t.assign(t.begin(), t.end());
    s.g.assign(g.begin(), g.end());
    s.defined.assign(defined.begin(), defined.end());
    s.gdot.assign(n, std::numeric_limits<double>::quiet_NaN());
    s.tau.assign(n, std::numeric_limits<double>::quiet_NaN());
    s.valid.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.defined[i]) continue;
        const bool lo = i > 0 && s.defined[i - 1];
        const bool hi = i + 1 < n && s.defined[i + 1];
        const bool hi2 = hi && i + 2 < n && s.defined[i + 2];
        const bool lo2 = lo && i > 1 && s.defined[i - 2];
        if (lo && hi)
            s.gdot[i] = (g[i + 1] - g[i - 1]) / (t[i + 1] - t[i - 1]);
        else if (hi2)
            s.gdot[i] = (-3.0 * g[i] + 4.0 * g[i + 1] - g[i + 2]) / (t[i + 2] - t[i]);
        else if (lo2)
            s.gdot[i] = (3.0 * g[i] - 4.0 * g[i - 1] + g[i - 2]) / (t[i] - t[i - 2]);
        else if (hi)
            s.gdot[i] = (g[i + 1] - g[i]) / (t[i + 1] - t[i]);
        else if (lo)
            s.gdot[i] = (g[i] - g[i - 1]) / (t[i] - t[i - 1]);
        else {
            s.defined[i] = false;
            continue;
        }
        if (std::abs(s.gdot[i]) >= gdot_floor) {
            s.tau[i] = g[i] / s.gdot[i];
            s.valid[i] = true;
        }
    }
    return s;
}

GapSeries make_gap_series(std::string name, std::span<const double> t, std::span<const double> g, double gdot_floor) {
    std::unique_ptr<bool[]> buf(new bool[t.size()]);
    std::fill(buf.get(), buf.get() + t.size(), true);
    return make_gap_series(std::move(name), t, g, std::span<const bool>(buf.get(), t.size()), gdot_floor);
}

GapSeries gap_series(std::span<const TrajectorySample> samples, const GoalRef& goal, GapKind kind,
                     const GapOptions& opt) {
    if (samples.empty()) throw ValidationError("gap_series: empty segment");
    const std::size_t n = samples.size();
    std::vector<double> t(n), g(n);
    std::unique_ptr<bool[]> def(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i].state;
        t[i] = samples[i].t;
        def[i] = true;
        const GoalPolar gp = goal_polar(s, goal);
        switch (kind) {
            case GapKind::psi: g[i] = angle_diff(s.psi, goal.psi); break;
            case GapKind::theta:
                g[i] = gp.theta_G;
                if (gp.d_G < opt.d_min) def[i] = false;
                break;
            case GapKind::d: g[i] = gp.d_G; break;
            case GapKind::v: g[i] = s.v - opt.v_ref; break;
            case GapKind::k:
                if (std::abs(gp.theta_G) > opt.theta_min && gp.d_G >= opt.d_min) {
                    g[i] = angle_diff(s.psi, goal.psi) / gp.theta_G - opt.k_steer;
                } else {
                    g[i] = std::numeric_limits<double>::quiet_NaN();
                    def[i] = false;
                }
                break;
        }
    }
    return make_gap_series(to_string(kind), t, g, std::span<const bool>(def.get(), n), opt.gdot_floor);
}

namespace {

std::vector<std::size_t> window_indices(const GapSeries& a, const GapSeries& b, double window, FitQuantity q) {
    if (a.size() != b.size()) throw ValidationError("fit_coupling: series lengths differ");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a.t[i] - b.t[i]) > 1e-9) throw ValidationError("fit_coupling: series timestamps differ");
    if (!(window > 0.0 && window <= 1.0)) throw ValidationError("fit_coupling: window must be in (0, 1]");
    std::size_t peak_i = 0;
    double peak = -1.0;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b.defined[i] && std::abs(b.g[i]) > peak) {
            peak = std::abs(b.g[i]);
            peak_i = i;
        }
    std::vector<std::size_t> out;
    if (peak < 0.0) return out;
    for (std::size_t i = peak_i; i < b.size(); ++i) {
        if (std::abs(b.g[i]) > window * peak) continue;
        const bool ok = q == FitQuantity::tau ? (a.valid[i] && b.valid[i]) : (a.defined[i] && b.defined[i]);
        if (ok) out.push_back(i);
    }
    return out;
}

double value(const GapSeries& s, std::size_t i, FitQuantity q) { return q == FitQuantity::tau ? s.tau[i] : s.g[i]; }

}  // namespace

std::vector<std::pair<double, double>> coupling_points(const GapSeries& a, const GapSeries& b, double window,
                                                       FitQuantity quantity) {
    std::vector<std::pair<double, double>> out;
    for (auto i : window_indices(a, b, window, quantity)) out.emplace_back(value(a, i, quantity), value(b, i, quantity));
    return out;
}

CouplingFit fit_coupling(const GapSeries& a, const GapSeries& b, double window, FitQuantity quantity,
                         std::size_t min_samples) {
    const auto pts = coupling_points(a, b, window, quantity);
    if (pts.size() < min_samples)
        throw ValidationError("fit_coupling: " + std::to_string(pts.size()) + " usable samples, need " +
                              std::to_string(min_samples));
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (auto [y, x] : pts) {
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    if (sxx <= 0.0) throw ValidationError("fit_coupling: regressor is identically zero");
    CouplingFit f;
    f.a = a.name;
    f.b = b.name;
    f.quantity = quantity;
    f.window = window;
    f.n = pts.size();
    f.k_hat = sxy / sxx;
    double ss_res = 0.0;
    for (auto [y, x] : pts) ss_res += (y - f.k_hat * x) * (y - f.k_hat * x);
    f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return f;
}

std::optional<std::size_t> detect_turn_onset(const GapSeries& k_gap, double tolerance, std::optional<double> horizon) {
    const double h = horizon ? *horizon : (k_gap.size() >= 2 ? k_gap.t[1] - k_gap.t[0] : 0.0);
    bool above = false;
    for (std::size_t i = 0; i < k_gap.size(); ++i) {
        if (!k_gap.defined[i]) continue;
        const double band = std::max(tolerance, k_gap.gdot[i] < 0.0 ? -k_gap.gdot[i] * h : 0.0);
        if (k_gap.g[i] > band) {
            above = true;
            continue;
        }
        if (above && k_gap.gdot[i] < 0.0) return i;
    }
    return std::nullopt;
}

nlohmann::json coupling_to_json(const CouplingFit& f) {
    return {{"a", f.a},
            {"b", f.b},
            {"quantity", f.quantity == FitQuantity::tau ? "tau" : "gap"},
            {"k_hat", io::round12(f.k_hat)},
            {"r2", io::round12(f.r2)},
            {"window", io::round12(f.window)},
            {"n", f.n}};
}

}  // namespace decomp
