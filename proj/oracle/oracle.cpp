#include "decomp_oracle/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace decomp::oracle {

PathResult exhaustive_viterbi(const std::vector<int>& obs, const Matrix& T, const Matrix& Z,
                              const std::vector<double>& prior) {
    const std::size_t n = T.size(), L = obs.size();
    if (L == 0 || L > kMaxSequence) throw ValidationError("oracle viterbi: sequence length must be 1..8");
    if (n == 0 || n > kMaxStates) throw ValidationError("oracle viterbi: at most 5 modes");
    if (Z.size() != n || prior.size() != n) throw ValidationError("oracle viterbi: shape mismatch");
    for (const auto& row : T)
        if (row.size() != n) throw ValidationError("oracle viterbi: T must be square");
    for (int o : obs)
        if (o < 0 || static_cast<std::size_t>(o) >= Z[0].size())
            throw ValidationError("oracle viterbi: observation out of range");

    PathResult best;
    best.probability = -1.0;
    std::vector<int> path(L, 0);
    std::size_t total = 1;
    for (std::size_t k = 0; k < L; ++k) total *= n;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t k = L; k-- > 0;) {
            path[k] = static_cast<int>(c % n);
            c /= n;
        }
        double p = prior[path[0]] * Z[path[0]][obs[0]];
        for (std::size_t k = 1; k < L; ++k) p *= T[path[k - 1]][path[k]] * Z[path[k]][obs[k]];
        const double tol = 1e-10 * std::max(p, best.probability);
        const bool tied = std::abs(p - best.probability) <= tol;
        if ((!tied && p > best.probability) ||
            (tied && std::lexicographical_compare(path.rbegin(), path.rend(), best.path.rbegin(), best.path.rend()))) {
            best.probability = p;
            best.path = path;
        }
    }
    return best;
}

std::vector<std::pair<double, EulerState>> euler_reference(EulerState s, double u_lat, double u_lon,
                                                           const VehicleParams& p, double dt, double duration,
                                                           double record_every) {
    if (!(dt > 0) || !(duration > 0)) throw ValidationError("oracle euler: dt and duration must be > 0");
    const auto steps = static_cast<long long>(std::llround(duration / dt));
    if (steps > 100000000LL) throw ValidationError("oracle euler: too many steps");
    const long long every = record_every > 0 ? std::max(1LL, std::llround(record_every / dt)) : steps;
    std::vector<std::pair<double, EulerState>> out;
    out.push_back({0.0, s});
    for (long long k = 1; k <= steps; ++k) {
        const double v = s.v < 0 ? 0 : s.v;
        double w = u_lat / (v > p.v_floor ? v : p.v_floor);
        if (w > p.omega_max) w = p.omega_max;
        if (w < -p.omega_max) w = -p.omega_max;
        EulerState n;
        n.x = s.x + dt * v * std::cos(s.psi);
        n.y = s.y + dt * v * std::sin(s.psi);
        n.psi = s.psi + dt * w;
        n.v = s.v + dt * (p.k_acc * u_lon - p.k_drag * v);
        if (n.v < 0) n.v = 0;
        s = n;
        if (k % every == 0 || k == steps) out.push_back({static_cast<double>(k) * dt, s});
    }
    return out;
}

Matrix hand_covariance(const Matrix& rows) {
    if (rows.size() < 2) throw ValidationError("oracle covariance: need at least 2 rows");
    const std::size_t d = rows[0].size();
    if (d == 0 || d > kMaxDim) throw ValidationError("oracle covariance: 1..5 columns");
    for (const auto& r : rows)
        if (r.size() != d) throw ValidationError("oracle covariance: ragged rows");
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    for (auto& m : mean) m /= static_cast<double>(rows.size());
    Matrix c(d, std::vector<double>(d, 0.0));
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double s = 0;
            for (const auto& r : rows) s += (r[a] - mean[a]) * (r[b] - mean[b]);
            c[a][b] = s / static_cast<double>(rows.size() - 1);
        }
    return c;
}

namespace {

int band(double x, double lo, double hi, double fraction) {
    const double eps = fraction * (hi - lo);
    const double upper = hi - eps, lower = lo + eps;
    if (!(x < upper)) return 1;
    if (!(x > lower)) return -1;
    return 0;
}

}  // namespace

std::array<int, 4> relabel(const TrajectorySample& s, const VehicleParams& p, double fraction) {
    const double vmax = p.k_acc * p.u_lon_max / p.k_drag;
    return {band(s.input.u_lat, -p.a_lat_max, p.a_lat_max, fraction), band(s.input.u_lon, 0, p.u_lon_max, fraction),
            band(s.state.omega, -p.omega_max, p.omega_max, fraction), band(s.state.v, 0, vmax, fraction)};
}

}  // namespace decomp::oracle
