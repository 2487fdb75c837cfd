#include "decomp/graph.hpp"

#include <algorithm>
#include <cmath>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"

namespace decomp {

const std::vector<std::string>& default_signals() {
    static const std::vector<std::string> names{"v", "omega", "u_lat", "u_lon", "theta_G", "d_G", "psi_err"};
    return names;
}

namespace {

double signal_value(const std::string& name, const TrajectorySample& s, const GoalRef& goal) {
    if (name == "v") return s.state.v;
    if (name == "omega") return s.state.omega;
    if (name == "u_lat") return s.input.u_lat;
    if (name == "u_lon") return s.input.u_lon;
    if (name == "theta_G") return goal_polar(s.state, goal).theta_G;
    if (name == "d_G") return goal_polar(s.state, goal).d_G;
    if (name == "psi_err") return angle_diff(s.state.psi, goal.psi);
    throw ValidationError("unknown signal '" + name + "'");
}

}  // namespace

SignalMatrix compute_signals(std::span<const TrajectorySample> samples, const GoalRef& goal,
                             const std::vector<std::string>& names) {
    SignalMatrix m;
    m.names = names;
    m.data.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t k = 0; k < names.size(); ++k)
            m.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                signal_value(names[k], samples[i], goal);
    return m;
}

SignalMatrix standardize(const SignalMatrix& m, double const_tol) {
    if (m.rows() < 2) throw ValidationError("standardize: need at least two rows");
    if (!m.data.allFinite()) throw ValidationError("standardize: non-finite signal value");
    SignalMatrix out;
    out.standardized = true;
    out.excluded = m.excluded;
    std::vector<Eigen::Index> keep;
    std::vector<double> mean, sd;
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index k = 0; k < m.data.cols(); ++k) {
        const auto col = m.data.col(k);
        const double mu = col.mean();
        const double var = (col.array() - mu).square().sum() / (n - 1.0);
        const double s = std::sqrt(var);
        if (s <= const_tol * (1.0 + std::abs(mu))) {
            out.excluded.push_back(m.names[static_cast<std::size_t>(k)]);
            continue;
        }
        keep.push_back(k);
        mean.push_back(mu);
        sd.push_back(s);
        out.names.push_back(m.names[static_cast<std::size_t>(k)]);
    }
    out.data.resize(m.data.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        out.data.col(static_cast<Eigen::Index>(j)) = (m.data.col(keep[j]).array() - mean[j]) / sd[j];
    return out;
}

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& data) {
    if (data.rows() < 2) throw ValidationError("empirical_covariance: need at least two rows");
    const Eigen::RowVectorXd mu = data.colwise().mean();
    const Eigen::MatrixXd c = data.rowwise() - mu;
    Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(data.rows() - 1);
    return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd empirical_covariance(const SignalMatrix& m) { return empirical_covariance(m.data); }

ConvergenceError::ConvergenceError(int it, double res)
    : Error("graphical lasso did not converge after " + std::to_string(it) + " sweeps (residual " +
            io::format_number(res) + ")"),
      iterations(it),
      residual(res) {}

std::set<Edge> PrecisionGraph::edge_set() const {
    std::set<Edge> out;
    for (auto [i, j] : edges) {
        auto a = nodes[i];
        auto b = nodes[j];
        if (b < a) std::swap(a, b);
        out.emplace(a, b);
    }
    return out;
}

double penalized_loglik(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& cov, double lambda) {
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    const double off = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
    return logdet - (cov.cwiseProduct(theta)).sum() - lambda * off;
}

std::vector<std::pair<std::size_t, std::size_t>> threshold_edges(const Eigen::MatrixXd& precision, double edge_tol) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (Eigen::Index i = 0; i < precision.rows(); ++i)
        for (Eigen::Index j = i + 1; j < precision.cols(); ++j)
            if (std::abs(precision(i, j)) > edge_tol)
                out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return out;
}

namespace {

// min (s + g)' A (s + g) subject to |g_i| <= lambda, by cyclic coordinate descent.
// Returns u = s + g.
Eigen::VectorXd box_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& s, double lambda, Eigen::VectorXd& g) {
    Eigen::VectorXd u = s + g;
    if (lambda == 0.0) {
        g.setZero();
        return s;
    }
    Eigen::VectorXd r = A * u;
    const Eigen::Index n = s.size();
    for (int sweep = 0; sweep < 10000; ++sweep) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double gi = std::clamp(g(i) - r(i) / A(i, i), -lambda, lambda);
            const double d = gi - g(i);
            if (d != 0.0) {
                g(i) = gi;
                u(i) += d;
                r += d * A.col(i);
                change = std::max(change, std::abs(d));
            }
        }
        if (change <= 1e-13 * std::max(1.0, lambda)) break;
    }
    return u;
}

std::vector<Eigen::Index> others(Eigen::Index p, Eigen::Index j) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < p; ++k)
        if (k != j) idx.push_back(k);
    return idx;
}

}  // namespace

PrecisionGraph sice_fit(const Eigen::MatrixXd& cov_in, const SiceOptions& opt, std::vector<std::string> names,
                        double edge_tol) {
    const Eigen::Index p = cov_in.rows();
    if (p == 0 || cov_in.cols() != p) throw ValidationError("sice_fit: covariance must be square and nonempty");
    if (!cov_in.allFinite()) throw ValidationError("sice_fit: non-finite covariance");
    if ((cov_in - cov_in.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, cov_in.cwiseAbs().maxCoeff()))
        throw ValidationError("sice_fit: covariance is not symmetric");
    if (!(opt.lambda >= 0.0)) throw ValidationError("sice_fit: lambda must be >= 0");
    if (!(opt.tol > 0.0) || opt.max_iter <= 0) throw ValidationError("sice_fit: tol and max_iter must be positive");
    if (names.empty())
        for (Eigen::Index k = 0; k < p; ++k) names.push_back("x" + std::to_string(k));
    if (static_cast<Eigen::Index>(names.size()) != p) throw ValidationError("sice_fit: name count mismatch");

    Eigen::MatrixXd S = 0.5 * (cov_in + cov_in.transpose());
    S.diagonal().array() += opt.ridge;
    if ((S.diagonal().array() <= 0.0).any()) throw ValidationError("sice_fit: covariance diagonal must be > 0");

    Eigen::MatrixXd theta = S.diagonal().cwiseInverse().asDiagonal();
    // Dual variables per column, warm-started across sweeps.
    std::vector<Eigen::VectorXd> gamma(static_cast<std::size_t>(p), Eigen::VectorXd::Zero(std::max<Eigen::Index>(p - 1, 0)));

    PrecisionGraph g;
    g.nodes = std::move(names);
    g.lambda = opt.lambda;
    g.edge_tol = edge_tol;
    g.stats.objective.push_back(penalized_loglik(theta, S, opt.lambda));

    bool converged = p == 1;
    for (int it = 1; !converged; ++it) {
        if (it > opt.max_iter) throw ConvergenceError(opt.max_iter, g.stats.residual);
        const Eigen::MatrixXd before = theta;
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto idx = others(p, j);
            const Eigen::MatrixXd A = theta(idx, idx);
            const Eigen::VectorXd s12 = S(idx, j);
            const double s22 = S(j, j);
            const Eigen::VectorXd u = box_qp(A, s12, opt.lambda, gamma[static_cast<std::size_t>(j)]);
            const Eigen::VectorXd Au = A * u;
            const Eigen::VectorXd t12 = -Au / s22;
            const double t22 = 1.0 / s22 + u.dot(Au) / (s22 * s22);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                theta(idx[k], j) = t12(static_cast<Eigen::Index>(k));
                theta(j, idx[k]) = t12(static_cast<Eigen::Index>(k));
            }
            theta(j, j) = t22;
        }
        g.stats.iterations = it;
        g.stats.residual = (theta - before).cwiseAbs().maxCoeff();
        g.stats.objective.push_back(penalized_loglik(theta, S, opt.lambda));
        if (!theta.allFinite()) throw ConvergenceError(it, g.stats.residual);
        converged = g.stats.residual < opt.tol;
    }
    if (p == 1) theta(0, 0) = 1.0 / S(0, 0);

    g.precision = theta;
    g.edges = threshold_edges(theta, edge_tol);
    return g;
}

ClassGraphs fit_class_graphs(const SignalMatrix& signals, std::span<const int> class_id, const ClassCatalog& catalog,
                             const ClassGraphOptions& opt) {
    if (class_id.size() != signals.rows()) throw ValidationError("fit_class_graphs: class ids do not match rows");
    ClassGraphs out;
    static const char* const channel_signal[4] = {"u_lat", "u_lon", "omega", "v"};
    for (const auto& cls : catalog.classes) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < class_id.size(); ++i)
            if (class_id[i] == cls.id) rows.push_back(static_cast<Eigen::Index>(i));
        if (rows.size() < opt.n_min) {
            out.skipped.push_back(cls.id);
            continue;
        }
        SignalMatrix sub;
        std::vector<Eigen::Index> cols;
        for (std::size_t k = 0; k < signals.names.size(); ++k) {
            bool saturated = false;
            for (std::size_t c = 0; c < 4; ++c)
                if (signals.names[k] == channel_signal[c] && cls.code.at(c) != 0) saturated = true;
            if (saturated) {
                sub.excluded.push_back(signals.names[k]);
                continue;
            }
            cols.push_back(static_cast<Eigen::Index>(k));
            sub.names.push_back(signals.names[k]);
        }
        sub.data = signals.data(rows, cols);
        const SignalMatrix z = standardize(sub);
        if (z.cols() == 0) {
            out.skipped.push_back(cls.id);
            continue;
        }
        PrecisionGraph g = sice_fit(empirical_covariance(z), opt.sice, z.names, opt.edge_tol);
        g.n_samples = rows.size();
        g.excluded = z.excluded;
        out.graphs.emplace(cls.id, std::move(g));
    }
    if (out.graphs.empty()) throw ValidationError("fit_class_graphs: no class has enough samples for a graph");
    return out;
}

nlohmann::json graph_to_json(const PrecisionGraph& g) {
    using io::round12;
    nlohmann::json j;
    j["nodes"] = g.nodes;
    j["excluded"] = g.excluded;
    j["lambda"] = round12(g.lambda);
    j["edge_tol"] = round12(g.edge_tol);
    j["n_samples"] = g.n_samples;
    auto edges = nlohmann::json::array();
    for (auto [a, b] : g.edges)
        edges.push_back({{"a", g.nodes[a]}, {"b", g.nodes[b]},
                         {"weight", round12(g.precision(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))}});
    j["edges"] = edges;
    auto prec = nlohmann::json::array();
    for (Eigen::Index r = 0; r < g.precision.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < g.precision.cols(); ++c) row.push_back(round12(g.precision(r, c)));
        prec.push_back(row);
    }
    j["precision"] = prec;
    nlohmann::json stats;
    stats["iterations"] = g.stats.iterations;
    stats["residual"] = round12(g.stats.residual);
    auto obj = nlohmann::json::array();
    for (double v : g.stats.objective) obj.push_back(round12(v));
    stats["objective"] = obj;
    j["convergence"] = stats;
    return j;
}

PrecisionGraph graph_from_json(const nlohmann::json& j) {
    PrecisionGraph g;
    try {
        g.nodes = j.at("nodes").get<std::vector<std::string>>();
        g.excluded = j.value("excluded", std::vector<std::string>{});
        g.lambda = j.at("lambda").get<double>();
        g.edge_tol = j.at("edge_tol").get<double>();
        g.n_samples = j.value("n_samples", std::size_t{0});
        const auto n = static_cast<Eigen::Index>(g.nodes.size());
        g.precision = Eigen::MatrixXd::Zero(n, n);
        const auto& prec = j.at("precision");
        if (static_cast<Eigen::Index>(prec.size()) != n) throw ValidationError("graph json: precision size mismatch");
        for (Eigen::Index r = 0; r < n; ++r) {
            if (static_cast<Eigen::Index>(prec[r].size()) != n)
                throw ValidationError("graph json: precision size mismatch");
            for (Eigen::Index c = 0; c < n; ++c) g.precision(r, c) = prec[r][c].get<double>();
        }
        for (const auto& e : j.at("edges")) {
            const auto a = std::find(g.nodes.begin(), g.nodes.end(), e.at("a").get<std::string>());
            const auto b = std::find(g.nodes.begin(), g.nodes.end(), e.at("b").get<std::string>());
            if (a == g.nodes.end() || b == g.nodes.end()) throw ValidationError("graph json: edge names unknown node");
            auto ia = static_cast<std::size_t>(a - g.nodes.begin());
            auto ib = static_cast<std::size_t>(b - g.nodes.begin());
            if (ib < ia) std::swap(ia, ib);
            g.edges.emplace_back(ia, ib);
        }
        if (j.contains("convergence")) {
            const auto& s = j["convergence"];
            g.stats.iterations = s.value("iterations", 0);
            g.stats.residual = s.value("residual", 0.0);
            g.stats.objective = s.value("objective", std::vector<double>{});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("graph json: ") + e.what());
    }
    return g;
}

}  // namespace decomp
