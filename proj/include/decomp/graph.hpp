#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "decomp/constraints.hpp"
#include "decomp/types.hpp"

namespace decomp {

/// Default signal set fed to the class graphs.
const std::vector<std::string>& default_signals();

/// Rows are samples, columns named signals.
struct SignalMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd data;
    bool standardized = false;
    /// Columns dropped during standardisation (constant within the rows).
    std::vector<std::string> excluded;

    std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(data.cols()); }
};

/// Per-sample signals for a trajectory slice relative to `goal`.
/// Known names: v, omega, u_lat, u_lon, theta_G, d_G, psi_err.
SignalMatrix compute_signals(std::span<const TrajectorySample> samples, const GoalRef& goal,
                             const std::vector<std::string>& names = default_signals());

/// z-scores every column; columns whose std is below `const_tol` (relative to
/// 1 + |mean|) are dropped and listed in `excluded`.
SignalMatrix standardize(const SignalMatrix& m, double const_tol = 1e-9);

/// Unbiased sample covariance. Needs at least two rows.
Eigen::MatrixXd empirical_covariance(const SignalMatrix& m);
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& data);

struct SiceOptions {
    double lambda = 0.1;
    double tol = 1e-8;
    int max_iter = 1000;
    /// Added to the covariance diagonal before fitting.
    double ridge = 0.0;
};

struct SiceStats {
    int iterations = 0;
    double residual = 0.0;  // last max-abs iterate change
    std::vector<double> objective;  // penalised log-likelihood after each sweep
};

class ConvergenceError : public Error {
public:
    ConvergenceError(int iterations, double residual);
    int iterations;
    double residual;
};

using Edge = std::pair<std::string, std::string>;  // names, first < second

struct PrecisionGraph {
    std::vector<std::string> nodes;
    Eigen::MatrixXd precision;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j
    double lambda = 0.0;
    double edge_tol = 0.0;
    std::size_t n_samples = 0;
    std::vector<std::string> excluded;
    SiceStats stats;

    std::set<Edge> edge_set() const;
};

/// log det(theta) - tr(S theta) - lambda * sum_{i != j} |theta_ij|.
double penalized_loglik(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& cov, double lambda);

/// Graphical lasso by primal block coordinate descent: each column update
/// solves a box-constrained QP, so every iterate stays positive definite and
/// the objective never decreases. Throws ConvergenceError after max_iter.
PrecisionGraph sice_fit(const Eigen::MatrixXd& cov, const SiceOptions& opt = {},
                        std::vector<std::string> names = {}, double edge_tol = 0.01);

/// Edges |theta_ij| > edge_tol.
std::vector<std::pair<std::size_t, std::size_t>> threshold_edges(const Eigen::MatrixXd& precision, double edge_tol);

struct ClassGraphOptions {
    SiceOptions sice;
    double edge_tol = 0.01;
    std::size_t n_min = 100;
};

struct ClassGraphs {
    std::map<int, PrecisionGraph> graphs;
    std::vector<int> skipped;  // below n_min
};

/// One graph per class with at least n_min rows. Channels saturated by the
/// class code (v, omega, u_lat, u_lon at +-1) and numerically constant
/// columns are dropped before fitting. Throws ValidationError when no class
/// qualifies.
ClassGraphs fit_class_graphs(const SignalMatrix& signals, std::span<const int> class_id, const ClassCatalog& catalog,
                             const ClassGraphOptions& opt = {});

nlohmann::json graph_to_json(const PrecisionGraph& g);
PrecisionGraph graph_from_json(const nlohmann::json& j);

}  // namespace decomp
