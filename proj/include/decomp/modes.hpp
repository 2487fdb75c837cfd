#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "decomp/constraints.hpp"
#include "decomp/graph.hpp"

namespace decomp {

/// |a ∩ b| / |a ∪ b|, 1 when both are empty.
double jaccard(const std::set<Edge>& a, const std::set<Edge>& b);

/// S = jaccard(E_i, E_j) - w * |c_i - c_j|_1.
double class_similarity(const std::set<Edge>& e_i, const ConstraintState& c_i, const std::set<Edge>& e_j,
                        const ConstraintState& c_j, double w);

/// Pairwise similarity over the graphed classes, in the order of `ids`.
Eigen::MatrixXd similarity_matrix(const std::map<int, PrecisionGraph>& graphs, const std::vector<int>& ids,
                                  const ClassCatalog& catalog, double w);

/// Average-linkage agglomerative clustering on 1 - S, stopped at n_modes
/// clusters. Ties merge the pair with the lowest member index first; clusters
/// are numbered by their lowest member index.
std::vector<int> cluster_modes(const Eigen::MatrixXd& similarity, std::size_t n_modes);

struct Hmm {
    Eigen::MatrixXd T;  // n_modes x n_modes
    Eigen::MatrixXd Z;  // n_modes x n_classes
};

/// Counts mode transitions and class emissions over the sequences, where the
/// hidden mode of each sample is assignment[class]. Adds `smoothing` to every
/// count and normalises rows; a row with no counts becomes a self-loop (T) or
/// uniform (Z).
Hmm estimate_hmm(const std::vector<std::vector<int>>& class_sequences, std::span<const int> assignment,
                 std::size_t n_modes, double smoothing = 1.0);

/// Left eigenvector of T for eigenvalue 1 by power iteration, normalised.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& T);

/// Most likely mode path, in log space. Among paths tied to rounding, the one
/// smallest when compared from the last frame backwards wins.
/// Throws ValidationError for an observation whose emission column is all
/// zero or out of range.
std::vector<int> viterbi_decode(std::span<const int> observations, const Eigen::MatrixXd& T, const Eigen::MatrixXd& Z,
                                const Eigen::VectorXd& prior);

double path_log_prob(std::span<const int> path, std::span<const int> observations, const Eigen::MatrixXd& T,
                     const Eigen::MatrixXd& Z, const Eigen::VectorXd& prior);

/// Per-class behaviour summary used by the labelling heuristic.
struct ClassStats {
    double mean_abs_omega = 0.0;
    double mean_vdot = 0.0;
};

/// Heuristic tags per mode from the count-weighted class codes: turn,
/// brake, cruise, rectilinear, else mixed-<mode>.
std::vector<std::string> semantic_label(std::span<const int> assignment, const ClassCatalog& catalog,
                                        const std::map<int, ClassStats>& stats, double omega_turn);

/// Assigns every catalog class to a mode: graphed classes by clustering,
/// the rest to the mode of the nearest graphed class by code L1 distance.
std::vector<int> complete_assignment(const ClassCatalog& catalog, const std::vector<int>& graphed_ids,
                                     const std::vector<int>& graphed_modes);

struct ModeModel {
    std::size_t n_modes = 5;
    double w = 0.125;
    double smoothing = 1.0;
    std::vector<int> assignment;  // class id -> mode id
    std::vector<std::string> labels;
    std::vector<int> graphed;  // classes that entered the clustering
    Eigen::MatrixXd T;
    Eigen::MatrixXd Z;
    Eigen::VectorXd prior;
    std::vector<ConstraintState> codes;  // class id -> code

    nlohmann::json to_json() const;
    static ModeModel from_json(const nlohmann::json& j);
};

/// Header `t,class_id,mode_raw,mode_viterbi`.
void save_decoded(const std::filesystem::path& path, std::span<const double> t, std::span<const int> class_id,
                  std::span<const int> mode_raw, std::span<const int> mode_viterbi);

}  // namespace decomp
