#include "decomp/modes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "decomp/io.hpp"

namespace decomp {

double jaccard(const std::set<Edge>& a, const std::set<Edge>& b) {
    std::size_t inter = 0;
    for (const auto& e : a) inter += b.count(e);
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double class_similarity(const std::set<Edge>& e_i, const ConstraintState& c_i, const std::set<Edge>& e_j,
                        const ConstraintState& c_j, double w) {
    return jaccard(e_i, e_j) - w * l1_distance(c_i, c_j);
}

Eigen::MatrixXd similarity_matrix(const std::map<int, PrecisionGraph>& graphs, const std::vector<int>& ids,
                                  const ClassCatalog& catalog, double w) {
    const auto n = static_cast<Eigen::Index>(ids.size());
    std::vector<std::set<Edge>> edges;
    std::vector<ConstraintState> codes;
    for (int id : ids) {
        const auto it = graphs.find(id);
        if (it == graphs.end()) throw ValidationError("similarity_matrix: class " + std::to_string(id) + " has no graph");
        if (id < 0 || static_cast<std::size_t>(id) >= catalog.size())
            throw ValidationError("similarity_matrix: class id outside catalog");
        edges.push_back(it->second.edge_set());
        codes.push_back(catalog.classes[static_cast<std::size_t>(id)].code);
    }
    Eigen::MatrixXd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const auto a = static_cast<std::size_t>(i);
            const auto b = static_cast<std::size_t>(j);
            S(i, j) = S(j, i) = class_similarity(edges[a], codes[a], edges[b], codes[b], w);
        }
    return S;
}

std::vector<int> cluster_modes(const Eigen::MatrixXd& similarity, std::size_t n_modes) {
    const auto n = static_cast<std::size_t>(similarity.rows());
    if (similarity.cols() != similarity.rows()) throw ValidationError("cluster_modes: similarity must be square");
    if ((similarity - similarity.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("cluster_modes: similarity must be symmetric");
    if (n_modes == 0 || n_modes > n)
        throw ValidationError("cluster_modes: n_modes must be in [1, " + std::to_string(n) + "]");

    const Eigen::MatrixXd D = 1.0 - similarity.array();
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});

    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double s = 0.0;
        for (auto i : a)
            for (auto j : b) s += D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        return s / static_cast<double>(a.size() * b.size());
    };

    while (clusters.size() > n_modes) {
        std::size_t ba = 0;
        std::size_t bb = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < clusters.size(); ++a)
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double d = linkage(clusters[a], clusters[b]);
                if (d < best - 1e-12) {
                    best = d;
                    ba = a;
                    bb = b;
                }
            }
        auto& dst = clusters[ba];
        dst.insert(dst.end(), clusters[bb].begin(), clusters[bb].end());
        std::sort(dst.begin(), dst.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    // Clusters stay ordered by lowest member since merges keep the earlier slot.
    std::vector<int> out(n, -1);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto i : clusters[c]) out[i] = static_cast<int>(c);
    return out;
}

Hmm estimate_hmm(const std::vector<std::vector<int>>& class_sequences, std::span<const int> assignment,
                 std::size_t n_modes, double smoothing) {
    if (n_modes == 0) throw ValidationError("estimate_hmm: n_modes must be > 0");
    if (!(smoothing >= 0.0)) throw ValidationError("estimate_hmm: smoothing must be >= 0");
    const auto nm = static_cast<Eigen::Index>(n_modes);
    const auto nc = static_cast<Eigen::Index>(assignment.size());
    for (int m : assignment)
        if (m < 0 || m >= nm) throw ValidationError("estimate_hmm: assignment names an unknown mode");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nm, nm);
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(nm, nc);
    std::size_t total = 0;
    for (const auto& seq : class_sequences) {
        int prev = -1;
        for (int c : seq) {
            if (c < 0 || c >= nc) throw ValidationError("estimate_hmm: class id out of range");
            const int m = assignment[static_cast<std::size_t>(c)];
            Z(m, c) += 1.0;
            if (prev >= 0) T(prev, m) += 1.0;
            prev = m;
            ++total;
        }
    }
    if (total == 0) throw ValidationError("estimate_hmm: no samples");
    T.array() += smoothing;
    Z.array() += smoothing;
    for (Eigen::Index r = 0; r < nm; ++r) {
        const double st = T.row(r).sum();
        if (st > 0.0) {
            T.row(r) /= st;
        } else {
            T.row(r).setZero();
            T(r, r) = 1.0;
        }
        const double sz = Z.row(r).sum();
        if (sz > 0.0)
            Z.row(r) /= sz;
        else
            Z.row(r).setConstant(1.0 / static_cast<double>(nc));
    }
    return {T, Z};
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& T) {
    const auto n = T.rows();
    if (n == 0 || T.cols() != n) throw ValidationError("stationary_distribution: T must be square");
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    // Lazy chain (I + T) / 2 shares the stationary law and is aperiodic.
    for (int it = 0; it < 100000; ++it) {
        Eigen::RowVectorXd next = 0.5 * (pi + pi * T);
        next /= next.sum();
        const double change = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (change < 1e-15) break;
    }
    return pi.transpose();
}

namespace {

double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

void check_hmm(const Eigen::MatrixXd& T, const Eigen::MatrixXd& Z, const Eigen::VectorXd& prior) {
    const auto n = T.rows();
    if (T.cols() != n || Z.rows() != n || prior.size() != n || n == 0)
        throw ValidationError("viterbi: inconsistent T/Z/prior shapes");
    for (Eigen::Index r = 0; r < n; ++r) {
        if (std::abs(T.row(r).sum() - 1.0) > 1e-9 || (T.row(r).array() < 0.0).any())
            throw ValidationError("viterbi: T is not row-stochastic");
        if (std::abs(Z.row(r).sum() - 1.0) > 1e-9 || (Z.row(r).array() < 0.0).any())
            throw ValidationError("viterbi: Z is not row-stochastic");
    }
    if (std::abs(prior.sum() - 1.0) > 1e-9 || (prior.array() < 0.0).any())
        throw ValidationError("viterbi: prior is not a distribution");
}

// Strictly better by more than rounding; near-equal scores keep the lower id.
bool beats(double v, double best) { return v - best > 1e-12 * std::max(1.0, std::abs(best)); }

}  // namespace

std::vector<int> viterbi_decode(std::span<const int> obs, const Eigen::MatrixXd& T, const Eigen::MatrixXd& Z,
                                const Eigen::VectorXd& prior) {
    check_hmm(T, Z, prior);
    const auto n = T.rows();
    for (int o : obs) {
        if (o < 0 || o >= Z.cols()) throw ValidationError("viterbi: observation " + std::to_string(o) + " out of range");
        if (Z.col(o).maxCoeff() <= 0.0)
            throw ValidationError("viterbi: class " + std::to_string(o) + " has zero emission probability in every mode");
    }
    if (obs.empty()) return {};
    const Eigen::MatrixXd logT = T.unaryExpr(&safe_log);
    const std::size_t len = obs.size();
    std::vector<int> back(len * static_cast<std::size_t>(n), 0);
    Eigen::VectorXd delta(n);
    for (Eigen::Index j = 0; j < n; ++j) delta(j) = safe_log(prior(j)) + safe_log(Z(j, obs[0]));
    Eigen::VectorXd next(n);
    for (std::size_t t = 1; t < len; ++t) {
        for (Eigen::Index j = 0; j < n; ++j) {
            int arg = 0;
            double best = delta(0) + logT(0, j);
            for (Eigen::Index i = 1; i < n; ++i) {
                const double v = delta(i) + logT(i, j);
                if (beats(v, best)) {
                    best = v;
                    arg = static_cast<int>(i);
                }
            }
            next(j) = best + safe_log(Z(j, obs[t]));
            back[t * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = arg;
        }
        delta = next;
    }
    int state = 0;
    for (Eigen::Index j = 1; j < n; ++j)
        if (beats(delta(j), delta(state))) state = static_cast<int>(j);
    if (!std::isfinite(delta(state))) throw ValidationError("viterbi: observation sequence has zero probability");
    std::vector<int> path(len);
    for (std::size_t t = len; t-- > 0;) {
        path[t] = state;
        if (t > 0) state = back[t * static_cast<std::size_t>(n) + static_cast<std::size_t>(state)];
    }
    return path;
}

double path_log_prob(std::span<const int> path, std::span<const int> obs, const Eigen::MatrixXd& T,
                     const Eigen::MatrixXd& Z, const Eigen::VectorXd& prior) {
    if (path.size() != obs.size()) throw ValidationError("path_log_prob: length mismatch");
    if (path.empty()) return 0.0;
    double lp = safe_log(prior(path[0])) + safe_log(Z(path[0], obs[0]));
    for (std::size_t t = 1; t < path.size(); ++t) lp += safe_log(T(path[t - 1], path[t])) + safe_log(Z(path[t], obs[t]));
    return lp;
}

std::vector<std::string> semantic_label(std::span<const int> assignment, const ClassCatalog& catalog,
                                        const std::map<int, ClassStats>& stats, double omega_turn) {
    if (assignment.size() != catalog.size()) throw ValidationError("semantic_label: assignment size mismatch");
    int n_modes = 0;
    for (int m : assignment) n_modes = std::max(n_modes, m + 1);
    struct Acc {
        double total = 0, turn = 0, brake = 0, cruise = 0, rect = 0;
    };
    std::vector<Acc> acc(static_cast<std::size_t>(n_modes));
    for (const auto& cls : catalog.classes) {
        auto& a = acc[static_cast<std::size_t>(assignment[static_cast<std::size_t>(cls.id)])];
        const auto it = stats.find(cls.id);
        const bool have = it != stats.end();
        const double w = static_cast<double>(cls.count);
        const auto& c = cls.code;
        a.total += w;
        const bool turning = c.c_omega != 0 || c.c_ulat != 0 || (have && it->second.mean_abs_omega > omega_turn);
        if (turning) a.turn += w;
        if (!turning && c.c_ulon == -1 && (!have || it->second.mean_vdot < 0.0)) a.brake += w;
        if (!turning && c.c_v == 1) a.cruise += w;
        if (!turning && c.c_ulon != -1 && c.c_v != 1) a.rect += w;
    }
    std::vector<std::string> out;
    for (int m = 0; m < n_modes; ++m) {
        const auto& a = acc[static_cast<std::size_t>(m)];
        const double half = 0.5 * a.total;
        if (a.total > 0 && a.turn > half)
            out.emplace_back("turn");
        else if (a.total > 0 && a.brake > half)
            out.emplace_back("brake");
        else if (a.total > 0 && a.cruise > half)
            out.emplace_back("cruise");
        else if (a.total > 0 && a.rect > half)
            out.emplace_back("rectilinear");
        else
            out.push_back("mixed-" + std::to_string(m));
    }
    return out;
}

std::vector<int> complete_assignment(const ClassCatalog& catalog, const std::vector<int>& graphed_ids,
                                     const std::vector<int>& graphed_modes) {
    if (graphed_ids.size() != graphed_modes.size() || graphed_ids.empty())
        throw ValidationError("complete_assignment: need one mode per graphed class");
    std::vector<int> out(catalog.size(), -1);
    for (std::size_t k = 0; k < graphed_ids.size(); ++k) out[static_cast<std::size_t>(graphed_ids[k])] = graphed_modes[k];
    for (const auto& cls : catalog.classes) {
        if (out[static_cast<std::size_t>(cls.id)] >= 0) continue;
        int best_d = std::numeric_limits<int>::max();
        int best_id = std::numeric_limits<int>::max();
        int mode = 0;
        for (std::size_t k = 0; k < graphed_ids.size(); ++k) {
            const int id = graphed_ids[k];
            const int d = l1_distance(cls.code, catalog.classes[static_cast<std::size_t>(id)].code);
            if (d < best_d || (d == best_d && id < best_id)) {
                best_d = d;
                best_id = id;
                mode = graphed_modes[k];
            }
        }
        out[static_cast<std::size_t>(cls.id)] = mode;
    }
    return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(io::round12(m(r, c)));
        out.push_back(row);
    }
    return out;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) throw ValidationError("mode model: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json ModeModel::to_json() const {
    nlohmann::json j;
    j["n_modes"] = n_modes;
    j["w"] = io::round12(w);
    j["smoothing"] = io::round12(smoothing);
    j["assignment"] = assignment;
    j["labels"] = labels;
    j["graphed_classes"] = graphed;
    auto codes_j = nlohmann::json::array();
    for (const auto& c : codes) codes_j.push_back({c.c_ulat, c.c_ulon, c.c_omega, c.c_v});
    j["codes"] = codes_j;
    j["T"] = matrix_json(T);
    j["Z"] = matrix_json(Z);
    auto p = nlohmann::json::array();
    for (Eigen::Index i = 0; i < prior.size(); ++i) p.push_back(io::round12(prior(i)));
    j["prior"] = p;
    return j;
}

ModeModel ModeModel::from_json(const nlohmann::json& j) {
    ModeModel m;
    try {
        m.n_modes = j.at("n_modes").get<std::size_t>();
        m.w = j.at("w").get<double>();
        m.smoothing = j.value("smoothing", 1.0);
        m.assignment = j.at("assignment").get<std::vector<int>>();
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.graphed = j.value("graphed_classes", std::vector<int>{});
        for (const auto& c : j.at("codes")) {
            const auto v = c.get<std::vector<int>>();
            if (v.size() != 4) throw ValidationError("mode model: code must have 4 entries");
            m.codes.push_back({v[0], v[1], v[2], v[3]});
        }
        m.T = matrix_from(j.at("T"));
        m.Z = matrix_from(j.at("Z"));
        const auto p = j.at("prior").get<std::vector<double>>();
        m.prior = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("mode model: ") + e.what());
    }
    // Rounded entries may drift off stochastic by ~1e-12; renormalise.
    for (Eigen::Index r = 0; r < m.T.rows(); ++r) m.T.row(r) /= m.T.row(r).sum();
    for (Eigen::Index r = 0; r < m.Z.rows(); ++r) m.Z.row(r) /= m.Z.row(r).sum();
    if (m.prior.size() > 0) m.prior /= m.prior.sum();
    return m;
}

void save_decoded(const std::filesystem::path& path, std::span<const double> t, std::span<const int> class_id,
                  std::span<const int> mode_raw, std::span<const int> mode_viterbi) {
    if (class_id.size() != t.size() || mode_raw.size() != t.size() || mode_viterbi.size() != t.size())
        throw ValidationError("save_decoded: column lengths differ");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    io::CsvWriter w(out, {"t", "class_id", "mode_raw", "mode_viterbi"});
    for (std::size_t i = 0; i < t.size(); ++i) {
        w << t[i] << class_id[i] << mode_raw[i] << mode_viterbi[i];
        w.end_row();
    }
}

}  // namespace decomp
