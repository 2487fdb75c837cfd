#include <doctest.h>

#include <random>

#include "decomp/modes.hpp"
#include "decomp_oracle/oracle.hpp"
#include "support.hpp"

using namespace decomp;

namespace {

Eigen::MatrixXd random_stochastic(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    Eigen::MatrixXd M(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) M(i, j) = u(rng);
        M.row(i) /= M.row(i).sum();
    }
    return M;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& M) {
    oracle::Matrix r(M.rows(), std::vector<double>(M.cols()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) r[i][j] = M(i, j);
    return r;
}

}  // namespace

TEST_CASE("similarity: self, half-overlap and code penalty") {
    const std::set<Edge> a{{"omega", "v"}};
    const std::set<Edge> b{{"omega", "v"}, {"u_lon", "v"}};
    const ConstraintState c{0, 1, 0, 0};
    CHECK(class_similarity(b, c, b, c, 0.125) == 1.0);
    CHECK(class_similarity(a, c, b, c, 0.0) == 0.5);
    CHECK(class_similarity(b, c, b, ConstraintState{1, 1, 1, 0}, 0.25) == 0.5);
    CHECK(jaccard({}, {}) == 1.0);
}

TEST_CASE("clustering: two identical blocks and the singleton cut") {
    Eigen::MatrixXd S(4, 4);
    S << 1, 0.1, 1, 0.1, 0.1, 1, 0.1, 1, 1, 0.1, 1, 0.1, 0.1, 1, 0.1, 1;
    CHECK(cluster_modes(S, 2) == std::vector<int>{0, 1, 0, 1});
    CHECK(cluster_modes(S, 4) == std::vector<int>{0, 1, 2, 3});
    CHECK_THROWS_AS(cluster_modes(S, 5), ValidationError);
}

TEST_CASE("hmm: self-loop only sequence without smoothing") {
    const auto h = estimate_hmm({{0, 0, 0, 0}}, std::vector<int>{0, 1}, 2, 0.0);
    CHECK(h.T(0, 0) == 1.0);
    CHECK(h.T(0, 1) == 0.0);
    CHECK(h.T(1, 1) == 1.0);  // unseen mode
    CHECK(h.Z(1, 0) == 0.5);
}

TEST_CASE("hmm: hand-counted six-sample sequence") {
    // classes 0 0 1 1 1 0 with class c in mode c
    const std::vector<std::vector<int>> seq{{0, 0, 1, 1, 1, 0}};
    const std::vector<int> assign{0, 1};
    const auto h0 = estimate_hmm(seq, assign, 2, 0.0);
    CHECK(h0.T(0, 0) == doctest::Approx(0.5));
    CHECK(h0.T(0, 1) == doctest::Approx(0.5));
    CHECK(h0.T(1, 0) == doctest::Approx(1.0 / 3));
    CHECK(h0.T(1, 1) == doctest::Approx(2.0 / 3));
    CHECK(h0.Z(0, 0) == 1.0);
    CHECK(h0.Z(1, 1) == 1.0);
    const auto h1 = estimate_hmm(seq, assign, 2, 1.0);
    CHECK(h1.T(1, 0) == doctest::Approx(0.4));
    CHECK(h1.T(1, 1) == doctest::Approx(0.6));
    CHECK(h1.Z(0, 0) == doctest::Approx(0.8));
    CHECK(h1.Z(0, 1) == doctest::Approx(0.2));
    CHECK((h1.T.array() > 0).all());
    CHECK((h1.Z.array() > 0).all());
}

TEST_CASE("stationary distribution is a fixed point") {
    std::mt19937_64 rng(2);
    const auto T = random_stochastic(5, 5, rng);
    const Eigen::VectorXd pi = stationary_distribution(T);
    CHECK(pi.sum() == doctest::Approx(1.0));
    CHECK(((pi.transpose() * T).transpose() - pi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("viterbi: uniform transitions give per-frame argmax") {
    Eigen::MatrixXd T = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
    Eigen::MatrixXd Z(3, 3);
    Z << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8;
    const Eigen::VectorXd prior = Eigen::VectorXd::Constant(3, 1.0 / 3);
    const std::vector<int> obs{2, 0, 1, 1, 2, 0};
    CHECK(viterbi_decode(obs, T, Z, prior) == obs);
}

TEST_CASE("viterbi equals exhaustive enumeration") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> cls(0, 7);
    for (int draw = 0; draw < 40; ++draw) {
        const auto T = random_stochastic(5, 5, rng);
        const auto Z = random_stochastic(5, 8, rng);
        const Eigen::VectorXd prior = random_stochastic(1, 5, rng).row(0).transpose();
        for (std::size_t L = 1; L <= 8; ++L) {
            std::vector<int> obs(L);
            for (auto& o : obs) o = cls(rng);
            const auto ref = oracle::exhaustive_viterbi(obs, to_rows(T), to_rows(Z),
                                                        std::vector<double>(prior.data(), prior.data() + 5));
            CHECK(viterbi_decode(obs, T, Z, prior) == ref.path);
        }
    }
}

TEST_CASE("sticky transitions remove single-frame blips") {
    Eigen::MatrixXd T(2, 2);
    T << 0.9, 0.1, 0.1, 0.9;
    Eigen::MatrixXd Z(2, 2);
    Z << 0.7, 0.3, 0.3, 0.7;
    const Eigen::VectorXd prior = Eigen::VectorXd::Constant(2, 0.5);
    const std::vector<int> obs{0, 0, 0, 1, 0, 0};
    const auto path = viterbi_decode(obs, T, Z, prior);
    CHECK(path == std::vector<int>(6, 0));
    const auto ref = oracle::exhaustive_viterbi(obs, to_rows(T), to_rows(Z), {0.5, 0.5});
    CHECK(path == ref.path);
    CHECK(path_log_prob(path, obs, T, Z, prior) == doctest::Approx(std::log(ref.probability)));
}

TEST_CASE("viterbi input checks") {
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd Z(2, 2);
    Z << 1, 0, 1, 0;
    const Eigen::VectorXd prior = Eigen::VectorXd::Constant(2, 0.5);
    CHECK_THROWS_AS(viterbi_decode(std::vector<int>{1}, T, Z, prior), ValidationError);
    CHECK_THROWS_AS(viterbi_decode(std::vector<int>{3}, T, Z, prior), ValidationError);
    CHECK_THROWS_AS(oracle::exhaustive_viterbi(std::vector<int>(9, 0), to_rows(T), to_rows(Z), {0.5, 0.5}),
                    ValidationError);
}

TEST_CASE("semantic labels follow the dominant codes") {
    ClassCatalog cat;
    cat.classes = {{0, {0, 0, 1, 0}, 50, 0.5}, {1, {0, 0, 0, 0}, 30, 0.3}, {2, {0, -1, 0, 0}, 20, 0.2}};
    std::map<int, ClassStats> st{{0, {0.9, 0.0}}, {1, {0.01, 0.0}}, {2, {0.0, -2.0}}};
    const auto labels = semantic_label(std::vector<int>{0, 1, 2}, cat, st, 0.15);
    CHECK(labels == std::vector<std::string>{"turn", "rectilinear", "brake"});
}

TEST_CASE("ungraphed classes join the nearest graphed class") {
    ClassCatalog cat;
    cat.classes = {{0, {0, 1, 0, 0}, 10, 0}, {1, {0, 0, 0, 0}, 10, 0}, {2, {0, 1, 0, -1}, 1, 0}, {3, {1, 0, 1, 0}, 1, 0}};
    const auto a = complete_assignment(cat, {0, 1}, {0, 1});
    CHECK(a == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("mode model json roundtrip") {
    ModeModel m;
    m.n_modes = 2;
    m.assignment = {0, 1};
    m.labels = {"rectilinear", "turn"};
    m.graphed = {0, 1};
    m.codes = {{0, 1, 0, 0}, {0, 0, 1, 0}};
    m.T = Eigen::MatrixXd::Constant(2, 2, 0.5);
    m.Z = Eigen::MatrixXd::Identity(2, 2);
    m.prior = Eigen::VectorXd::Constant(2, 0.5);
    const auto b = ModeModel::from_json(m.to_json());
    CHECK(b.assignment == m.assignment);
    CHECK(b.labels == m.labels);
    CHECK(b.codes[1] == m.codes[1]);
    CHECK(b.T(1, 0) == 0.5);
}
