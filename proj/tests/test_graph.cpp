#include <doctest.h>

#include <algorithm>
#include <random>

#include "decomp/graph.hpp"
#include "decomp_oracle/oracle.hpp"
#include "support.hpp"

using namespace decomp;

namespace {

// Rows drawn from N(0, inv(P)) for a planted precision P.
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& P, std::size_t n, std::uint64_t seed) {
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(P.inverse()).matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), P.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::VectorXd e(P.rows());
        for (Eigen::Index k = 0; k < e.size(); ++k) e(k) = z(rng);
        X.row(i) = (L * e).transpose();
    }
    return X;
}

Eigen::MatrixXd chain_precision() {
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4) * 2.0;
    for (int i = 0; i < 3; ++i) P(i, i + 1) = P(i + 1, i) = -0.8;
    return P;
}

}  // namespace

TEST_CASE("covariance: perfectly correlated columns") {
    Eigen::MatrixXd X(50, 2);
    for (int i = 0; i < 50; ++i) X(i, 0) = i * 0.3, X(i, 1) = 2 * i * 0.3 + 1;
    SignalMatrix m{{"a", "b"}, X};
    const auto z = standardize(m);
    const Eigen::MatrixXd C = empirical_covariance(z);
    CHECK(std::abs(C(0, 1) - 1.0) < 1e-9);
}

TEST_CASE("covariance: independent columns are nearly uncorrelated") {
    const Eigen::MatrixXd X = sample_gaussian(Eigen::MatrixXd::Identity(3, 3), 100000, 4);
    SignalMatrix m{{"a", "b", "c"}, X};
    const Eigen::MatrixXd C = empirical_covariance(standardize(m));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(C(i, j)) < 0.02);
}

TEST_CASE("covariance: hand-computed 3x3 on four rows") {
    Eigen::MatrixXd X(4, 3);
    X << 1, 2, 0, 2, 4, 1, 3, 6, 1, 4, 8, 2;
    const Eigen::MatrixXd C = empirical_covariance(X);
    const double hand[3][3] = {{5.0 / 3, 10.0 / 3, 1.0}, {10.0 / 3, 20.0 / 3, 2.0}, {1.0, 2.0, 2.0 / 3}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(C(i, j) == doctest::Approx(hand[i][j]).epsilon(1e-14));
    const auto o = oracle::hand_covariance({{1, 2, 0}, {2, 4, 1}, {3, 6, 1}, {4, 8, 2}});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(C(i, j) == doctest::Approx(o[i][j]).epsilon(1e-14));
}

TEST_CASE("covariance matches the hand oracle on random data") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    Eigen::MatrixXd X(37, 5);
    oracle::Matrix rows(37, std::vector<double>(5));
    for (int i = 0; i < 37; ++i)
        for (int j = 0; j < 5; ++j) rows[i][j] = X(i, j) = z(rng) * (j + 1) + j;
    const Eigen::MatrixXd C = empirical_covariance(X);
    const auto o = oracle::hand_covariance(rows);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(std::abs(C(i, j) - o[i][j]) < 1e-12);
    CHECK_THROWS_AS(oracle::hand_covariance(oracle::Matrix(3, std::vector<double>(6, 0.0))), ValidationError);
}

TEST_CASE("standardize drops constant columns") {
    Eigen::MatrixXd X(10, 3);
    for (int i = 0; i < 10; ++i) X(i, 0) = i, X(i, 1) = 4.0, X(i, 2) = i * i;
    const auto z = standardize(SignalMatrix{{"a", "k", "b"}, X});
    CHECK(z.names == std::vector<std::string>{"a", "b"});
    CHECK(z.excluded == std::vector<std::string>{"k"});
}

TEST_CASE("sice: lambda 0 reproduces the inverse") {
    Eigen::MatrixXd S(3, 3);
    S << 2.0, 0.6, 0.2, 0.6, 1.5, 0.4, 0.2, 0.4, 1.0;
    SiceOptions o;
    o.lambda = 0.0;
    o.tol = 1e-12;
    const auto g = sice_fit(S, o);
    CHECK((g.precision - S.inverse()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sice: diagonal covariance gives reciprocal diagonal") {
    Eigen::MatrixXd S = Eigen::Vector3d(2.0, 4.0, 0.5).asDiagonal();
    SiceOptions o;
    o.lambda = 0.0;
    const auto g = sice_fit(S, o);
    CHECK(g.precision(0, 0) == doctest::Approx(0.5));
    CHECK(g.precision(1, 1) == doctest::Approx(0.25));
    CHECK(g.precision(2, 2) == doctest::Approx(2.0));
    CHECK(g.edges.empty());
}

TEST_CASE("sice: planted chain recovered inside a lambda sweep; objective never drops") {
    const Eigen::MatrixXd X = sample_gaussian(chain_precision(), 100000, 17);
    const Eigen::MatrixXd S = empirical_covariance(X);
    const std::vector<std::pair<std::size_t, std::size_t>> chain{{0, 1}, {1, 2}, {2, 3}};
    int hits = 0;
    for (int k = 0; k < 10; ++k) {
        SiceOptions o;
        o.lambda = 0.02 + 0.04 * k;
        const auto g = sice_fit(S, o);
        if (g.edges == chain) ++hits;
        for (std::size_t i = 1; i < g.stats.objective.size(); ++i)
            CHECK(g.stats.objective[i] >= g.stats.objective[i - 1] - 1e-12);
        CHECK(penalized_loglik(g.precision, S, o.lambda) == doctest::Approx(g.stats.objective.back()));
    }
    CHECK(hits > 0);
}

TEST_CASE("sice: non-convergence is reported") {
    const Eigen::MatrixXd S = empirical_covariance(sample_gaussian(chain_precision(), 500, 2));
    SiceOptions o;
    o.lambda = 0.05;
    o.max_iter = 1;
    o.tol = 1e-16;
    CHECK_THROWS_AS(sice_fit(S, o), ConvergenceError);
}

TEST_CASE("class graphs: saturated channel is not a node") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    const std::size_t n = 400;
    SignalMatrix m;
    m.names = {"v", "u_lon", "omega"};
    m.data.resize(n, 3);
    for (std::size_t i = 0; i < n; ++i) m.data.row(i) << 5 + z(rng), 1.0 - 0.001 * (i % 3), z(rng);
    ClassCatalog cat;
    cat.classes.push_back({0, {0, 1, 0, 0}, n, 1.0});
    const std::vector<int> ids(n, 0);
    const auto g = fit_class_graphs(m, ids, cat);
    const auto& nodes = g.graphs.at(0).nodes;
    CHECK(std::find(nodes.begin(), nodes.end(), "u_lon") == nodes.end());
    CHECK(std::find(nodes.begin(), nodes.end(), "v") != nodes.end());
}

TEST_CASE("class graphs: planted psi = k theta coupling yields the edge; row order is irrelevant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    const std::size_t n = 2000;
    SignalMatrix m;
    m.names = {"theta_G", "psi_err", "v"};
    m.data.resize(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = z(rng);
        m.data.row(i) << th, 1.76 * th + 0.05 * z(rng), 3 + z(rng);
    }
    ClassCatalog cat;
    cat.classes.push_back({0, {0, 0, 0, 0}, n, 1.0});
    const std::vector<int> ids(n, 0);
    const auto g = fit_class_graphs(m, ids, cat).graphs.at(0);
    CHECK(g.edge_set().count({"psi_err", "theta_G"}) == 1);

    SignalMatrix shuffled = m;
    std::vector<Eigen::Index> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Eigen::Index>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) shuffled.data.row(i) = m.data.row(perm[i]);
    const auto h = fit_class_graphs(shuffled, ids, cat).graphs.at(0);
    CHECK(h.edge_set() == g.edge_set());
    CHECK((h.precision - g.precision).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("class graphs: no qualifying class is an error") {
    SignalMatrix m{{"v"}, Eigen::MatrixXd::Random(5, 1)};
    ClassCatalog cat;
    cat.classes.push_back({0, {}, 5, 1.0});
    CHECK_THROWS_AS(fit_class_graphs(m, std::vector<int>(5, 0), cat), ValidationError);
}

TEST_CASE("graph json roundtrip") {
    Eigen::MatrixXd S(2, 2);
    S << 1.0, 0.5, 0.5, 1.0;
    const auto g = sice_fit(S, {}, {"a", "b"});
    const auto h = graph_from_json(graph_to_json(g));
    CHECK(h.nodes == g.nodes);
    CHECK(h.edge_set() == g.edge_set());
    CHECK(h.precision(0, 1) == doctest::Approx(g.precision(0, 1)));
}
