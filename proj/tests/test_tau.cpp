#include <doctest.h>

#include <cmath>

#include "decomp/geometry.hpp"
#include "decomp/tau.hpp"
#include "support.hpp"

using namespace decomp;

namespace {

std::vector<double> times(std::size_t n, double dt = 0.02) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

}  // namespace

TEST_CASE("linear closure: tau = t - T") {
    const auto t = times(200);
    std::vector<double> g;
    for (double x : t) g.push_back(3.0 * (1 - x / 5.0));
    const auto s = make_gap_series("g", t, g);
    for (std::size_t i = 0; i < s.size(); ++i) {
        REQUIRE(s.valid[i]);
        CHECK(s.tau[i] == doctest::Approx(t[i] - 5.0).epsilon(1e-9));
    }
}

TEST_CASE("constant gap: tau masked everywhere") {
    const auto t = times(50);
    const std::vector<double> g(50, 2.0);
    const auto s = make_gap_series("g", t, g);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK_FALSE(s.valid[i]);
}

TEST_CASE("difference derivative on a cubic gap") {
    const auto t = times(101);
    std::vector<double> g;
    for (double x : t) g.push_back(std::pow(2.0 - x, 3));
    const auto s = make_gap_series("g", t, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(s.gdot[i] + 3 * std::pow(2 - t[i], 2)));
    CHECK(worst < 1e-3);
}

TEST_CASE("fit: exact proportional taus") {
    const auto t = times(300);
    std::vector<double> gb, ga;
    for (double x : t) {
        gb.push_back(std::exp(-x));
        ga.push_back(std::exp(-x / 0.8));  // tau_a = 0.8 tau_b
    }
    const auto fa = make_gap_series("a", t, ga, 1e-9), fb = make_gap_series("b", t, gb, 1e-9);
    // interior points only: one-sided ends carry their own truncation error
    const auto f = fit_coupling(fa, fb, 1.0, FitQuantity::tau);
    CHECK(f.k_hat == doctest::Approx(0.8).epsilon(1e-3));
    CHECK(f.r2 > 0.999999);
}

TEST_CASE("fit: exactly linear gaps give the slope and r2 = 1") {
    const auto t = times(200);
    std::vector<double> a, b;
    for (double x : t) {
        b.push_back(1.0 - x / 4.0);
        a.push_back(0.8 * (1.0 - x / 4.0));
    }
    const auto fa = make_gap_series("a", t, a), fb = make_gap_series("b", t, b);
    for (auto q : {FitQuantity::gap, FitQuantity::tau}) {
        const auto f = fit_coupling(fa, fb, 0.5, q);
        CHECK(f.k_hat == doctest::Approx(q == FitQuantity::gap ? 0.8 : 1.0).epsilon(1e-9));
        CHECK(f.r2 == doctest::Approx(1.0));
    }
}

TEST_CASE("fit: too few points is an error") {
    const auto t = times(5);
    const std::vector<double> g{5, 4, 3, 2, 1};
    const auto s = make_gap_series("g", t, g);
    CHECK_THROWS_AS(fit_coupling(s, s, 0.5), ValidationError);
}

TEST_CASE("onset: linear descent through zero at t = 2 s") {
    const auto t = times(300);
    std::vector<double> g;
    for (double x : t) g.push_back(0.5 * (2.0 - x));
    const auto s = make_gap_series("k", t, g);
    const auto on = detect_turn_onset(s, 0.0);
    REQUIRE(on);
    CHECK(std::abs(t[*on] - 2.0) <= 0.02 + 1e-12);
}

TEST_CASE("onset: no crossing, no onset") {
    const auto t = times(300);
    std::vector<double> g;
    for (double x : t) g.push_back(1.0 + 0.1 * x);
    CHECK_FALSE(detect_turn_onset(make_gap_series("k", t, g)));
    std::vector<double> low(300, -0.5);
    CHECK_FALSE(detect_turn_onset(make_gap_series("k", t, low)));
}

TEST_CASE("gap series from samples: head-on approach") {
    std::vector<TrajectorySample> v;
    for (int i = 0; i < 100; ++i) v.push_back(testsupport::sample(i * 0.02, 0, 10.0 - i * 0.04, -kPi / 2, 2));
    const GoalRef goal{0, 0, -kPi / 2};
    const auto d = gap_series(v, goal, GapKind::d);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.tau[i] == doctest::Approx(v[i].t - 5.0).epsilon(1e-9));
    const auto th = gap_series(v, goal, GapKind::theta);
    CHECK(std::abs(th.g[10]) < 1e-12);
    const auto k = gap_series(v, goal, GapKind::k);
    for (std::size_t i = 0; i < k.size(); ++i) CHECK_FALSE(k.defined[i]);
    CHECK(gap_kind_from_string("psi") == GapKind::psi);
    CHECK_THROWS_AS(gap_kind_from_string("x"), ValidationError);
}
