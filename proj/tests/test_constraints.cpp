#include <doctest.h>

#include <random>

#include "decomp/constraints.hpp"
#include "decomp/geometry.hpp"
#include "decomp_oracle/oracle.hpp"
#include "support.hpp"

using namespace decomp;
using testsupport::sample;

TEST_CASE("constraint levels at the bounds") {
    VehicleParams p;
    const auto tol = ConstraintTolerances::defaults(p);
    CHECK(label_sample(sample(0, 0, 0, 0, 3, 0, 0, p.u_lon_max), p, tol).c_ulon == 1);
    CHECK(label_sample(sample(0, 0, 0, 0, 0, 0, 0, 0.5), p, tol).c_v == -1);
    CHECK(label_sample(sample(0, 0, 0, 0, 3, -p.omega_max, -p.a_lat_max, 0.5), p, tol) ==
          ConstraintState{-1, 0, -1, 0});
    CHECK(label_sample(sample(0, 0, 0, 0, p.v_max(), 0, 0, 0.5), p, tol).c_v == 1);
}

TEST_CASE("labelling agrees with the brute-force oracle on random samples") {
    VehicleParams p;
    const auto tol = ConstraintTolerances::defaults(p);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        // Bias a third of the draws onto band edges and bounds.
        auto pick = [&](double lo, double hi) {
            const double r = u(rng);
            if (r < 0.1) return lo;
            if (r < 0.2) return hi;
            return lo + (hi - lo) * u(rng);
        };
        const auto s = sample(0, 0, 0, 0, pick(0, p.v_max()), pick(-p.omega_max, p.omega_max),
                              pick(-p.a_lat_max, p.a_lat_max), pick(0, p.u_lon_max));
        const auto c = label_sample(s, p, tol);
        const auto o = oracle::relabel(s, p);
        if (c.c_ulat != o[0] || c.c_ulon != o[1] || c.c_omega != o[2] || c.c_v != o[3]) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("bad tolerances are rejected") {
    VehicleParams p;
    const auto tr = testsupport::straight(5);
    CHECK_THROWS_AS(label_constraints(tr, p, ConstraintTolerances{0, 0.1, 0.1, 0.1}), ValidationError);
    CHECK_THROWS_AS(label_constraints(tr, p, ConstraintTolerances{100, 0.1, 0.1, 0.1}), ValidationError);
}

TEST_CASE("code index is a bijection over the 81 codes") {
    for (int i = 0; i < 81; ++i) CHECK(ConstraintState::from_index(i).code_index() == i);
    CHECK(l1_distance({1, 0, -1, 0}, {-1, 0, 0, 0}) == 3);
}

TEST_CASE("class catalog ordering and frequencies") {
    std::vector<ConstraintState> zeros(10);
    const auto one = catalog_classes(zeros);
    REQUIRE(one.size() == 1);
    CHECK(one.classes[0].frequency == 1.0);

    std::vector<ConstraintState> mix(7, ConstraintState{0, 1, 0, 0});
    mix.insert(mix.end(), 3, ConstraintState{0, 0, 1, 0});
    const auto two = catalog_classes(mix);
    REQUIRE(two.size() == 2);
    CHECK(two.classes[0].id == 0);
    CHECK(two.classes[0].code == ConstraintState{0, 1, 0, 0});
    CHECK(two.classes[0].frequency == doctest::Approx(0.7));
    CHECK(two.classes[1].frequency == doctest::Approx(0.3));
    const auto ids = class_ids(mix, two);
    CHECK(ids.front() == 0);
    CHECK(ids.back() == 1);
    CHECK(class_ids(std::vector<ConstraintState>{{1, 1, 1, 1}}, two)[0] == -1);
}

TEST_CASE("subgoals: straight run has none, one turn has one at the exit") {
    const auto tr = testsupport::straight(300);
    std::unique_ptr<bool[]> none(new bool[300]());
    CHECK(extract_subgoals(tr, {none.get(), 300}).empty());

    std::unique_ptr<bool[]> turn(new bool[300]());
    for (int i = 100; i < 180; ++i) turn[i] = true;
    turn[140] = false;  // short gap is bridged
    const auto sg = extract_subgoals(tr, {turn.get(), 300}, 4);
    REQUIRE(sg.size() == 1);
    CHECK(sg[0].sample == 180);
    CHECK(sg[0].trajectory == 4);
    CHECK(sg[0].x == doctest::Approx(tr[180].state.x));

    std::unique_ptr<bool[]> blip(new bool[300]());
    blip[50] = blip[51] = true;
    CHECK(extract_subgoals(tr, {blip.get(), 300}).empty());
}

TEST_CASE("dbscan: separated groups and lone points") {
    std::vector<Subgoal> s;
    for (int i = 0; i < 5; ++i) s.push_back({0.1 * i, 0, 0});
    for (int i = 0; i < 5; ++i) s.push_back({50 + 0.1 * i, 10, kPi / 2});
    s.push_back({-30, -30, 0});
    const auto c = cluster_subgoals(s, 1.0, 3);
    REQUIRE(c.centers.size() == 2);
    for (int i = 0; i < 5; ++i) CHECK(c.subgoals[i].cluster_id == 0);
    for (int i = 5; i < 10; ++i) CHECK(c.subgoals[i].cluster_id == 1);
    CHECK_FALSE(c.subgoals[10].cluster_id.has_value());
    CHECK(c.centers[0].x == doctest::Approx(0.2));
    CHECK(c.centers[1].psi == doctest::Approx(kPi / 2));

    const auto lone = cluster_subgoals({{0, 0, 0}}, 1.0, 2);
    CHECK(lone.centers.empty());
    CHECK_FALSE(lone.subgoals[0].cluster_id);
}

TEST_CASE("circular mean heading across the wrap") {
    std::vector<Subgoal> s;
    for (double a : {kPi - 0.05, -kPi + 0.05, kPi}) s.push_back({0, 0, a});
    const auto c = cluster_subgoals(s, 1.0, 2);
    REQUIRE(c.centers.size() == 1);
    CHECK(std::abs(angle_diff(c.centers[0].psi, kPi)) < 1e-9);
}

TEST_CASE("alignment: identity for a segment already in the goal frame") {
    std::vector<TrajectorySample> v;
    for (int i = 0; i <= 50; ++i) v.push_back(sample(i * 0.02, 0, -1.0 + i * 0.02, kPi / 2, 1));
    const Trajectory tr(v);
    const auto segs = cut_and_align(tr, {});
    REQUIRE(segs.size() == 1);
    CHECK(std::abs(segs[0].transform.angle) < 1e-12);
    CHECK(std::abs(segs[0].transform.offset.x) < 1e-12);
    CHECK(std::abs(segs[0].transform.offset.y) < 1e-12);
}

TEST_CASE("alignment: end at origin moving along +y and distances preserved") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TrajectorySample> v;
        double x = n(rng) * 10, y = n(rng) * 10, psi = n(rng);
        for (int i = 0; i < 120; ++i) {
            v.push_back(sample(i * 0.02, x, y, wrap_angle(psi), 2));
            psi += 0.02 * n(rng);
            x += 0.04 * std::cos(psi);
            y += 0.04 * std::sin(psi);
        }
        const Trajectory tr(v);
        std::vector<Subgoal> sg{{tr[60].state.x, tr[60].state.y, tr[60].state.psi, 0, 60}};
        for (const auto& s : cut_and_align(tr, sg)) {
            const auto& e = s.aligned.back().state;
            CHECK(std::abs(e.x) < 1e-12);
            CHECK(std::abs(e.y) < 1e-12);
            const auto& p = s.aligned[s.aligned.size() - 2].state;
            CHECK(std::abs(angle_diff(std::atan2(e.y - p.y, e.x - p.x), kPi / 2)) < 1e-9);
            for (std::size_t i = 0; i + 7 < s.size(); i += 7) {
                const double d0 = std::hypot(s.samples[i].state.x - s.samples[i + 7].state.x,
                                             s.samples[i].state.y - s.samples[i + 7].state.y);
                const double d1 = std::hypot(s.aligned[i].state.x - s.aligned[i + 7].state.x,
                                             s.aligned[i].state.y - s.aligned[i + 7].state.y);
                CHECK(std::abs(d0 - d1) < 1e-9);
            }
        }
    }
}

TEST_CASE("cut points are shared between neighbouring segments") {
    const auto tr = testsupport::straight(200);
    std::vector<Subgoal> sg{{0, 0, 0, 0, 50}, {0, 0, 0, 0, 120}};
    const auto segs = cut_and_align(tr, sg, GoalRef{10, 0, 0});
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].end == segs[1].begin);
    CHECK(segs[1].end == segs[2].begin);
    CHECK(segs[2].end == 199);
    CHECK(segs[2].goal.x == 10.0);
}
