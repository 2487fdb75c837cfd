#include <doctest.h>

#include <random>

#include "decomp/gaze.hpp"
#include "decomp/geometry.hpp"
#include "decomp/scenario.hpp"
#include "decomp/simulator.hpp"
#include "support.hpp"

using namespace decomp;

namespace {

GazeTrace line_trace(std::size_t n, double vx, double vy, double dt = 0.02) {
    GazeTrace g;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        g.samples.push_back({t, 1.0 + vx * t, -2.0 + vy * t, true});
    }
    return g;
}

Workspace open_workspace() {
    Workspace ws;
    ws.bounds = {-100, -100, 100, 100};
    ws.goal = {{80, 80, 90, 90}, 0};
    ws.obstacles = {{{10, 10}, {20, 10}, {20, 20}, {10, 20}}};
    return ws;
}

}  // namespace

TEST_CASE("stationary gaze is a single fixation") {
    const auto c = classify_gaze(line_trace(100, 0, 0));
    REQUIRE(c.segments.size() == 1);
    CHECK(c.segments[0].motion == GazeMotion::fixation);
    for (int m : c.motion) CHECK(m == static_cast<int>(GazeMotion::fixation));
}

TEST_CASE("constant speed between the thresholds is pursuit") {
    const auto c = classify_gaze(line_trace(100, 12, 16));  // 20 units/s
    for (std::size_t i = 0; i < c.motion.size(); ++i) CHECK(c.motion[i] == static_cast<int>(GazeMotion::pursuit));
    REQUIRE(c.segments.size() == 1);
}

TEST_CASE("a fast jump is a saccade and isolated blips are smoothed away") {
    auto g = line_trace(120, 0, 0);
    for (std::size_t i = 60; i < 120; ++i) g.samples[i].gx += 30.0 * std::min<double>(1.0, (i - 59) / 4.0);
    g.samples[30].gx += 0.5;  // one-sample jitter spike
    const auto c = classify_gaze(g);
    CHECK(c.motion[30] == static_cast<int>(GazeMotion::fixation));
    CHECK(c.motion[61] == static_cast<int>(GazeMotion::saccade));
    CHECK(c.motion[100] == static_cast<int>(GazeMotion::fixation));
}

TEST_CASE("short invalid gaps are bridged, long ones split") {
    auto g = line_trace(100, 0, 0);
    g.samples[40].valid = g.samples[41].valid = false;
    CHECK(classify_gaze(g).segments.size() == 1);
    for (std::size_t i = 40; i < 50; ++i) g.samples[i].valid = false;
    const auto c = classify_gaze(g);
    CHECK(c.segments.size() == 2);
    CHECK(c.motion[45] == -1);
    CHECK_THROWS_AS(classify_gaze(line_trace(3, 0, 0)), ValidationError);
}

TEST_CASE("function labels: obstacle edge is cue, open space is anticipation") {
    const Workspace ws = open_workspace();
    GazeTrace edge;
    GazeTrace open;
    for (int i = 0; i < 50; ++i) {
        edge.samples.push_back({i * 0.02, 15.0, 10.0, true});
        open.samples.push_back({i * 0.02, -60.0 + i * 0.3, -60.0, true});
    }
    auto ce = classify_gaze(edge);
    label_gaze_function(ce.segments, ce.samples, ws);
    CHECK(ce.segments.at(0).function == GazeFunction::cue);
    auto co = classify_gaze(open);
    label_gaze_function(co.segments, co.samples, ws);
    CHECK(co.segments.at(0).function == GazeFunction::anticipation);
}

TEST_CASE("principal direction follows progression; degenerate clouds give none") {
    std::vector<Vec2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({-0.5 * i, -0.5 * i});
    const auto d = principal_direction(pts);
    REQUIRE(d);
    CHECK(std::atan2(d->y, d->x) == doctest::Approx(-3 * kPi / 4));
    CHECK_FALSE(principal_direction(std::vector<Vec2>(5, Vec2{1, 1})));
}

TEST_CASE("exact-heading construction gives rho = 1") {
    // Straight legs at distinct headings; gaze rides the path itself and each
    // corner is masked by an unbridgeable invalid gap.
    const std::vector<double> headings{0.0, 0.6, 1.3, 2.0, 2.9, -2.5, -1.4};
    std::vector<TrajectorySample> tr;
    GazeTrace g;
    double x = 0, y = 0, t = 0;
    for (double h : headings) {
        for (int i = 0; i < 80; ++i) {
            tr.push_back(testsupport::sample(t, x, y, h, 2.0));
            g.samples.push_back({t, x, y, i >= 6});
            x += 0.1 * std::cos(h);
            y += 0.1 * std::sin(h);
            t += 0.02;
        }
    }
    const Trajectory traj(tr);
    auto c = classify_gaze(g, {2.0, 60.0});
    label_gaze_function(c.segments, c.samples, open_workspace());
    const auto r = anticipation_correlation(c.segments, c.samples, traj);
    CHECK(r.pairs.size() == headings.size());
    CHECK(r.rho == doctest::Approx(1.0).epsilon(1e-12));
    for (auto [a, b] : r.pairs) CHECK(std::abs(angle_diff(a, b)) < 1e-9);
}

TEST_CASE("circular correlation survives the wrap") {
    std::vector<std::pair<double, double>> p;
    for (double a : {kPi - 0.2, kPi - 0.1, -kPi + 0.05, -kPi + 0.2}) p.push_back({a, wrap_angle(a + 0.01)});
    CHECK(circular_pearson(p) > 0.99);
}

TEST_CASE("gaze ray meets the ground plane") {
    const auto p = ground_intersection(0, 0, 2, 1, 0, -1);
    REQUIRE(p);
    CHECK(p->x == doctest::Approx(2.0));
    CHECK_FALSE(ground_intersection(0, 0, 2, 1, 0, 0.5));
}

TEST_CASE("planted schedule on one course run is recovered") {
    Scenario sc = planted_course();
    SimConfig cfg = sc.sim;
    const auto r = run_tau_agent(sc.workspace, sc.agent, sc.vehicle, cfg);
    const auto& tr = r.trajectory;
    const double span = tr.samples().back().t - tr.samples().front().t;
    const auto g = synth_gaze(tr, sc.workspace, fill_schedule(sc.gaze.pattern, span, sc.gaze.synth.lookahead), 5,
                              sc.gaze.synth);
    GazeClassifierOptions o;
    o.v_fix = 2.0;
    const auto c = classify_gaze(g, o);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < c.motion.size(); ++i) hit += c.motion[i] == (*g.modes)[i];
    CHECK(static_cast<double>(hit) / static_cast<double>(c.motion.size()) >= 0.95);
}
