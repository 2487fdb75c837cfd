#include <doctest.h>

#include <random>
#include <sstream>

#include "decomp/geometry.hpp"
#include "decomp/io.hpp"
#include "support.hpp"

using namespace decomp;

TEST_CASE("trajectory csv: well-formed file parses") {
    std::istringstream in("t,x,y,psi,v,omega,u_lat,u_lon\n0,0,0,0,1,0,0,0.1\n0.02,0.02,0,0,1,0,0,0.1\n0.04,0.04,0,0,1,0,0,0.1\n");
    const Trajectory t = io::parse_trajectory(in, "mem.csv");
    CHECK(t.size() == 3);
    CHECK(t.period() == doctest::Approx(0.02));
    CHECK_FALSE(t.modes().has_value());
}

TEST_CASE("trajectory csv: decreasing time names the row") {
    std::istringstream in("t,x,y,psi,v,omega,u_lat,u_lon\n0.02,0,0,0,1,0,0,0\n0,0,0,0,1,0,0,0\n0.04,0,0,0,1,0,0,0\n");
    try {
        io::parse_trajectory(in, "bad.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.field() == "t");
    }
}

TEST_CASE("trajectory csv: rejections name row and field") {
    std::istringstream in("t,x,y,psi,v,omega,u_lat,u_lon\n0,0,0,0,1,0,0,0\n0.02,0,abc,0,1,0,0,0\n");
    try {
        io::parse_trajectory(in, "bad.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.field() == "y");
    }
    std::istringstream neg("t,x,y,psi,v,omega,u_lat,u_lon\n0,0,0,0,-1,0,0,0\n");
    CHECK_THROWS_AS(io::parse_trajectory(neg, "neg.csv"), ParseError);
    std::istringstream hdr("t,x,y\n0,0,0\n");
    CHECK_THROWS_AS(io::parse_trajectory(hdr, "hdr.csv"), ParseError);
}

TEST_CASE("trajectory csv: save/load returns the written 12-digit values") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<TrajectorySample> s;
    std::vector<int> modes;
    for (int i = 0; i < 200; ++i)
        s.push_back(testsupport::sample(i * 0.02, u(rng) * 100, u(rng), wrap_angle(u(rng)), std::abs(u(rng)),
                                        u(rng) / 3.0, u(rng), std::abs(u(rng)) / 3.0)),
            modes.push_back(i % 3);
    const Trajectory a(s, {"x", "y"}, modes);
    const auto dir = testsupport::scratch_dir("roundtrip");
    io::save_trajectory(a, dir / "a.csv");
    const Trajectory b = io::load_trajectory(dir / "a.csv");
    REQUIRE(b.size() == a.size());
    REQUIRE(b.modes());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto &p = a[i], &q = b[i];
        for (auto [x, y] : {std::pair{p.t, q.t}, {p.state.x, q.state.x}, {p.state.y, q.state.y},
                            {p.state.psi, q.state.psi}, {p.state.v, q.state.v}, {p.state.omega, q.state.omega},
                            {p.input.u_lat, q.input.u_lat}, {p.input.u_lon, q.input.u_lon}})
        {
            CHECK(std::abs(io::round12(x) - y) <= 1e-12 * std::max(1.0, std::abs(x)));
            CHECK(std::abs(x - y) <= 5e-12 * std::abs(x));
        }
        CHECK((*b.modes())[i] == modes[i]);
    }
}

TEST_CASE("gaze csv roundtrip keeps validity") {
    GazeTrace g;
    for (int i = 0; i < 10; ++i) g.samples.push_back({i * 0.02, 1.0 * i, -2.0, i != 4});
    const auto dir = testsupport::scratch_dir("gaze_rt");
    io::save_gaze(g, dir / "g.csv");
    const auto h = io::load_gaze(dir / "g.csv");
    REQUIRE(h.samples.size() == 10);
    CHECK_FALSE(h.samples[4].valid);
    CHECK(h.samples[3].gx == 3.0);
}

TEST_CASE("wrap_angle lands in (-pi, pi] and is 2pi periodic") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(angle_diff(wrap_angle(a + 2 * kPi), w)) < 1e-9);
    }
}

TEST_CASE("goal_polar: coincident and aligned cases") {
    const GoalRef g{3.0, -2.0, 0.0};
    const auto at = goal_polar(VehicleState{3.0, -2.0, 1.0, 0.0, 0.0}, g);
    CHECK(at.d_G == 0.0);
    const auto north = goal_polar(VehicleState{3.0, 8.0, -kPi / 2, 1.0, 0.0}, g);
    CHECK(north.theta_G == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(north.d_G == doctest::Approx(10.0));
}

TEST_CASE("goal reference is the entry-edge centroid") {
    GoalCorridor c{{0, 10, 4, 20}, kPi / 2};
    const auto r = goal_reference(c);
    CHECK(r.x == doctest::Approx(2.0));
    CHECK(r.y == doctest::Approx(10.0));
    c.psi_G = 0.0;
    CHECK(goal_reference(c).x == doctest::Approx(0.0));
    CHECK(goal_reference(c).y == doctest::Approx(15.0));
}

TEST_CASE("goal_polar matches an independent trigonometric recompute") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-100, 100), ang(-4, 4);
    for (int i = 0; i < 5000; ++i) {
        const VehicleState s{pos(rng), pos(rng), wrap_angle(ang(rng)), 1, 0};
        const GoalRef g{pos(rng), pos(rng), 0};
        const auto gp = goal_polar(s, g);
        const double dx = g.x - s.x, dy = g.y - s.y;
        const double d = std::sqrt(dx * dx + dy * dy);
        // theta = psi - bearing, folded into (-pi, pi] via atan2 of sin/cos
        const double b = std::atan2(dy, dx);
        const double th = std::atan2(std::sin(s.psi - b), std::cos(s.psi - b));
        CHECK(std::abs(gp.d_G - d) < 1e-9);
        CHECK(std::abs(angle_diff(gp.theta_G, th)) < 1e-9);
    }
}

TEST_CASE("goal_polar is invariant to rotating agent and goal together") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> pos(-50, 50), ang(-3, 3);
    for (int i = 0; i < 1000; ++i) {
        const VehicleState s{pos(rng), pos(rng), ang(rng), 1, 0};
        const GoalRef g{pos(rng), pos(rng), ang(rng)};
        const double a = ang(rng);
        const Rigid2 R{a, {0, 0}};
        auto rot = [&](Vec2 p) { return R.apply(p - g.position()) + g.position(); };
        const Vec2 p2 = rot(s.position());
        const VehicleState s2{p2.x, p2.y, wrap_angle(s.psi + a), 1, 0};
        const auto a1 = goal_polar(s, g), a2 = goal_polar(s2, g);
        CHECK(a1.d_G == doctest::Approx(a2.d_G).epsilon(1e-12));
        CHECK(std::abs(angle_diff(a1.theta_G, a2.theta_G)) < 1e-9);
    }
}

TEST_CASE("workspace validation") {
    Workspace ws;
    ws.bounds = {0, 0, 10, 10};
    ws.goal = {{8, 8, 9, 9}, 0};
    ws.starts = {{1, 1, 0}};
    ws.obstacles = {{{4, 4}, {6, 4}, {6, 6}, {4, 6}}};
    CHECK_NOTHROW(ws.validate());
    auto bow = ws;
    bow.obstacles = {{{4, 4}, {6, 6}, {6, 4}, {4, 6}}};
    CHECK_THROWS_AS(bow.validate(), ValidationError);
    auto inside = ws;
    inside.starts = {{5, 5, 0}};
    CHECK_THROWS_AS(inside.validate(), ValidationError);
    auto out = ws;
    out.goal.rect = {8, 8, 12, 9};
    CHECK_THROWS_AS(out.validate(), ValidationError);
}

TEST_CASE("workspace json roundtrip") {
    Workspace ws;
    ws.bounds = {-1, -2, 30, 40};
    ws.goal = {{10, 30, 12, 35}, kPi / 2};
    ws.starts = {{0, 0, 0.5}};
    ws.obstacles = {{{4, 4}, {6, 4}, {5, 6}}};
    const auto back = io::workspace_from_json(io::workspace_to_json(ws));
    CHECK(back.obstacles.at(0).size() == 3);
    CHECK(back.goal.psi_G == doctest::Approx(kPi / 2));
    CHECK(back.starts.at(0).psi0 == doctest::Approx(0.5));
}
