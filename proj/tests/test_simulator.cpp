#include <doctest.h>

#include <chrono>

#include "decomp/constraints.hpp"
#include "decomp/dynamics.hpp"
#include "decomp/geometry.hpp"
#include "decomp/simulator.hpp"
#include "decomp/tau.hpp"
#include "decomp_oracle/oracle.hpp"
#include "support.hpp"

using namespace decomp;

namespace {

VehicleState rollout(VehicleState s, ControlInput u, const VehicleParams& p, double dt, double T, Integrator in) {
    const auto n = static_cast<int>(std::llround(T / dt));
    for (int i = 0; i < n; ++i) s = step_dynamics(s, u, p, dt, in);
    return s;
}

// Start heading north, one 90 degree turn east at (10, 20), then straight into the goal.
struct OneTurn {
    Workspace ws;
    AgentParams agent;
    VehicleParams p;
    SimConfig cfg;
    OneTurn() {
        ws.bounds = {-50, -50, 50, 50};
        ws.goal = {{30, 15, 40, 25}, 0.0};
        ws.starts = {{0, 0, kPi / 2}};
        agent.subgoals = {{10, 20, 0.0, Approach::turn}};
        p.k_acc = 1.0;
        cfg.reach_radius = 0.3;
    }
};

}  // namespace

TEST_CASE("zero lateral command keeps heading") {
    VehicleParams p;
    for (auto in : {Integrator::euler, Integrator::rk4}) {
        const auto s = rollout({0, 0, 0.7, 0, 0}, {0.0, 0.6}, p, 0.02, 20.0, in);
        CHECK(s.psi == 0.7);
        CHECK(s.omega == 0.0);
    }
}

TEST_CASE("full throttle from rest settles at k_acc*u_lon_max/k_drag") {
    VehicleParams p;
    const auto s = rollout({}, {0.0, p.u_lon_max}, p, 0.02, 10.0 / p.k_drag * 2, Integrator::rk4);
    CHECK(std::abs(s.v - p.v_max()) / p.v_max() < 1e-3);
}

TEST_CASE("rk4 at 0.02 s tracks the fine-step euler oracle over 5 s") {
    VehicleParams p;
    for (auto [ulat, ulon, v0] : {std::tuple{1.5, 0.8, 2.0}, {-4.0, 0.3, 0.2}, {0.3, 1.0, 9.0}}) {
        const auto s = rollout({1, 2, 0.3, v0, 0}, {ulat, ulon}, p, 0.02, 5.0, Integrator::rk4);
        const auto ref = oracle::euler_reference({1, 2, 0.3, v0}, ulat, ulon, p, 1e-5, 5.0).back().second;
        CHECK(std::hypot(s.x - ref.x, s.y - ref.y) < 1e-3);
        CHECK(std::abs(s.v - ref.v) < 1e-3);
        CHECK(std::abs(angle_diff(s.psi, ref.psi)) < 1e-3);
    }
}

TEST_CASE("dynamics respects bounds and rejects bad input") {
    VehicleParams p;
    const auto s = step_dynamics({0, 0, 0, 0.0, 0}, {100.0, 0.0}, p, 0.02);
    CHECK(std::abs(s.omega) <= p.omega_max);
    CHECK(s.v >= 0.0);
    CHECK_THROWS_AS(step_dynamics({}, {0, 0}, p, 0.0), Error);
    CHECK_THROWS_AS(step_dynamics({0, 0, 0, std::nan(""), 0}, {0, 0}, p, 0.02), Error);
    CHECK(turn_rate(1.0, 0.0, p) == doctest::Approx(1.0 / p.v_floor > p.omega_max ? p.omega_max : 1.0 / p.v_floor));
}

TEST_CASE("straight-ahead goal gives a pure rectilinear run") {
    Workspace ws;
    ws.bounds = {-20, -5, 20, 60};
    ws.goal = {{-5, 40, 5, 50}, kPi / 2};
    ws.starts = {{0, 0, kPi / 2}};
    AgentParams a;
    VehicleParams p;
    SimConfig cfg;
    const auto r = run_tau_agent(ws, a, p, cfg);
    CHECK(r.reached_goal);
    const auto& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        CHECK((*tr.modes())[i] == static_cast<int>(PlantedMode::rectilinear));
        CHECK(std::abs(tr[i].state.psi - kPi / 2) < 1e-9);
    }
}

TEST_CASE("one planted turn: rectilinear, turn, rectilinear") {
    OneTurn s;
    const auto r = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
    REQUIRE(r.reached_goal);
    const auto& m = *r.trajectory.modes();
    std::vector<int> runs{m[0]};
    for (std::size_t i = 1; i < m.size(); ++i)
        if (m[i] != m[i - 1]) runs.push_back(m[i]);
    CHECK(runs == std::vector<int>{0, 1, 0});
}

TEST_CASE("turn law: psi gap against theta gap slope equals k_theta in the final half") {
    OneTurn s;
    for (double k : {1.76, 1.5, 2.2}) {
        s.agent.k_theta = k;
        s.agent.k_steer = k;
        const auto r = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
        const auto& tr = r.trajectory;
        const auto& m = *tr.modes();
        std::size_t b = 0, e = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] == 1) {
                if (!b) b = i;
                e = i;
            }
        REQUIRE(e > b);
        const std::span<const TrajectorySample> turn(tr.samples().data() + b, e - b + 1);
        const GoalRef g = s.agent.subgoals[0].ref();
        const auto psi = gap_series(turn, g, GapKind::psi);
        const auto th = gap_series(turn, g, GapKind::theta);
        const auto fit = fit_coupling(psi, th, 0.5, FitQuantity::gap);
        CHECK(std::abs(fit.k_hat - k) < 0.05);
    }
}

TEST_CASE("simulation is reproducible per seed and noise changes it") {
    OneTurn s;
    s.cfg.noise = ControlNoise::fraction(0.05, s.p);
    s.cfg.seed = 9;
    const auto a = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
    const auto b = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) CHECK(a.trajectory[i].state.x == b.trajectory[i].state.x);
    s.cfg.seed = 10;
    const auto c = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
    CHECK(c.trajectory[100].state.x != a.trajectory[100].state.x);
}

TEST_CASE("simulated samples satisfy the trajectory invariants") {
    OneTurn s;
    s.cfg.noise = ControlNoise::fraction(0.05, s.p);
    const auto r = run_tau_agent(s.ws, s.agent, s.p, s.cfg);
    CHECK_NOTHROW(r.trajectory.validate(s.p));
}

TEST_CASE("synthetic gaze: fixation is motionless, anticipation follows the path") {
    const Trajectory tr = testsupport::straight(600, 0.4, 2.0);
    Workspace ws;
    ws.bounds = {-100, -100, 100, 100};
    ws.goal = {{50, 50, 60, 60}, 0};
    ws.obstacles = {{{3, -5}, {5, -5}, {5, -3}, {3, -3}}};
    SUBCASE("all fixation") {
        const auto g = synth_gaze(tr, ws, {{GazeKind::cue, 5.0}}, 1);
        for (std::size_t i = 1; i < 250; ++i) {
            CHECK(g.samples[i].gx == g.samples[i - 1].gx);
            CHECK(g.samples[i].gy == g.samples[i - 1].gy);
        }
    }
    SUBCASE("anticipation on a straight segment") {
        GazeSynthOptions o;
        o.lookahead = 1.5;
        const auto g = synth_gaze(tr, ws, {{GazeKind::anticipation, 8.0}}, 1, o);
        for (std::size_t i = 1; i < 400; ++i) {
            const double h = std::atan2(g.samples[i].gy - g.samples[i - 1].gy, g.samples[i].gx - g.samples[i - 1].gx);
            CHECK(std::abs(angle_diff(h, 0.4)) < 1e-9);
            const Vec2 ahead = trajectory_position_at(tr, g.samples[i].t + 1.5);
            CHECK(std::hypot(ahead.x - g.samples[i].gx, ahead.y - g.samples[i].gy) < 1e-9);
        }
    }
    CHECK_THROWS_AS(synth_gaze(tr, ws, {{GazeKind::cue, 50.0}}, 1), ValidationError);
    CHECK_THROWS_AS(synth_gaze(tr, ws, {{GazeKind::saccade, 0.1}, {GazeKind::cue, 1.0}}, 1), ValidationError);
}
