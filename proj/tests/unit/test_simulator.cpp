#include "absc/errors.hpp"
#include "absc/sampling.hpp"
#include "absc/simulator.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace absc;

namespace {

ConcreteSystem planar() { return test::make_system(test::planar_chain(1.0, 0.6)); }

SamplingDomain planar_domain() {
    SamplingDomain d;
    d.obstacle_lo = Eigen::Vector3d(-2.0, -2.0, 0.0);
    d.obstacle_hi = Eigen::Vector3d(2.0, 2.0, 0.0);
    d.radius = Interval(0.05, 0.15);
    d.d_range = Interval(0.0, 0.8);
    return d;
}

Workspace planar_workspace() {
    Workspace ws;
    ws.goal_center = Eigen::Vector3d::Zero();
    ws.goal_radius = Interval(0.6, 1.5);
    ws.goal_z_min = -1.0;
    ws.obstacle_lo = Eigen::Vector3d(-2.0, -2.0, 0.0);
    ws.obstacle_hi = Eigen::Vector3d(2.0, 2.0, 0.0);
    return ws;
}

/// Index synthesized from sampled statistics of the planar arm.
const SafetyIndex& verified_planar_index() {
    static const SafetyIndex idx = [] {
        SamplingOptions so;
        so.n_samples = 2000;
        const SampleStats st = estimate_stats(planar(), planar_domain(), so);
        SafetyIndex s;
        s.m_min = st.m_min;
        s.m_max = st.m_max;
        s.mdot_star = st.mdot_star;
        s.k = synthesize_k(s.ranges, s.d_min, s.m_min, s.mdot_star);
        return s;
    }();
    return idx;
}

Scenario planar_scenario(const Eigen::Vector3d& goal, const Obstacle& obs, double duration = 6.0) {
    Scenario sc;
    sc.goal = goal;
    sc.obstacle = obs;
    sc.q0 = Eigen::Vector2d(-0.6, 0.9);
    sc.duration = duration;
    sc.dt = 0.002;
    return sc;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("scenario generation is deterministic and starts safe") {
    const ConcreteSystem sys = planar();
    const ScenarioSet a = generate_scenarios(sys, 100, 3, planar_workspace(), 10.0, 0.002, 0.05);
    const ScenarioSet b = generate_scenarios(sys, 100, 3, planar_workspace(), 10.0, 0.002, 0.05);
    REQUIRE(a.scenarios.size() == 100);
    std::set<std::vector<double>> goals;
    int on_path = 0;
    for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
        const Scenario& s = a.scenarios[i];
        CHECK(s.q0 == b.scenarios[i].q0);
        CHECK(s.goal == b.scenarios[i].goal);
        CHECK(s.obstacle.center == b.scenarios[i].obstacle.center);
        CHECK(distance(sys.chain(), s.q0, s.obstacle).d > 0.05);
        CHECK(s.obstacle.radius >= 0.05);
        CHECK(s.obstacle.radius <= 0.15);
        if (!s.on_path) {
            CHECK((s.obstacle.center.array() >= planar_workspace().obstacle_lo.array()).all());
            CHECK((s.obstacle.center.array() <= planar_workspace().obstacle_hi.array()).all());
        }
        goals.insert({s.goal.x(), s.goal.y(), s.goal.z()});
        on_path += s.on_path;
    }
    CHECK(goals.size() == 100);
    CHECK(on_path > 20);
    CHECK(on_path < 80);
    const ScenarioSet c = generate_scenarios(sys, 100, 4, planar_workspace(), 10.0, 0.002, 0.05);
    for (const auto& s : c.scenarios) CHECK(goals.count({s.goal.x(), s.goal.y(), s.goal.z()}) == 0);
}

TEST_CASE("misconfigured workspace is rejected") {
    Workspace ws = planar_workspace();
    ws.goal_z_min = 5.0;  // no goal can satisfy this
    CHECK_THROWS_AS(generate_scenarios(planar(), 5, 1, ws, 10.0, 0.002, 0.05), ConfigError);
}

TEST_CASE("obstacle far away: unconstrained reach") {
    const Scenario sc = planar_scenario(Eigen::Vector3d(1.0, 0.6, 0.0), Obstacle{Eigen::Vector3d(-1.9, -1.9, 0.0), 0.05});
    const TrialReport r = run_trial(planar(), verified_planar_index(), sc, ControllerParams{});
    CHECK(r.collisions == 0);
    CHECK(r.infeasible_steps == 0);
    CHECK(r.goal_reached);
    CHECK_FALSE(r.faulted);
    CHECK(r.steps == 3000);
}

TEST_CASE("obstacle on the path: safe with the index, colliding without it") {
    const Eigen::Vector3d goal(0.9, 0.9, 0.0);
    // unconstrained run with the obstacle out of the way; the obstacle then goes where the arm passed
    TrialOptions probe;
    probe.safety_enabled = false;
    std::ostringstream path;
    probe.trace = &path;
    probe.trace_every = 250;
    run_trial(planar(), verified_planar_index(), planar_scenario(goal, Obstacle{Eigen::Vector3d(-1.9, -1.9, 0.0), 0.05}),
              ControllerParams{}, probe);
    std::istringstream rows(path.str());
    std::string line;
    for (int i = 0; i < 2; ++i) std::getline(rows, line);  // t = 0.5 s
    std::stringstream cells(line);
    std::string cell;
    Eigen::Vector2d q_mid;
    std::getline(cells, cell, ',');
    for (int i = 0; i < 2; ++i) {
        std::getline(cells, cell, ',');
        q_mid(i) = std::stod(cell);
    }
    const Obstacle obs{forward_points(planar().chain(), q_mid)[planar().chain().ee_point()], 0.1};
    const Scenario sc = planar_scenario(goal, obs);
    REQUIRE(distance(planar().chain(), sc.q0, obs).d > 0.2);

    std::ostringstream trace;
    write_trace_header(trace, 2);
    TrialOptions to;
    to.trace = &trace;
    to.trace_every = 1;
    const TrialReport safe = run_trial(planar(), verified_planar_index(), sc, ControllerParams{}, to);
    CHECK(safe.collisions == 0);
    CHECK(safe.infeasible_steps == 0);
    CHECK(safe.min_d > 0.05 - 1e-9);
    CHECK(safe.active_steps > 0);

    // min_d is consistent with the trace's d column (the trace omits the final state)
    std::istringstream in(trace.str());
    std::getline(in, line);
    CHECK(line == "t,q0,q1,d,ddot,M,phi0,phi,qp_status");
    double min_d = 1e9;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        for (int i = 0; i < 4; ++i) std::getline(ls, cell, ',');
        min_d = std::min(min_d, std::stod(cell));
    }
    CHECK(min_d == doctest::Approx(safe.min_d).epsilon(1e-6));

    TrialOptions off;
    off.safety_enabled = false;
    const TrialReport raw = run_trial(planar(), verified_planar_index(), sc, ControllerParams{}, off);
    CHECK(raw.min_d < 0.05);
    CHECK(raw.collisions > 0);
}

TEST_CASE("suite is deterministic, worker independent and isolated per entry") {
    const ConcreteSystem a = planar();
    const ConcreteSystem b = test::make_system(test::planar_chain(1.0, 0.8));
    const std::vector<SuiteEntry> both{{"a", a, std::nullopt}, {"b", b, std::nullopt}};
    const std::vector<SuiteEntry> only_a{{"a", a, std::nullopt}};
    SuiteOptions so;
    so.n_trials = 6;
    so.duration = 2.0;
    const auto r1 = run_suite(both, verified_planar_index(), ControllerParams{}, planar_workspace(), so);
    so.jobs = 3;
    const auto r2 = run_suite(both, verified_planar_index(), ControllerParams{}, planar_workspace(), so);
    const auto r3 = run_suite(only_a, verified_planar_index(), ControllerParams{}, planar_workspace(), so);
    REQUIRE(r1.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(r1[i].min_d == r2[i].min_d);
        CHECK(r1[i].m_lo == r2[i].m_lo);
        CHECK(r1[i].mdot_max == r2[i].mdot_max);
        CHECK(r1[i].collisions == r2[i].collisions);
    }
    CHECK(r3[0].min_d == r1[0].min_d);
    CHECK(r3[0].m_hi == r1[0].m_hi);
    CHECK(r1[0].collisions == 0);
    CHECK(r1[0].infeasible_steps == 0);
}

TEST_CASE("observed M stays within the sampled range up to sampling error") {
    SamplingOptions so;
    so.n_samples = 4000;
    const SampleStats st = estimate_stats(planar(), planar_domain(), so);
    SuiteOptions opts;
    opts.n_trials = 10;
    opts.duration = 3.0;
    const auto rows = run_suite({{"planar", planar(), st}}, verified_planar_index(), ControllerParams{},
                                planar_workspace(), opts);
    CHECK(rows[0].m_hi <= 1.05 * st.m_max);
    CHECK(rows[0].m_lo >= 0.0);
    CHECK(rows[0].stats.has_value());
}

TEST_CASE("traces are written per trial") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "absc_trace_test";
    std::filesystem::remove_all(dir);
    SuiteOptions so;
    so.n_trials = 2;
    so.duration = 0.2;
    so.trace_dir = dir.string();
    run_suite({{"planar", planar(), std::nullopt}}, verified_planar_index(), ControllerParams{}, planar_workspace(), so);
    CHECK(std::filesystem::exists(dir / "planar" / "trial_0.csv"));
    CHECK(std::filesystem::exists(dir / "planar" / "trial_1.csv"));
    std::ifstream in(dir / "planar" / "trial_1.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,q0,q1,d,ddot,M,phi0,phi,qp_status");
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
