#pragma once

#include "absc/controller.hpp"
#include "absc/dynamics.hpp"
#include "absc/geometry.hpp"
#include "absc/sampling.hpp"
#include "absc/synthesis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace absc {

struct Workspace {
    Eigen::Vector3d goal_center{0.0, 0.0, 0.333};  // goals uniform in a shell around this point
    Interval goal_radius{0.35, 0.7};
    double goal_z_min = 0.1;
    Eigen::Vector3d obstacle_lo{-0.8, -0.8, 0.0};
    Eigen::Vector3d obstacle_hi{0.8, 0.8, 1.1};
    Interval obstacle_radius{0.05, 0.15};
    double on_path_fraction = 0.5;  // share of scenarios with the obstacle on the start-goal segment
    double on_path_jitter = 0.03;   // [m] lateral jitter of on-path obstacles
    std::optional<StateBounds> q0_bounds;  // defaults to the system's q bounds
    int max_attempts_per_scenario = 200;
};

struct Scenario {
    Eigen::Vector3d goal = Eigen::Vector3d::Zero();
    Obstacle obstacle;
    Eigen::VectorXd q0;
    double duration = 10.0;
    double dt = 0.002;
    std::uint64_t seed = 0;
    bool on_path = false;
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::size_t rejections = 0;
};

/// Deterministic per-scenario substreams; rejects starts with phi0(x0) >= 0.
/// Throws ConfigError if more than 90% of draws are rejected.
ScenarioSet generate_scenarios(const ConcreteSystem& sys, std::size_t n, std::uint64_t seed, const Workspace& ws,
                               double duration, double dt, double d_min);

/// Scenarios whose obstacle sits on the start-goal segment (used for ablations).
ScenarioSet generate_on_path_scenarios(const ConcreteSystem& sys, std::size_t n, std::uint64_t seed,
                                       const Workspace& ws, double duration, double dt, double d_min);

struct TrialOptions {
    bool safety_enabled = true;
    std::ostream* trace = nullptr;  // CSV rows (t, q..., d, ddot, M, phi0, phi, qp_status)
    int trace_every = 1;
    double goal_tolerance = 0.03;
};

struct TrialReport {
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    double min_d = std::numeric_limits<double>::infinity();
    std::size_t collisions = 0;        // steps with phi0 > 0
    std::size_t infeasible_steps = 0;  // infeasible-relaxed QP steps
    std::size_t active_steps = 0;
    std::size_t reduced_steps = 0;     // steps where secondary point constraints were dropped
    std::size_t kink_steps = 0;
    std::size_t below_m_min_steps = 0;
    std::size_t violation_steps = 0;   // M <= 0 encountered
    bool goal_reached = false;
    double final_goal_error = 0.0;
    double m_lo = std::numeric_limits<double>::infinity();
    double m_hi = -std::numeric_limits<double>::infinity();
    double mdot_max = 0.0;             // |dM/dt| between steps with the same nearest point
    bool faulted = false;
    std::string fault;
    std::string trace_path;
};

TrialReport run_trial(const ConcreteSystem& sys, const SafetyIndex& index, const Scenario& scenario,
                      const ControllerParams& params, const TrialOptions& opts = {});

void write_trace_header(std::ostream& os, int n_q);

struct SuiteEntry {
    std::string name;
    ConcreteSystem sys;
    std::optional<SampleStats> stats;
};

struct SuiteRow {
    std::string name;
    std::size_t trials = 0;
    std::size_t collisions = 0;
    std::size_t infeasible_steps = 0;
    std::size_t goals_reached = 0;
    std::size_t faulted = 0;
    std::size_t below_m_min_steps = 0;
    std::size_t violation_steps = 0;
    double min_d = std::numeric_limits<double>::infinity();
    double m_lo = std::numeric_limits<double>::infinity();
    double m_hi = -std::numeric_limits<double>::infinity();
    double mdot_max = 0.0;
    std::optional<SampleStats> stats;
    std::vector<TrialReport> trials_detail;
};

struct SuiteOptions {
    std::size_t n_trials = 100;
    std::uint64_t seed = 7;
    double duration = 10.0;
    double dt = 0.002;
    int jobs = 1;
    bool safety_enabled = true;
    std::string trace_dir;  // empty: no traces
    int trace_every = 10;
};

/// Every entry sees scenarios drawn from the same seed, so rows do not depend on each other.
std::vector<SuiteRow> run_suite(const std::vector<SuiteEntry>& entries, const SafetyIndex& index,
                                const ControllerParams& params, const Workspace& ws, const SuiteOptions& opts);

}  // namespace absc
