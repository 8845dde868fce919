#include "absc/simulator.hpp"

#include "absc/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace absc {

namespace {

Eigen::Vector3d uniform_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::Vector3d p;
    for (int i = 0; i < 3; ++i) p(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    return p;
}

ScenarioSet generate(const ConcreteSystem& sys, std::size_t n, std::uint64_t seed, const Workspace& ws,
                     double duration, double dt, double d_min, double on_path_fraction) {
    if (n < 1) throw Error("generate_scenarios: n must be >= 1");
    const StateBounds& qb = ws.q0_bounds ? *ws.q0_bounds : sys.bounds();
    if (qb.q_lo.size() != sys.n_q()) throw DimensionError("workspace q0 bounds do not match the system");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    ScenarioSet out;
    std::size_t attempts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = substream(seed, i);
        bool accepted = false;
        for (int a = 0; a < ws.max_attempts_per_scenario && !accepted; ++a) {
            ++attempts;
            Scenario sc;
            sc.seed = seed;
            sc.duration = duration;
            sc.dt = dt;

            Eigen::Vector3d dir(normal(rng), normal(rng), normal(rng));
            dir.normalize();
            sc.goal = ws.goal_center + (ws.goal_radius.lo + ws.goal_radius.width() * unit(rng)) * dir;

            sc.q0.resize(sys.n_q());
            for (int j = 0; j < sys.n_q(); ++j) sc.q0(j) = qb.q_lo(j) + (qb.q_hi(j) - qb.q_lo(j)) * unit(rng);

            sc.on_path = unit(rng) < on_path_fraction;
            if (sc.on_path) {
                const auto pts = forward_points(sys.chain(), sc.q0);
                const Eigen::Vector3d start = pts[static_cast<std::size_t>(sys.chain().ee_point())];
                const double t = 0.35 + 0.3 * unit(rng);
                const Eigen::Vector3d jitter = uniform_in_box(Eigen::Vector3d::Constant(-ws.on_path_jitter),
                                                              Eigen::Vector3d::Constant(ws.on_path_jitter), rng);
                sc.obstacle.center = start + t * (sc.goal - start) + jitter;
            } else {
                sc.obstacle.center = uniform_in_box(ws.obstacle_lo, ws.obstacle_hi, rng);
            }
            sc.obstacle.radius = ws.obstacle_radius.lo + ws.obstacle_radius.width() * unit(rng);

            if (sc.goal.z() < ws.goal_z_min) {
                ++out.rejections;
                continue;
            }
            // start safe: phi0(x0) < 0
            if (distance(sys.chain(), sc.q0, sc.obstacle).d <= d_min) {
                ++out.rejections;
                continue;
            }
            out.scenarios.push_back(std::move(sc));
            accepted = true;
        }
        if (!accepted) throw ConfigError("scenario " + std::to_string(i) + ": no valid draw; workspace misconfigured");
    }
    if (static_cast<double>(out.rejections) > 0.9 * static_cast<double>(attempts))
        throw ConfigError("scenario generation rejected more than 90% of draws; workspace misconfigured");
    return out;
}

}  // namespace

ScenarioSet generate_scenarios(const ConcreteSystem& sys, std::size_t n, std::uint64_t seed, const Workspace& ws,
                               double duration, double dt, double d_min) {
    return generate(sys, n, seed, ws, duration, dt, d_min, ws.on_path_fraction);
}

ScenarioSet generate_on_path_scenarios(const ConcreteSystem& sys, std::size_t n, std::uint64_t seed,
                                       const Workspace& ws, double duration, double dt, double d_min) {
    return generate(sys, n, seed, ws, duration, dt, d_min, 1.0);
}

void write_trace_header(std::ostream& os, int n_q) {
    os << "t";
    for (int i = 0; i < n_q; ++i) os << ",q" << i;
    os << ",d,ddot,M,phi0,phi,qp_status\n";
}

TrialReport run_trial(const ConcreteSystem& sys, const SafetyIndex& index, const Scenario& scenario,
                      const ControllerParams& params, const TrialOptions& opts) {
    TrialReport rep;
    rep.seed = scenario.seed;
    if (!(scenario.dt > 0.0) || !(scenario.duration > 0.0)) throw Error("run_trial: dt and duration must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));

    ControllerParams ctrl = params;
    if (ctrl.lookahead_s > 0.0) ctrl.lookahead_s = scenario.dt;  // one control period
    ConcreteState x{scenario.q0, Eigen::VectorXd::Zero(sys.n_q())};
    int prev_point = -1;
    double prev_M = 0.0;
    if (opts.trace) opts.trace->precision(12);

    auto observe = [&](double d, double M, int point, bool violation) {
        rep.min_d = std::min(rep.min_d, d);
        if (phi0(d, index) > 0.0) ++rep.collisions;
        if (violation) {
            ++rep.violation_steps;
            prev_point = -1;
            return;
        }
        rep.m_lo = std::min(rep.m_lo, M);
        rep.m_hi = std::max(rep.m_hi, M);
        if (point == prev_point) rep.mdot_max = std::max(rep.mdot_max, std::abs(M - prev_M) / scenario.dt);
        prev_point = point;
        prev_M = M;
    };

    try {
        for (std::size_t s = 0; s < n_steps; ++s) {
            const Eigen::VectorXd u0 = reference_controller(sys, x, scenario.goal, ctrl);
            const AbstractionEval ev = evaluate_abstraction(sys, scenario.obstacle, x);
            const bool violation = !ev.zero_interior();
            const double M = std::max(ev.signed_radius(), kMInteriorEps);
            observe(ev.d, M, ev.point_id, violation);

            Eigen::VectorXd u = u0;
            QpStatus status = QpStatus::Inactive;
            double phi_val = phi(ExtendedAbstractState{ev.d, ev.ddot, M}, index);
            if (opts.safety_enabled) {
                const SafeControlResult res = safe_control(sys, index, scenario.obstacle, x, u0, ctrl);
                u = res.u;
                status = res.qp_status;
                phi_val = res.phi_value;
                if (res.constraint_active) ++rep.active_steps;
                if (res.kink) ++rep.kink_steps;
                if (res.n_dropped > 0) ++rep.reduced_steps;
                if (res.below_m_min) ++rep.below_m_min_steps;
                if (status == QpStatus::InfeasibleRelaxed) {
                    ++rep.infeasible_steps;
                    spdlog::debug("infeasible-relaxed at t={:.4f}: point {} d={:.4f} M={:.5g} phi*={:.5g}, {} constraints, "
                                  "worst phidot {:.5g}, eta {:.5g}",
                                  static_cast<double>(s) * scenario.dt, res.point_id, res.d, res.M,
                                  res.phi_star_value, res.n_constraints, res.phidot_achieved, res.eta);
                }
            }

            if (opts.trace && s % static_cast<std::size_t>(std::max(1, opts.trace_every)) == 0) {
                auto& os = *opts.trace;
                os << static_cast<double>(s) * scenario.dt;
                for (int i = 0; i < sys.n_q(); ++i) os << ',' << x.q(i);
                os << ',' << ev.d << ',' << ev.ddot << ',' << M << ',' << phi0(ev.d, index) << ',' << phi_val << ','
                   << to_string(status) << '\n';
            }

            x = step(sys, x, u, scenario.dt);
            ++rep.steps;
        }
        const AbstractionEval ev = evaluate_abstraction(sys, scenario.obstacle, x);
        observe(ev.d, std::max(ev.signed_radius(), kMInteriorEps), ev.point_id, !ev.zero_interior());
    } catch (const NumericFault& e) {
        rep.faulted = true;
        rep.fault = e.what();
    }

    const auto pts = forward_points(sys.chain(), x.q);
    rep.final_goal_error = (pts[static_cast<std::size_t>(sys.chain().ee_point())] - scenario.goal).norm();
    rep.goal_reached = !rep.faulted && rep.final_goal_error < opts.goal_tolerance;
    return rep;
}

std::vector<SuiteRow> run_suite(const std::vector<SuiteEntry>& entries, const SafetyIndex& index,
                                const ControllerParams& params, const Workspace& ws, const SuiteOptions& opts) {
    std::vector<SuiteRow> rows;
    for (const auto& entry : entries) {
        const ScenarioSet set =
            generate_scenarios(entry.sys, opts.n_trials, opts.seed, ws, opts.duration, opts.dt, index.d_min);
        SuiteRow row;
        row.name = entry.name;
        row.stats = entry.stats;
        row.trials = set.scenarios.size();
        row.trials_detail.resize(set.scenarios.size());

        std::filesystem::path dir;
        if (!opts.trace_dir.empty()) {
            dir = std::filesystem::path(opts.trace_dir) / entry.name;
            std::filesystem::create_directories(dir);
        }

        parallel_for(set.scenarios.size(), opts.jobs, [&](std::size_t i) {
            TrialOptions to;
            to.safety_enabled = opts.safety_enabled;
            to.trace_every = opts.trace_every;
            std::ofstream trace;
            std::string trace_path;
            if (!dir.empty()) {
                trace_path = (dir / ("trial_" + std::to_string(i) + ".csv")).string();
                trace.open(trace_path);
                write_trace_header(trace, entry.sys.n_q());
                to.trace = &trace;
            }
            TrialReport rep = run_trial(entry.sys, index, set.scenarios[i], params, to);
            rep.trace_path = trace_path;
            row.trials_detail[i] = std::move(rep);
        });

        for (const auto& t : row.trials_detail) {
            row.collisions += t.collisions;
            row.infeasible_steps += t.infeasible_steps;
            row.goals_reached += t.goal_reached ? 1 : 0;
            row.faulted += t.faulted ? 1 : 0;
            row.below_m_min_steps += t.below_m_min_steps;
            row.violation_steps += t.violation_steps;
            row.min_d = std::min(row.min_d, t.min_d);
            row.m_lo = std::min(row.m_lo, t.m_lo);
            row.m_hi = std::max(row.m_hi, t.m_hi);
            row.mdot_max = std::max(row.mdot_max, t.mdot_max);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace absc
