#include "absc/controller.hpp"

#include "absc/errors.hpp"
#include "absc/lp.hpp"
#include "absc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace absc {

namespace {

ExtendedAbstractState extended_from_eval(const AbstractionEval& ev, bool& violation) {
    violation = !ev.zero_interior();
    return ExtendedAbstractState{ev.d, ev.ddot, std::max(ev.signed_radius(), kMInteriorEps)};
}

}  // namespace

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::Inactive: return "inactive";
        case QpStatus::Projected: return "projected";
        case QpStatus::InfeasibleRelaxed: return "infeasible-relaxed";
    }
    return "unknown";
}

int critical_point(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs, const ConcreteState& x) {
    int best = 0;
    double best_phi = -std::numeric_limits<double>::infinity();
    for (int pid = 0; pid < sys.chain().n_points(); ++pid) {
        const AbstractionEval ev = evaluate_abstraction(sys, obs, x, pid);
        bool violation = false;
        const double v = phi_star(extended_from_eval(ev, violation), index);
        if (v > best_phi) {
            best_phi = v;
            best = pid;
        }
    }
    return best;
}

PhidotCoefficients phidot_coefficients(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs,
                                       const ConcreteState& x, int point_id, Surface surface) {
    if (point_id < 0) point_id = critical_point(sys, index, obs, x);
    const AbstractionJacobian jac = abstraction_jacobian(sys, obs, x, point_id);
    PhidotCoefficients out;
    out.point_id = jac.eval.point_id;
    out.z = extended_from_eval(jac.eval, out.assumption_violation);
    out.value = evaluate_index(out.z, index);
    out.kink = jac.dM_dx.kink;

    const Eigen::Vector3d g =
        surface == Surface::PhiStar ? phi_star_gradient(out.z, index) : phi_hat_gradient(out.z, index).grad;
    const Eigen::RowVectorXd G = g(0) * jac.dd_dx + g(1) * jac.dddot_dx + g(2) * jac.dM_dx.grad.transpose();
    const int n = sys.n_q();
    out.a = G.tail(n);
    out.c = G.head(n).dot(x.qdot);
    return out;
}

std::optional<Eigen::VectorXd> project_box_halfspace(const Eigen::VectorXd& u0, const Eigen::RowVectorXd& a,
                                                     double rhs, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const Eigen::Index n = u0.size();
    auto clip_at = [&](double lambda) { return (u0 - lambda * a.transpose()).cwiseMax(lo).cwiseMin(hi).eval(); };

    const Eigen::VectorXd u0c = clip_at(0.0);
    const double s0 = a.dot(u0c);
    if (s0 <= rhs) return u0c;

    double s_min = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s_min += std::min(a(i) * lo(i), a(i) * hi(i));
    if (s_min > rhs) return std::nullopt;

    // a.clip(u0 - lambda a) is piecewise affine and nonincreasing in lambda
    std::vector<double> breaks;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i) == 0.0) continue;
        for (double b : {(u0(i) - lo(i)) / a(i), (u0(i) - hi(i)) / a(i)})
            if (b > 0.0) breaks.push_back(b);
    }
    std::sort(breaks.begin(), breaks.end());

    double lam_prev = 0.0, s_prev = s0;
    double lambda = breaks.empty() ? 0.0 : breaks.back();
    for (double lam : breaks) {
        if (lam <= lam_prev) continue;
        const double s = a.dot(clip_at(lam));
        if (s <= rhs) {
            lambda = lam_prev + (s_prev - rhs) / (s_prev - s) * (lam - lam_prev);
            break;
        }
        lam_prev = lam;
        s_prev = s;
    }
    return clip_at(lambda);
}

SafeControlResult safe_control(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs,
                               const ConcreteState& x, const Eigen::VectorXd& u0, const ControllerParams& params) {
    if (u0.size() != sys.n_q() || !u0.allFinite()) throw Error("safe_control: reference control must be finite");
    const int n = sys.n_q();
    const int np = sys.chain().n_points();
    const Eigen::VectorXd& lo = sys.u_min();
    const Eigen::VectorXd& hi = sys.u_max();

    SafeControlResult res;
    std::vector<double> star(static_cast<std::size_t>(np));
    int crit = 0;
    for (int i = 0; i < np; ++i) {
        bool violation = false;
        const ExtendedAbstractState z = extended_from_eval(evaluate_abstraction(sys, obs, x, i), violation);
        star[static_cast<std::size_t>(i)] = phi_star(z, index);
        if (star[static_cast<std::size_t>(i)] > star[static_cast<std::size_t>(crit)]) crit = i;
    }
    res.point_id = crit;
    const AbstractionEval ev = evaluate_abstraction(sys, obs, x, crit);
    const ExtendedAbstractState z = extended_from_eval(ev, res.assumption_violation);
    const IndexValue val = evaluate_index(z, index);
    res.phi_value = val.phi;
    res.phi_star_value = val.phi_star;
    res.d = z.d;
    res.M = z.M;
    res.below_m_min = val.below_m_min;

    // Points whose phi* is inside the band now, or would be after one step of the candidate control.
    std::vector<char> in(static_cast<std::size_t>(np), 0);
    for (int i = 0; i < np; ++i) in[static_cast<std::size_t>(i)] = star[static_cast<std::size_t>(i)] >= -params.trigger_band;
    auto admit_predicted = [&](const Eigen::VectorXd& u) {
        bool added = false;
        if (!(params.lookahead_s > 0.0)) return added;
        const ConcreteState x1 = step(sys, x, u, params.lookahead_s);
        for (int i = 0; i < np; ++i) {
            if (in[static_cast<std::size_t>(i)]) continue;
            bool violation = false;
            const ExtendedAbstractState z1 = extended_from_eval(evaluate_abstraction(sys, obs, x1, i), violation);
            if (phi_star(z1, index) >= -params.trigger_band) {
                in[static_cast<std::size_t>(i)] = 1;
                added = true;
            }
        }
        return added;
    };

    const Eigen::VectorXd u0c = clamp_to_U(sys, u0);
    admit_predicted(u0c);

    std::vector<int> rows;
    std::vector<PhidotCoefficients> coeffs;
    std::vector<double> etas;
    res.u = u0c;
    for (int round = 0; round <= np; ++round) {
        bool grew = false;
        for (int i = 0; i < np; ++i) {
            if (!in[static_cast<std::size_t>(i)] || std::find(rows.begin(), rows.end(), i) != rows.end()) continue;
            PhidotCoefficients pc = phidot_coefficients(sys, index, obs, x, i, Surface::PhiStar);
            double authority = 0.0;
            for (int j = 0; j < n; ++j) authority += std::abs(pc.a(j)) * std::max(std::abs(lo(j)), std::abs(hi(j)));
            res.kink = res.kink || pc.kink;
            res.assumption_violation = res.assumption_violation || pc.assumption_violation;
            rows.push_back(i);
            etas.push_back(params.eta_fraction * authority);
            coeffs.push_back(std::move(pc));
            grew = true;
        }
        if (!grew) break;

        // Constraints of lower-priority points are dropped (smallest phi* first) until the program is feasible;
        // the critical point's constraint is never dropped.
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return star[static_cast<std::size_t>(rows[a])] > star[static_cast<std::size_t>(rows[b])];
        });
        bool solved = false;
        for (std::size_t keep = order.size(); keep >= 1 && !solved; --keep) {
            const auto m = static_cast<Eigen::Index>(keep);
            Eigen::MatrixXd G(m + 2 * n, n);
            Eigen::VectorXd h(m + 2 * n);
            for (Eigen::Index r = 0; r < m; ++r) {
                const std::size_t k = order[static_cast<std::size_t>(r)];
                G.row(r) = coeffs[k].a;
                h(r) = -etas[k] - coeffs[k].c;
            }
            G.block(m, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
            h.segment(m, n) = hi;
            G.block(m + n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
            h.segment(m + n, n) = -lo;

            if (auto sol = project_polyhedron(u0c, G, h)) {
                res.u = sol->x.cwiseMax(lo).cwiseMin(hi);
                res.qp_status = QpStatus::Projected;
                res.n_dropped = static_cast<int>(order.size() - keep);
                solved = true;
            } else if (keep == 1) {
                // Minimize the critical constraint's violation over U.
                LinearProgram lp;
                lp.c = Eigen::VectorXd::Zero(n + 1);
                lp.c(n) = 1.0;
                lp.A_ub = Eigen::MatrixXd::Zero(1 + 2 * n, n + 1);
                lp.A_ub.leftCols(n) = G;
                lp.A_ub(0, n) = -1.0;
                lp.b_ub = h;
                const LpSolution sl = solve_lp(lp);
                if (sl.status != LpStatus::Optimal) throw NumericFault("safe_control: relaxed program failed");
                res.u = sl.x.head(n).cwiseMax(lo).cwiseMin(hi);
                res.qp_status = QpStatus::InfeasibleRelaxed;
                res.n_dropped = static_cast<int>(order.size() - 1);
            }
        }
        if (!solved) break;
        if (!admit_predicted(res.u)) break;
    }

    if (rows.empty()) {
        res.qp_status = QpStatus::Inactive;
        res.phidot_achieved = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.constraint_active = true;
    res.n_constraints = static_cast<int>(rows.size());
    res.phidot_achieved = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        res.phidot_achieved = std::max(res.phidot_achieved, coeffs[r].a.dot(res.u) + coeffs[r].c);
        res.eta = std::max(res.eta, etas[r]);
    }
    return res;
}

Eigen::VectorXd reference_controller(const ConcreteSystem& sys, const ConcreteState& x, const Eigen::Vector3d& goal,
                                     const ControllerParams& params) {
    const auto& chain = sys.chain();
    const ChainPose pose = chain_pose(chain, x.q);
    const Eigen::Vector3d p_ee = point_position(chain, pose, chain.ee_point());
    const auto J = point_jacobian(chain, pose, chain.ee_point());
    const Eigen::VectorXd u0 = params.kp * J.transpose() * (goal - p_ee) - params.kd * x.qdot;
    return clamp_to_U(sys, u0);
}

}  // namespace absc
