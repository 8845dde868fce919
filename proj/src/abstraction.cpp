#include "absc/abstraction.hpp"

#include "absc/errors.hpp"
#include "absc/lp.hpp"

#include <cmath>

namespace absc {

namespace {

constexpr double kKinkTol = 1e-2;

int resolve_point(const ConcreteSystem& sys, const Obstacle& obs, const Eigen::Ref<const Eigen::VectorXd>& q,
                  int point_id) {
    if (point_id >= 0) {
        if (point_id >= sys.chain().n_points()) throw Error("control point id out of range");
        return point_id;
    }
    return distance(sys.chain(), q, obs).point_id;
}

double ddot_at(const ConcreteSystem& sys, const Obstacle& obs, const Eigen::Ref<const Eigen::VectorXd>& q,
               const Eigen::Ref<const Eigen::VectorXd>& qdot, int point_id) {
    return point_distance_gradient(sys, obs, q, point_id).dot(qdot);
}

}  // namespace

Eigen::RowVectorXd point_distance_gradient(const ConcreteSystem& sys, const Obstacle& obs,
                                           const Eigen::Ref<const Eigen::VectorXd>& q, int point_id) {
    const auto& chain = sys.chain();
    if (sys.jacobian_mode() == JacobianMode::Analytic) return distance_jacobian_analytic(chain, q, obs, point_id);
    Eigen::RowVectorXd grad(chain.n_q());
    Eigen::VectorXd qp = q;
    for (int a = 0; a < chain.n_q(); ++a) {
        qp(a) = q(a) + kJointStep;
        const double dp = point_distance(chain, qp, obs, point_id);
        qp(a) = q(a) - kJointStep;
        const double dm = point_distance(chain, qp, obs, point_id);
        qp(a) = q(a);
        grad(a) = (dp - dm) / (2.0 * kJointStep);
    }
    return grad;
}

AbstractionEval evaluate_abstraction(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                                     int point_id) {
    if (x.q.size() != sys.n_q() || x.qdot.size() != sys.n_q()) throw DimensionError("state dimension mismatch");
    AbstractionEval ev;
    const auto& chain = sys.chain();
    const ChainPose pose = chain_pose(chain, x.q);
    if (point_id < 0) {
        ev.d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < chain.n_points(); ++i) {
            const double di = (point_position(chain, pose, i) - obs.center).norm() - obs.radius;
            if (di < ev.d) {
                ev.d = di;
                ev.point_id = i;
            }
        }
    } else {
        ev.point_id = resolve_point(sys, obs, x.q, point_id);
        ev.d = (point_position(chain, pose, ev.point_id) - obs.center).norm() - obs.radius;
    }
    ev.Jd = point_distance_gradient(sys, obs, x.q, ev.point_id);
    ev.ddot = ev.Jd.dot(x.qdot);

    // off = (d/ds) ddot(q + s qdot, qdot) at s = 0: the drift part of dddot.
    if (x.qdot.squaredNorm() > 0.0) {
        const double h = kStateStep;
        const Eigen::VectorXd qp = x.q + h * x.qdot;
        const Eigen::VectorXd qm = x.q - h * x.qdot;
        ev.off = (ddot_at(sys, obs, qp, x.qdot, ev.point_id) - ddot_at(sys, obs, qm, x.qdot, ev.point_id)) / (2.0 * h);
    }
    ev.limits = affine_image_interval(ev.Jd, ev.off, sys.U());
    return ev;
}

AbstractState phi_map(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x) {
    const DistanceResult dr = distance(sys.chain(), x.q, obs);
    const Eigen::RowVectorXd Jd = point_distance_gradient(sys, obs, x.q, dr.point_id);
    return AbstractState{dr.d, Jd.dot(x.qdot)};
}

ControlTransform control_transform(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x) {
    const AbstractionEval ev = evaluate_abstraction(sys, obs, x);
    return ControlTransform{ev.Jd, ev.off};
}

Interval implementable_limits(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x) {
    const ControlTransform ct = control_transform(sys, obs, x);
    return affine_image_interval(ct.C, ct.off, sys.U());
}

double radius_from_interval(const Interval& phi_u, double eps) {
    if (phi_u.lo > -eps || phi_u.hi < eps)
        throw AssumptionViolation("0 is not strictly inside the implementable abstract control set [" +
                                  std::to_string(phi_u.lo) + ", " + std::to_string(phi_u.hi) + "]");
    return std::min(phi_u.hi, -phi_u.lo);
}

double compute_M(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x, double p) {
    (void)dual_norm_order(p);  // validates p; a scalar interval's inner radius does not depend on it
    return radius_from_interval(evaluate_abstraction(sys, obs, x).limits);
}

std::optional<Eigen::VectorXd> realize_abstract_control(const ConcreteSystem& sys, const ControlTransform& ct,
                                                        double v) {
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(sys.n_q());
    lp.A_ub = sys.U().A();
    lp.b_ub = sys.U().b();
    lp.A_eq = ct.C;
    lp.b_eq = Eigen::VectorXd::Constant(1, v - ct.off);
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    return sol.x;
}

bool check_zero_in_PhiU(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x) {
    return realize_abstract_control(sys, control_transform(sys, obs, x), 0.0).has_value();
}

Case2Margin case2_margin(const ConcreteSystem& sys, std::span<const WorldState> samples) {
    Case2Margin out;
    out.inradius = inner_ball_radius(sys.U(), 2.0);
    for (const auto& s : samples) {
        const ControlTransform ct = control_transform(sys, s.obstacle, s.x);
        const double cn = ct.C.norm();
        if (cn < 1e-12) {
            ++out.skipped;
            continue;
        }
        out.max_ratio = std::max(out.max_ratio, std::abs(ct.off) / cn);
    }
    out.margin = out.inradius - out.max_ratio;
    return out;
}

ExtendedAbstractState extended_map(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x, double p) {
    (void)dual_norm_order(p);
    const AbstractionEval ev = evaluate_abstraction(sys, obs, x);
    return ExtendedAbstractState{ev.d, ev.ddot, radius_from_interval(ev.limits)};
}

MGradient M_gradient(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x, int point_id, double h) {
    const int pid = resolve_point(sys, obs, x.q, point_id);
    const double m0 = evaluate_abstraction(sys, obs, x, pid).signed_radius();
    const int n = sys.n_x();
    MGradient out;
    out.grad.resize(n);
    Eigen::VectorXd xs = x.stacked();
    for (int i = 0; i < n; ++i) {
        const double xi = xs(i);
        xs(i) = xi + h;
        const double mp = evaluate_abstraction(sys, obs, ConcreteState::from_stacked(xs), pid).signed_radius();
        xs(i) = xi - h;
        const double mm = evaluate_abstraction(sys, obs, ConcreteState::from_stacked(xs), pid).signed_radius();
        xs(i) = xi;
        const double fwd = (mp - m0) / h;
        const double bwd = (m0 - mm) / h;
        const double scale = std::max({1.0, std::abs(fwd), std::abs(bwd)});
        if (std::abs(fwd - bwd) > kKinkTol * scale) {
            out.kink = true;
            ++out.kinked_coords;
            out.grad(i) = std::abs(fwd) >= std::abs(bwd) ? fwd : bwd;
        } else {
            out.grad(i) = (mp - mm) / (2.0 * h);
        }
    }
    return out;
}

Interval mdot_range_at(const ConcreteSystem& sys, const Obstacle&, const ConcreteState& x,
                       const Eigen::VectorXd& grad_M) {
    const int n = sys.n_q();
    if (grad_M.size() != 2 * n) throw DimensionError("mdot_range_at: gradient has wrong length");
    const double drift_part = grad_M.head(n).dot(x.qdot);
    return affine_image_interval(grad_M.tail(n).transpose(), drift_part, sys.U());
}

double mdot_max_at(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x) {
    return mdot_range_at(sys, obs, x, M_gradient(sys, obs, x).grad).hi;
}

AbstractionJacobian abstraction_jacobian(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                                         int point_id) {
    AbstractionJacobian out;
    out.eval = evaluate_abstraction(sys, obs, x, point_id);
    const int pid = out.eval.point_id;
    const int n = sys.n_q();

    out.dd_dx = Eigen::RowVectorXd::Zero(2 * n);
    out.dd_dx.head(n) = out.eval.Jd;

    out.dddot_dx.resize(2 * n);
    Eigen::VectorXd qp = x.q;
    for (int a = 0; a < n; ++a) {
        qp(a) = x.q(a) + kStateStep;
        const double fp = ddot_at(sys, obs, qp, x.qdot, pid);
        qp(a) = x.q(a) - kStateStep;
        const double fm = ddot_at(sys, obs, qp, x.qdot, pid);
        qp(a) = x.q(a);
        out.dddot_dx(a) = (fp - fm) / (2.0 * kStateStep);
    }
    out.dddot_dx.tail(n) = out.eval.Jd;
    out.dM_dx = M_gradient(sys, obs, x, pid);
    return out;
}

}  // namespace absc
