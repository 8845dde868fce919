#pragma once

#include "absc/dynamics.hpp"
#include "absc/geometry.hpp"
#include "absc/kinematics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace absc {

/// Finite-difference step per state coordinate for dM/dx and for the drift offset.
inline constexpr double kStateStep = 1e-5;
/// M must exceed this for 0 to count as strictly interior [m/s^2].
inline constexpr double kMInteriorEps = 1e-6;

/// z = (d, ddot). The abstract dynamics are zdot = (ddot, 0) + (0, 1)' v with v = dddot.
struct AbstractState {
    double d = 0.0;
    double ddot = 0.0;
};

struct ExtendedAbstractState {
    double d = 0.0;
    double ddot = 0.0;
    double M = 0.0;
};

/// v = C u + off.
struct ControlTransform {
    Eigen::RowVectorXd C;
    double off = 0.0;
};

/// A concrete state together with the obstacle it is measured against.
struct WorldState {
    ConcreteState x;
    Obstacle obstacle;
};

/// Abstraction quantities at one state, for one control point (the nearest unless pinned).
struct AbstractionEval {
    int point_id = 0;
    double d = 0.0;
    double ddot = 0.0;
    Eigen::RowVectorXd Jd;  // dd/dq, also C
    double off = 0.0;
    Interval limits;        // Phi_U(x)

    /// min(hi, -lo); negative when 0 lies outside Phi_U.
    double signed_radius() const { return std::min(limits.hi, -limits.lo); }
    bool zero_interior() const { return limits.lo < -kMInteriorEps && limits.hi > kMInteriorEps; }
};

/// point_id < 0 selects the nearest control point.
AbstractionEval evaluate_abstraction(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                                     int point_id = -1);

/// dd/dq of a pinned control point (analytic or central difference per the system's mode).
Eigen::RowVectorXd point_distance_gradient(const ConcreteSystem& sys, const Obstacle& obs,
                                           const Eigen::Ref<const Eigen::VectorXd>& q, int point_id);

AbstractState phi_map(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x);

ControlTransform control_transform(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x);

Interval implementable_limits(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x);

/// Inner radius of a scalar implementable set. Throws AssumptionViolation unless lo < -eps and hi > eps.
double radius_from_interval(const Interval& phi_u, double eps = kMInteriorEps);

double compute_M(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x, double p = 2.0);

/// LP feasibility of C u = -off over U.
bool check_zero_in_PhiU(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x);

/// Some u in U with C u + off = v, if one exists (LP).
std::optional<Eigen::VectorXd> realize_abstract_control(const ConcreteSystem& sys, const ControlTransform& ct,
                                                        double v);

struct Case2Margin {
    double margin = 0.0;  // > 0 certifies 0 in Phi_U on the samples
    double inradius = 0.0;
    double max_ratio = 0.0;
    std::size_t skipped = 0;  // samples with ||C|| < 1e-12
};

/// min_{u in bd U} ||u||_2 - max_x |off(x)| / ||C(x)||_2 over the samples.
Case2Margin case2_margin(const ConcreteSystem& sys, std::span<const WorldState> samples);

ExtendedAbstractState extended_map(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                                   double p = 2.0);

struct MGradient {
    Eigen::VectorXd grad;  // over stacked (q, qdot)
    bool kink = false;
    int kinked_coords = 0;
};

/// Central differences of the signed radius with the control point pinned. Where the one-sided
/// slopes disagree the larger-magnitude one is used and the kink is flagged.
MGradient M_gradient(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x, int point_id = -1,
                     double h = kStateStep);

/// Range of Mdot = grad M . (f + g u) over u in U.
Interval mdot_range_at(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                       const Eigen::VectorXd& grad_M);
double mdot_max_at(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x);

/// Rows of dz/dx and dM/dx at x for a pinned point; used by the online controller.
struct AbstractionJacobian {
    AbstractionEval eval;
    Eigen::RowVectorXd dd_dx;
    Eigen::RowVectorXd dddot_dx;
    MGradient dM_dx;
};

AbstractionJacobian abstraction_jacobian(const ConcreteSystem& sys, const Obstacle& obs, const ConcreteState& x,
                                         int point_id = -1);

}  // namespace absc
