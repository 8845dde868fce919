#pragma once

#include "absc/abstraction.hpp"
#include "absc/dynamics.hpp"
#include "absc/synthesis.hpp"

#include <Eigen/Dense>

namespace absc {

struct ControllerParams {
    double eta_fraction = 0.02;  // eta = eta_fraction * max_{u in U} |a u|
    double trigger_band = 0.01;  // constraint enforced once phi* >= -trigger_band
    double kp = 20.0;            // reference attraction gain [1/s^2 per m/rad]
    double kd = 6.0;             // reference joint damping [1/s]
    double lookahead_s = 0.002;  // also trigger if one step of u0 would enter the band (0 disables)
};

/// phidot(x, u) = a u + c.
struct PhidotCoefficients {
    Eigen::RowVectorXd a;
    double c = 0.0;
    ExtendedAbstractState z;
    IndexValue value;
    bool kink = false;                  // one-sided dM/dx used somewhere
    bool assumption_violation = false;  // M <= 0; M floored at kMInteriorEps
    int point_id = 0;
};

/// Control point with the largest phi* (ties go to the lowest id). max_i phi*_i is continuous in x,
/// unlike the index evaluated at the nearest point, which jumps when the nearest point changes.
int critical_point(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs, const ConcreteState& x);

/// Active: derivative of phi = max(phi0, phi*) on its active branch.
/// PhiStar: derivative of phi* alone. The phi0 branch has relative degree two (its derivative
/// does not depend on u), so the safe controller constrains phi*.
enum class Surface { Active, PhiStar };

/// Chain rule (dphi/dz dz/dx + dphi/dM dM/dx)(f + g u) at x for one control point
/// (point_id < 0 selects critical_point).
PhidotCoefficients phidot_coefficients(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs,
                                       const ConcreteState& x, int point_id = -1,
                                       Surface surface = Surface::Active);

enum class QpStatus { Inactive, Projected, InfeasibleRelaxed };

const char* to_string(QpStatus s);

struct SafeControlResult {
    Eigen::VectorXd u;
    bool constraint_active = false;
    QpStatus qp_status = QpStatus::Inactive;
    double phi_value = 0.0;
    double phi_star_value = 0.0;
    double phidot_achieved = 0.0;  // max over constrained points of a u + c (phi*); NaN when inactive
    double eta = 0.0;              // largest margin demanded
    int n_constraints = 0;         // control points constrained this step
    int n_dropped = 0;             // of those, constraints dropped to keep the program feasible
    double d = 0.0;
    double M = 0.0;
    bool kink = false;
    bool below_m_min = false;
    bool assumption_violation = false;
    int point_id = 0;
};

/// min ||u - u0||^2 over u in U (box) subject to a u <= rhs. Exact: u = clamp(u0 - lambda a).
/// Returns nullopt when no u in U satisfies the halfspace.
std::optional<Eigen::VectorXd> project_box_halfspace(const Eigen::VectorXd& u0, const Eigen::RowVectorXd& a,
                                                     double rhs, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// Projects u0 onto {u in U : phidot*_i(x, u) <= -eta_i} for every control point i whose phi* is
/// within the trigger band now or after one lookahead step. If that set is empty, constraints of the least
/// critical points are dropped one at a time; if the critical point alone is infeasible, the control minimizing
/// its violation is returned (InfeasibleRelaxed).
SafeControlResult safe_control(const ConcreteSystem& sys, const SafetyIndex& index, const Obstacle& obs,
                               const ConcreteState& x, const Eigen::VectorXd& u0, const ControllerParams& params);

/// u0 = kp J' (goal - p_ee) - kd qdot, clamped to U.
Eigen::VectorXd reference_controller(const ConcreteSystem& sys, const ConcreteState& x, const Eigen::Vector3d& goal,
                                     const ControllerParams& params);

}  // namespace absc
