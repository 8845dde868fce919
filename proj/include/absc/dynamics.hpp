#pragma once

#include "absc/geometry.hpp"
#include "absc/kinematics.hpp"

#include <Eigen/Dense>

#include <random>

namespace absc {

/// x = (q, qdot).
struct ConcreteState {
    Eigen::VectorXd q;
    Eigen::VectorXd qdot;

    Eigen::VectorXd stacked() const;
    static ConcreteState from_stacked(const Eigen::Ref<const Eigen::VectorXd>& x);
};

/// Box over (q, qdot) defining the state set X.
struct StateBounds {
    Eigen::VectorXd q_lo, q_hi;
    Eigen::VectorXd qdot_lo, qdot_hi;
};

enum class JacobianMode { Analytic, FiniteDifference };

/// Kinematic double integrator xdot = f(x) + g(x) u with u = qddot constrained to a box U.
class ConcreteSystem {
public:
    ConcreteSystem(KinematicChain chain, Polytope U, StateBounds bounds,
                   JacobianMode mode = JacobianMode::Analytic);

    const KinematicChain& chain() const { return chain_; }
    const Polytope& U() const { return U_; }
    const StateBounds& bounds() const { return bounds_; }
    JacobianMode jacobian_mode() const { return mode_; }
    int n_q() const { return chain_.n_q(); }
    int n_x() const { return 2 * chain_.n_q(); }
    const Eigen::VectorXd& u_max() const { return U_.box_hi(); }
    const Eigen::VectorXd& u_min() const { return U_.box_lo(); }

    ConcreteSystem with_control_limits(Polytope U) const;

private:
    KinematicChain chain_;
    Polytope U_;
    StateBounds bounds_;
    JacobianMode mode_;
};

Eigen::VectorXd drift(const ConcreteSystem& sys, const ConcreteState& x);
Eigen::MatrixXd input_matrix(const ConcreteSystem& sys, const ConcreteState& x);
Eigen::VectorXd state_derivative(const ConcreteSystem& sys, const ConcreteState& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& u);

Eigen::VectorXd clamp_to_U(const ConcreteSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Semi-implicit Euler. u outside U is clamped (debug log). Throws NumericFault on non-finite results.
ConcreteState step(const ConcreteSystem& sys, const ConcreteState& x, const Eigen::Ref<const Eigen::VectorXd>& u,
                   double dt);

/// Uniform draw over the state box.
ConcreteState sample_state(const ConcreteSystem& sys, std::mt19937_64& rng);

}  // namespace absc
