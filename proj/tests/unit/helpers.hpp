#pragma once

#include "absc/dynamics.hpp"
#include "absc/kinematics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace absc::test {

/// One revolute joint about z at the origin, control point at (1, 0, 0) on it.
inline KinematicChain one_joint_chain() {
    return KinematicChain({Joint{"j0", Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero()}},
                          {ControlPoint{"tip", 0, Eigen::Vector3d(1.0, 0.0, 0.0)}});
}

/// Planar arm with link lengths (l1, l2); the tip is the only control point unless with_elbow.
inline KinematicChain planar_chain(double l1 = 1.0, double l2 = 1.0, bool with_elbow = false) {
    std::vector<ControlPoint> pts;
    if (with_elbow) pts.push_back(ControlPoint{"elbow", 1, Eigen::Vector3d::Zero()});
    pts.push_back(ControlPoint{"tip", 1, Eigen::Vector3d(l2, 0.0, 0.0)});
    KinematicChain c({Joint{"j0", Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero()},
                      Joint{"j1", Eigen::Vector3d::UnitZ(), Eigen::Vector3d(l1, 0.0, 0.0)}},
                     pts);
    c.set_ee_point(static_cast<int>(pts.size()) - 1);
    return c;
}

/// A small spatial 4-joint chain with two control points, used for generic-pose checks.
inline KinematicChain spatial_chain() {
    return KinematicChain({Joint{"j0", Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero()},
                           Joint{"j1", Eigen::Vector3d::UnitY(), Eigen::Vector3d(0.0, 0.0, 0.3)},
                           Joint{"j2", Eigen::Vector3d::UnitY(), Eigen::Vector3d(0.0, 0.0, 0.35)},
                           Joint{"j3", Eigen::Vector3d::UnitX(), Eigen::Vector3d(0.3, 0.0, 0.0)}},
                          {ControlPoint{"mid", 2, Eigen::Vector3d(0.15, 0.0, 0.0)},
                           ControlPoint{"tip", 3, Eigen::Vector3d(0.1, 0.05, 0.0)}});
}

inline StateBounds uniform_bounds(int n, double q_lo, double q_hi, double qdot_max) {
    return StateBounds{Eigen::VectorXd::Constant(n, q_lo), Eigen::VectorXd::Constant(n, q_hi),
                       Eigen::VectorXd::Constant(n, -qdot_max), Eigen::VectorXd::Constant(n, qdot_max)};
}

inline ConcreteSystem make_system(const KinematicChain& chain, double umax = 10.0, double q_lo = -M_PI,
                                  double q_hi = M_PI, double qdot_max = 1.0,
                                  JacobianMode mode = JacobianMode::Analytic) {
    const int n = chain.n_q();
    return ConcreteSystem(chain, Polytope::symmetric_box(Eigen::VectorXd::Constant(n, umax)),
                          uniform_bounds(n, q_lo, q_hi, qdot_max), mode);
}

inline Eigen::VectorXd uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

}  // namespace absc::test
