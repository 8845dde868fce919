#pragma once

#include <Eigen/Dense>

namespace absc {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x free.
/// Either constraint block may have zero rows.
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd A_ub;
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
    int iterations = 0;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// (tens of variables) programs that appear in this library.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace absc
