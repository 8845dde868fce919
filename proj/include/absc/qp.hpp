#pragma once

#include <Eigen/Dense>

#include <optional>

namespace absc {

struct ProjectionResult {
    Eigen::VectorXd x;
    Eigen::VectorXd multipliers;  // one per row of G; zero for inactive rows
    int iterations = 0;
};

/// argmin ||x - x0||^2 subject to G x <= h, by the dual active-set method of Goldfarb and Idnani
/// (identity Hessian). Returns nullopt when the constraints are infeasible.
std::optional<ProjectionResult> project_polyhedron(const Eigen::VectorXd& x0, const Eigen::MatrixXd& G,
                                                   const Eigen::VectorXd& h, double tol = 1e-10,
                                                   int max_iter = 500);

}  // namespace absc
