#include "absc/qp.hpp"

#include "absc/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace absc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Null-space projector and pseudo-inverse rows of the active normals.
struct ActiveFactor {
    Eigen::MatrixXd P;     // I - N (N'N)^-1 N'
    Eigen::MatrixXd Ninv;  // (N'N)^-1 N'
};

ActiveFactor factor(const Eigen::MatrixXd& G, const std::vector<int>& active, Eigen::Index n) {
    ActiveFactor f;
    if (active.empty()) {
        f.P = Eigen::MatrixXd::Identity(n, n);
        f.Ninv.resize(0, n);
        return f;
    }
    Eigen::MatrixXd N(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) N.col(static_cast<Eigen::Index>(j)) = G.row(active[j]).transpose();
    f.Ninv = (N.transpose() * N).ldlt().solve(N.transpose());
    f.P = Eigen::MatrixXd::Identity(n, n) - N * f.Ninv;
    return f;
}

}  // namespace

std::optional<ProjectionResult> project_polyhedron(const Eigen::VectorXd& x0, const Eigen::MatrixXd& G,
                                                   const Eigen::VectorXd& h, double tol, int max_iter) {
    const Eigen::Index n = x0.size();
    const Eigen::Index m = G.rows();
    if (G.cols() != n || h.size() != m) throw DimensionError("project_polyhedron: dimension mismatch");

    ProjectionResult res;
    res.x = x0;
    res.multipliers = Eigen::VectorXd::Zero(m);
    std::vector<int> active;
    std::vector<double> lambda;

    for (int it = 0; it < max_iter; ++it) {
        // most violated constraint, scaled by row norm
        int p = -1;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double nrm = G.row(i).norm();
            if (nrm == 0.0) {
                if (h(i) < -tol) return std::nullopt;
                continue;
            }
            const double viol = (G.row(i).dot(res.x) - h(i)) / nrm;
            if (viol > tol * std::max(1.0, std::abs(h(i)) / nrm) && viol > worst) {
                worst = viol;
                p = static_cast<int>(i);
            }
        }
        if (p < 0) {
            for (std::size_t j = 0; j < active.size(); ++j) res.multipliers(active[j]) = lambda[j];
            res.iterations = it;
            return res;
        }

        double lambda_p = 0.0;
        for (int inner = 0; inner < max_iter; ++inner) {
            const Eigen::VectorXd np = G.row(p).transpose();
            const ActiveFactor f = factor(G, active, n);
            const Eigen::VectorXd z = f.P * np;  // primal step direction (x moves along -z)
            const Eigen::VectorXd r = f.Ninv * np;

            double t1 = kInf;
            int block = -1;
            for (std::size_t j = 0; j < active.size(); ++j) {
                if (r(static_cast<Eigen::Index>(j)) > tol) {
                    const double t = lambda[j] / r(static_cast<Eigen::Index>(j));
                    if (t < t1) {
                        t1 = t;
                        block = static_cast<int>(j);
                    }
                }
            }
            const double s = np.dot(res.x) - h(p);
            const double zz = z.dot(np);
            const double t2 = zz > tol * np.squaredNorm() ? s / zz : kInf;
            const double t = std::min(t1, t2);
            if (!std::isfinite(t)) return std::nullopt;  // no dual direction: infeasible

            if (std::isfinite(t2)) res.x -= t * z;
            for (std::size_t j = 0; j < active.size(); ++j) lambda[j] -= t * r(static_cast<Eigen::Index>(j));
            lambda_p += t;

            if (t == t2) {
                active.push_back(p);
                lambda.push_back(lambda_p);
                break;
            }
            active.erase(active.begin() + block);
            lambda.erase(lambda.begin() + block);
        }
    }
    throw NumericFault("project_polyhedron: iteration limit reached");
}

}  // namespace absc
