#include "absc/lp.hpp"

#include "absc/errors.hpp"

#include <vector>

namespace absc {

namespace {

class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : T_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

    Eigen::MatrixXd& T() { return T_; }
    std::vector<Eigen::Index>& basis() { return basis_; }
    Eigen::Index m() const { return T_.rows() - 1; }
    Eigen::Index n() const { return T_.cols() - 1; }
    Eigen::Index rhs() const { return T_.cols() - 1; }

    void pivot(Eigen::Index r, Eigen::Index col) {
        T_.row(r) /= T_(r, col);
        for (Eigen::Index i = 0; i < T_.rows(); ++i) {
            if (i == r) continue;
            const double f = T_(i, col);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = col;
    }

    // Bland's rule. Columns >= allowed_cols never enter.
    LpStatus run(Eigen::Index allowed_cols, double tol, int& iterations) {
        const Eigen::Index obj = m();
        for (;;) {
            if (++iterations > 50000) throw NumericFault("simplex iteration limit exceeded");
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed_cols; ++j) {
                if (T_(obj, j) < -tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;

            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index i = 0; i < obj; ++i) {
                const double a = T_(i, enter);
                if (a <= tol) continue;
                const double ratio = T_(i, rhs()) / a;
                if (leave < 0 || ratio < best - 1e-12 ||
                    (ratio <= best + 1e-12 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
    }

private:
    Eigen::MatrixXd T_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol) {
    const Eigen::Index n = lp.c.size();
    const Eigen::Index m_ub = lp.A_ub.rows();
    const Eigen::Index m_eq = lp.A_eq.rows();
    if ((m_ub > 0 && lp.A_ub.cols() != n) || (m_eq > 0 && lp.A_eq.cols() != n) || lp.b_ub.size() != m_ub ||
        lp.b_eq.size() != m_eq) {
        throw DimensionError("solve_lp: inconsistent problem dimensions");
    }

    // Columns: x+ (n) | x- (n) | slacks (m_ub) | artificials (n_art) | rhs
    std::vector<bool> needs_art(static_cast<std::size_t>(m_ub + m_eq), false);
    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < m_ub; ++i) {
        if (lp.b_ub(i) < 0.0) {
            needs_art[static_cast<std::size_t>(i)] = true;
            ++n_art;
        }
    }
    for (Eigen::Index i = 0; i < m_eq; ++i) {
        needs_art[static_cast<std::size_t>(m_ub + i)] = true;
        ++n_art;
    }

    const Eigen::Index m = m_ub + m_eq;
    const Eigen::Index art0 = 2 * n + m_ub;
    const Eigen::Index cols = art0 + n_art;
    Tableau tab(m, cols);
    auto& T = tab.T();
    auto& basis = tab.basis();

    Eigen::Index next_art = art0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const bool is_ub = i < m_ub;
        Eigen::RowVectorXd a = is_ub ? Eigen::RowVectorXd(lp.A_ub.row(i)) : Eigen::RowVectorXd(lp.A_eq.row(i - m_ub));
        double b = is_ub ? lp.b_ub(i) : lp.b_eq(i - m_ub);
        double slack_sign = 1.0;
        if (b < 0.0) {
            a = -a;
            b = -b;
            slack_sign = -1.0;
        }
        T.block(i, 0, 1, n) = a;
        T.block(i, n, 1, n) = -a;
        if (is_ub) T(i, 2 * n + i) = slack_sign;
        T(i, cols) = b;
        if (needs_art[static_cast<std::size_t>(i)]) {
            T(i, next_art) = 1.0;
            basis[static_cast<std::size_t>(i)] = next_art++;
        } else {
            basis[static_cast<std::size_t>(i)] = 2 * n + i;
        }
    }

    LpSolution sol;
    const double scale = 1.0 + (m > 0 ? T.col(cols).head(m).cwiseAbs().maxCoeff() : 0.0);

    // Phase 1: minimise the sum of artificials.
    if (n_art > 0) {
        for (Eigen::Index j = art0; j < cols; ++j) T(m, j) = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] >= art0) T.row(m) -= T.row(i);
        }
        tab.run(cols, tol, sol.iterations);
        if (-T(m, cols) > tol * scale * 10.0) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Pivot remaining zero-level artificials out; rows with no candidate are redundant.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] < art0) continue;
            for (Eigen::Index j = 0; j < art0; ++j) {
                if (std::abs(T(i, j)) > tol) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
    }

    // Phase 2.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    cost.head(n) = lp.c;
    cost.segment(n, n) = -lp.c;
    T.row(m).setZero();
    T.row(m).head(cols) = cost.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double cb = cost(basis[static_cast<std::size_t>(i)]);
        if (cb != 0.0) T.row(m) -= cb * T.row(i);
    }
    if (tab.run(art0, tol, sol.iterations) == LpStatus::Unbounded) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    Eigen::VectorXd full = Eigen::VectorXd::Zero(cols);
    for (Eigen::Index i = 0; i < m; ++i) full(basis[static_cast<std::size_t>(i)]) = T(i, cols);
    sol.x = full.head(n) - full.segment(n, n);
    sol.value = lp.c.dot(sol.x);
    sol.status = LpStatus::Optimal;
    return sol;
}

}  // namespace absc
