#include "absc/geometry.hpp"

#include "absc/errors.hpp"
#include "absc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace absc {

double dual_norm_order(double p) {
    if (!(p >= 1.0)) throw Error("norm order must be >= 1, got " + std::to_string(p));
    if (p == 1.0) return kInfNorm;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& v, double p) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return scale * std::pow((v.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) throw Error("Interval requires lo <= hi");
}

Polytope::Polytope(Eigen::MatrixXd A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size()) throw DimensionError("Polytope: A has " + std::to_string(A_.rows()) +
                                                     " rows but b has " + std::to_string(b_.size()) + " entries");
    if (A_.cols() == 0) throw DimensionError("Polytope: zero-dimensional");
    if (!A_.allFinite() || !b_.allFinite()) throw Error("Polytope: non-finite entries in A or b");

    detect_box();
    if (is_box()) {
        if (((*box_hi_) - (*box_lo_)).minCoeff() < -kGeomEps) throw InfeasibleError("Polytope: empty box");
        return;
    }
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Zero(A_.cols());
    lp.A_ub = A_;
    lp.b_ub = b_;
    lp.A_eq.resize(0, A_.cols());
    lp.b_eq.resize(0);
    if (solve_lp(lp).status == LpStatus::Infeasible) throw InfeasibleError("Polytope: empty set");
}

Polytope Polytope::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (lo.size() != hi.size()) throw DimensionError("Polytope::box: bound sizes differ");
    const Eigen::Index n = lo.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, n);
    Eigen::VectorXd b(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(2 * i, i) = 1.0;
        b(2 * i) = hi(i);
        A(2 * i + 1, i) = -1.0;
        b(2 * i + 1) = -lo(i);
    }
    return Polytope(std::move(A), std::move(b));
}

Polytope Polytope::symmetric_box(const Eigen::VectorXd& half_width) { return box(-half_width, half_width); }

Polytope Polytope::scaled(double alpha) const {
    if (!(alpha > 0.0)) throw Error("Polytope::scaled requires alpha > 0");
    return Polytope(A_, alpha * b_);
}

void Polytope::detect_box() {
    const Eigen::Index n = A_.cols();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -kInfNorm);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, kInfNorm);
    for (Eigen::Index i = 0; i < A_.rows(); ++i) {
        Eigen::Index nz = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (A_(i, j) != 0.0) {
                if (nz >= 0) return;
                nz = j;
            }
        }
        if (nz < 0) return;
        const double bound = b_(i) / A_(i, nz);
        if (A_(i, nz) > 0.0)
            hi(nz) = std::min(hi(nz), bound);
        else
            lo(nz) = std::max(lo(nz), bound);
    }
    if (!lo.allFinite() || !hi.allFinite()) return;
    box_lo_ = lo;
    box_hi_ = hi;
}

bool contains(const Polytope& P, const Eigen::Ref<const Eigen::VectorXd>& v, double tol) {
    if (v.size() != P.dim())
        throw DimensionError("contains: point has dimension " + std::to_string(v.size()) + ", polytope " +
                             std::to_string(P.dim()));
    return ((P.A() * v - P.b()).array() <= tol).all();
}

LpExtreme lp_extreme(const Polytope& P, const Eigen::Ref<const Eigen::VectorXd>& c, Sense sense) {
    if (c.size() != P.dim()) throw DimensionError("lp_extreme: objective dimension mismatch");
    const double sgn = sense == Sense::Maximize ? 1.0 : -1.0;

    if (P.is_box()) {
        LpExtreme out;
        out.argpoint.resize(P.dim());
        out.value = 0.0;
        for (Eigen::Index i = 0; i < P.dim(); ++i) {
            const double ci = sgn * c(i);
            out.argpoint(i) = ci >= 0.0 ? P.box_hi()(i) : P.box_lo()(i);
            out.value += c(i) * out.argpoint(i);
        }
        return out;
    }

    LinearProgram lp;
    lp.c = -sgn * c;
    lp.A_ub = P.A();
    lp.b_ub = P.b();
    lp.A_eq.resize(0, P.dim());
    lp.b_eq.resize(0);
    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible) throw InfeasibleError("lp_extreme: infeasible polytope");
    if (sol.status == LpStatus::Unbounded) throw UnboundedError("lp_extreme: objective unbounded over polytope");
    return LpExtreme{c.dot(sol.x), sol.x};
}

Interval affine_image_interval(const Eigen::Ref<const Eigen::RowVectorXd>& C, double off, const Polytope& U) {
    if (C.size() != U.dim()) throw DimensionError("affine_image_interval: C has wrong length");
    const Eigen::VectorXd c = C.transpose();
    const double lo = lp_extreme(U, c, Sense::Minimize).value;
    const double hi = lp_extreme(U, c, Sense::Maximize).value;
    return Interval(lo + off, std::max(lo, hi) + off);
}

double inner_ball_radius(const Polytope& P, double p) {
    const double q = dual_norm_order(p);
    double r = kInfNorm;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const double nrm = lp_norm(P.A().row(i).transpose(), q);
        if (nrm == 0.0) throw Error("inner_ball_radius: zero row " + std::to_string(i) + " in A");
        if (P.b()(i) < -kGeomEps)
            throw AssumptionViolation("inner_ball_radius: origin violates row " + std::to_string(i));
        r = std::min(r, P.b()(i) / nrm);
    }
    return std::max(r, 0.0);
}

namespace {

template <class Support>
double sampled_radius(Eigen::Index dim, double p, std::size_t n_dirs, std::uint64_t seed, Support&& support) {
    if (n_dirs < static_cast<std::size_t>(2 * dim))
        throw Error("inner_ball_radius_sampled: need at least 2*dim directions");
    const double q = dual_norm_order(p);
    double r = kInfNorm;
    auto visit = [&](const Eigen::VectorXd& w) {
        try {
            r = std::min(r, support(w));
        } catch (const UnboundedError&) {
        }
    };
    Eigen::VectorXd w(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (double s : {1.0, -1.0}) {
            w.setZero();
            w(i) = s;
            visit(w);
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = static_cast<std::size_t>(2 * dim); k < n_dirs; ++k) {
        for (Eigen::Index i = 0; i < dim; ++i) w(i) = normal(rng);
        const double nrm = lp_norm(w, q);
        if (nrm == 0.0) continue;
        visit(w / nrm);
    }
    return r;
}

}  // namespace

double inner_ball_radius_sampled(const Polytope& P, double p, std::size_t n_dirs, std::uint64_t seed) {
    return sampled_radius(P.dim(), p, n_dirs, seed,
                          [&](const Eigen::VectorXd& w) { return lp_extreme(P, w, Sense::Maximize).value; });
}

double inner_ball_radius_sampled(const Eigen::MatrixXd& C, const Eigen::VectorXd& off, const Polytope& U, double p,
                                 std::size_t n_dirs, std::uint64_t seed) {
    if (C.cols() != U.dim() || C.rows() != off.size())
        throw DimensionError("inner_ball_radius_sampled: image map dimensions mismatch");
    return sampled_radius(C.rows(), p, n_dirs, seed, [&](const Eigen::VectorXd& w) {
        const Eigen::VectorXd cw = C.transpose() * w;
        return w.dot(off) + lp_extreme(U, cw, Sense::Maximize).value;
    });
}

}  // namespace absc
