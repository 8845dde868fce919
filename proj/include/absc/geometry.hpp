#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>

namespace absc {

/// Absolute tolerance for containment and LP optimality.
inline constexpr double kGeomEps = 1e-9;

/// Norm order p of an Lp ball; use infinity() for the max-norm.
inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Conjugate exponent q with 1/p + 1/q = 1.
double dual_norm_order(double p);

/// ||v||_p for p in [1, inf].
double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& v, double p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_);

    double width() const { return hi - lo; }
    bool contains(double v, double tol = kGeomEps) const { return v >= lo - tol && v <= hi + tol; }
};

/// H-representation {v | A v <= b}. Construction certifies nonemptiness with an LP.
class Polytope {
public:
    Polytope(Eigen::MatrixXd A, Eigen::VectorXd b);

    /// Axis-aligned box lo <= v <= hi.
    static Polytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static Polytope symmetric_box(const Eigen::VectorXd& half_width);

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::VectorXd& b() const { return b_; }
    Eigen::Index dim() const { return A_.cols(); }
    Eigen::Index rows() const { return A_.rows(); }

    /// Every row has exactly one nonzero and every coordinate is bounded on both sides.
    bool is_box() const { return box_lo_.has_value(); }
    const Eigen::VectorXd& box_lo() const { return *box_lo_; }
    const Eigen::VectorXd& box_hi() const { return *box_hi_; }

    /// Same polytope with b scaled by alpha > 0.
    Polytope scaled(double alpha) const;

private:
    void detect_box();

    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    std::optional<Eigen::VectorXd> box_lo_;
    std::optional<Eigen::VectorXd> box_hi_;
};

enum class Sense { Minimize, Maximize };

struct LpExtreme {
    double value = 0.0;
    Eigen::VectorXd argpoint;
};

bool contains(const Polytope& P, const Eigen::Ref<const Eigen::VectorXd>& v, double tol = kGeomEps);

/// Optimum of c'v over P. Throws UnboundedError / InfeasibleError.
LpExtreme lp_extreme(const Polytope& P, const Eigen::Ref<const Eigen::VectorXd>& c, Sense sense);

/// Exact image of P under the scalar map v -> C v + off.
Interval affine_image_interval(const Eigen::Ref<const Eigen::RowVectorXd>& C, double off, const Polytope& U);

/// Radius of the largest zero-centred Lp ball inside P: min_i b_i / ||a_i||_q.
/// Throws AssumptionViolation if 0 is not in P.
double inner_ball_radius(const Polytope& P, double p);

/// Upper estimate of inner_ball_radius from n_dirs support evaluations along unit-q
/// directions (the 2n axis directions first, then seeded random ones).
double inner_ball_radius_sampled(const Polytope& P, double p, std::size_t n_dirs, std::uint64_t seed = 0x5eed);

/// Same estimate for the image {C u + off | u in U} without forming its H-representation.
double inner_ball_radius_sampled(const Eigen::MatrixXd& C, const Eigen::VectorXd& off, const Polytope& U, double p,
                                 std::size_t n_dirs, std::uint64_t seed = 0x5eed);

}  // namespace absc
