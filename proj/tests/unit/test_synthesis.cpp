#include "absc/bstar.hpp"
#include "absc/errors.hpp"
#include "absc/sampling.hpp"
#include "absc/synthesis.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace absc;

namespace {

SafetyIndex reference_index(double k) {
    SafetyIndex s;
    s.d_min = 0.05;
    s.k = k;
    s.m_min = 4.13;
    s.m_max = 30.0;
    s.mdot_star = 847.42;
    return s;
}

SamplingDomain planar_domain() {
    SamplingDomain d;
    d.obstacle_lo = Eigen::Vector3d(-2.0, -2.0, 0.0);
    d.obstacle_hi = Eigen::Vector3d(2.0, 2.0, 0.0);
    d.radius = Interval(0.05, 0.15);
    d.d_range = Interval(0.0, 0.8);
    return d;
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("index values") {
    SafetyIndex s = reference_index(140.0);
    IndexValue v = evaluate_index(ExtendedAbstractState{0.05, 0.0, 10.0}, s);
    CHECK(v.phi0 == doctest::Approx(0.0));
    CHECK(v.phi_star == doctest::Approx(0.0));
    CHECK(v.phi == doctest::Approx(0.0));
    CHECK(v.branch == Branch::PhiStar);  // tie
    CHECK(phi_star(ExtendedAbstractState{0.3, -0.5, 10.0}, s) == doctest::Approx(6.9125));
    CHECK(phi(ExtendedAbstractState{0.3, -0.5, 10.0}, s) == doctest::Approx(6.9125));
    CHECK(phi0(0.3, s) == doctest::Approx(-0.25));
    CHECK(evaluate_index(ExtendedAbstractState{0.3, 0.0, 1.0}, s).below_m_min);
    CHECK_FALSE(evaluate_index(ExtendedAbstractState{0.3, 0.0, 4.13}, s).below_m_min);
}

TEST_CASE("phi is non-increasing in d") {
    const SafetyIndex s = reference_index(133.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dd(-1, 1), M(4.13, 30);
    for (int t = 0; t < 200; ++t) {
        const double v = dd(rng), m = M(rng);
        double prev = std::numeric_limits<double>::infinity();
        for (double d = 0.0; d <= 1.0; d += 0.01) {
            const double p = phi(ExtendedAbstractState{d, v, m}, s);
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
    }
}

TEST_CASE("phi_hat_gradient") {
    const SafetyIndex s = reference_index(133.0);
    PhiGradient g = phi_hat_gradient(ExtendedAbstractState{0.3, 0.0, 10.0}, s);
    CHECK(g.branch == Branch::PhiStar);
    CHECK(g.grad(2) == 0.0);
    g = phi_hat_gradient(ExtendedAbstractState{0.01, 0.5, 10.0}, s);  // phi0 dominates
    CHECK(g.branch == Branch::Phi0);
    CHECK(g.grad == Eigen::Vector3d(-1.0, 0.0, 0.0));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dd(0.0, 0.8), v(-1, 1), M(4.13, 30);
    for (int t = 0; t < 200; ++t) {
        const ExtendedAbstractState z{dd(rng), v(rng), M(rng)};
        const IndexValue iv = evaluate_index(z, s);
        if (std::abs(iv.phi0 - iv.phi_star) < 1e-3) continue;
        const Eigen::Vector3d an = phi_hat_gradient(z, s).grad;
        const double h = 1e-6;
        const auto at = [&](double a, double b, double c) { return phi(ExtendedAbstractState{a, b, c}, s); };
        const Eigen::Vector3d fd((at(z.d + h, z.ddot, z.M) - at(z.d - h, z.ddot, z.M)) / (2 * h),
                                 (at(z.d, z.ddot + h, z.M) - at(z.d, z.ddot - h, z.M)) / (2 * h),
                                 (at(z.d, z.ddot, z.M + h) - at(z.d, z.ddot, z.M - h)) / (2 * h));
        CHECK((an - fd).norm() < 1e-6 * (1.0 + an.norm()));
    }
}

TEST_CASE("synthesize_k") {
    const IndexRanges r;
    // oracle: 132.406356
    CHECK(synthesize_k(r, 0.05, 4.13, 847.42) == doctest::Approx(132.406356).epsilon(1e-6));
    CHECK(std::abs(synthesize_k(r, 0.05, 4.13, 847.42) - 132.41) < 0.01);
    CHECK(synthesize_k(r, 0.05, 4.13, 0.0) == doctest::Approx(1.6));
    CHECK(synthesize_k(r, 0.05, 4.13, 900.0) > synthesize_k(r, 0.05, 4.13, 847.42));
    CHECK(synthesize_k(r, 0.05, 5.0, 847.42) < synthesize_k(r, 0.05, 4.13, 847.42));
    // ranges not containing 0 or d_min use the extreme corners
    IndexRanges r2;
    r2.d = Interval(0.2, 0.5);
    r2.ddot = Interval(-0.3, 0.6);
    CHECK(synthesize_k(r2, 0.05, 1.0, 0.0) == doctest::Approx(2 * 0.5 * 0.6));
    CHECK(synthesize_k(r2, 0.05, 1.0, 1.0) == doctest::Approx(0.6 + (0.25 - 0.0025)));
}

TEST_CASE("index validation") {
    SafetyIndex s = reference_index(1.0);
    CHECK_NOTHROW(s.validate());
    s.k = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = reference_index(1.0);
    s.m_min = 40.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = reference_index(1.0);
    s.d_min = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("grid verification with the synthesized k passes at every resolution") {
    for (double mdot : {0.0, 50.0, 847.42, 5000.0}) {
        SafetyIndex s = reference_index(1.0);
        s.mdot_star = mdot;
        s.k = synthesize_k(s.ranges, s.d_min, s.m_min, s.mdot_star);
        for (int res : {16, 64, 256}) {
            const FeasibilityReport r = verify_feasibility_grid(s, res);
            CHECK(r.passed());
            CHECK(r.checked > 0);
            CHECK(r.infeasible <= r.checked);
            CHECK(r.worst_margin < 0.0);
        }
    }
}

TEST_CASE("grid verification fails for small k with witnesses") {
    SafetyIndex s = reference_index(132.406356 / 10);
    FeasibilityReport r = verify_feasibility_grid(s, 256);
    CHECK(r.infeasible > 0);
    CHECK_FALSE(r.witnesses.empty());
    CHECK(r.worst_margin > 0.0);
    for (const auto& w : r.witnesses) CHECK(phi_star_boundary_margin(w.d, w.M, s, w.M <= s.m_min) > 0.0);

    s.k = 0.01;
    r = verify_feasibility_grid(s, 64);
    CHECK(r.infeasible > 0);
    CHECK(r.infeasible_fraction == doctest::Approx(double(r.infeasible) / double(r.checked)));
    CHECK_THROWS(verify_feasibility_grid(s, 8));
}

TEST_CASE("static case: any k above 2 max|d ddot| passes") {
    SafetyIndex s = reference_index(1.7);
    s.mdot_star = 0.0;
    CHECK(verify_feasibility_grid(s, 128).passed());
}

TEST_CASE("vacuous boundary is flagged") {
    SafetyIndex s = reference_index(1.0);
    s.ranges.d = Interval(0.5, 0.8);
    s.ranges.ddot = Interval(0.0, 0.0001);
    s.mdot_star = 0.0;
    const FeasibilityReport r = verify_feasibility_grid(s, 32);
    CHECK(r.vacuous);
    CHECK(r.checked == 0);
}

TEST_CASE("the checked margin bounds the margin for every admissible Mdot") {
    const SafetyIndex s = reference_index(132.406356);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dd(0.0, 0.8), M(4.13, 30.0), md(-1.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double d = dd(rng), m = M(rng);
        const double ddot = m * (s.d_min * s.d_min - d * d) / s.k;
        if (!s.ranges.ddot.contains(ddot)) continue;
        const double checked = phi_star_boundary_margin(d, m, s, false);
        for (int j = 0; j < 10; ++j) {
            const double mdot = s.mdot_star * md(rng);
            // min over |v| <= M of -2 d ddot - k v / M + k ddot mdot / M^2
            const double actual = -2 * d * ddot - s.k + s.k * ddot * mdot / (m * m);
            CHECK(checked >= actual - 1e-9);
        }
    }
}

}  // TEST_SUITE

TEST_SUITE("bstar") {

TEST_CASE("concrete boundary check on the planar arm") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    SamplingOptions so;
    so.n_samples = 2000;
    const SampleStats st = estimate_stats(sys, planar_domain(), so);
    SafetyIndex s;
    s.m_min = st.m_min;
    s.m_max = st.m_max;
    s.mdot_star = st.mdot_star;
    s.k = synthesize_k(s.ranges, s.d_min, s.m_min, s.mdot_star);
    REQUIRE(verify_feasibility_grid(s, 128).passed());

    BstarOptions bo;
    bo.attempts = 20000;
    bo.band = 0.5;
    const BstarEstimate ok = estimate_Bstar_concrete(sys, s, planar_domain(), bo);
    CHECK(ok.hits - ok.violations >= 1000);
    REQUIRE(ok.fraction.has_value());
    CHECK(*ok.fraction == 0.0);

    bo.band = 1.0;
    CHECK(estimate_Bstar_concrete(sys, s, planar_domain(), bo).hits >= ok.hits);

    SafetyIndex weak = s;
    weak.k = 0.01;
    bo.band = 0.05;
    const BstarEstimate bad = estimate_Bstar_concrete(sys, weak, planar_domain(), bo);
    REQUIRE(bad.fraction.has_value());
    CHECK(*bad.fraction > 0.0);
    CHECK_FALSE(bad.witnesses.empty());
}

TEST_CASE("empty band leaves the fraction undefined") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    SafetyIndex s;
    s.m_min = 0.1;
    s.m_max = 30.0;
    s.k = 100.0;
    BstarOptions bo;
    bo.attempts = 200;
    bo.band = 0.0;
    CHECK_THROWS_AS(estimate_Bstar_concrete(sys, s, planar_domain(), bo), Error);
    bo.band = 1e-12;
    const BstarEstimate e = estimate_Bstar_concrete(sys, s, planar_domain(), bo);
    CHECK(e.hits == 0);
    CHECK_FALSE(e.fraction.has_value());
}

}  // TEST_SUITE
