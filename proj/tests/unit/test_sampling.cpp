#include "absc/abstraction.hpp"
#include "absc/errors.hpp"
#include "absc/sampling.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <numeric>

using namespace absc;

namespace {

/// One joint on q in [0.5, 2.5], qdot in [-1, 1], point obstacle fixed at (3, 0, 0).
ConcreteSystem analytic_system() { return test::make_system(test::one_joint_chain(), 10.0, 0.5, 2.5, 1.0); }

SamplingDomain fixed_obstacle() {
    SamplingDomain d;
    d.obstacle_lo = d.obstacle_hi = Eigen::Vector3d(3.0, 0.0, 0.0);
    d.radius = Interval(0.0, 0.0);
    d.d_range = Interval(0.0, 10.0);
    return d;
}

SamplingDomain planar_domain() {
    SamplingDomain d;
    d.obstacle_lo = Eigen::Vector3d(-2.0, -2.0, 0.0);
    d.obstacle_hi = Eigen::Vector3d(2.0, 2.0, 0.0);
    d.radius = Interval(0.05, 0.15);
    d.d_range = Interval(0.0, 0.8);
    return d;
}

SamplingOptions opts(std::size_t n, std::uint64_t seed = 1, int jobs = 1) {
    SamplingOptions o;
    o.n_samples = n;
    o.seed = seed;
    o.jobs = jobs;
    return o;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("one-joint extrema match the dense grid oracle") {
    // oracle: 10^6-point grid, M in [3.984707, 9.999999738]
    const SampleStats s = estimate_stats(analytic_system(), fixed_obstacle(), opts(10000));
    CHECK(s.violations == 0);
    CHECK(s.m_min == doctest::Approx(3.984707497881637).epsilon(0.02));
    CHECK(s.m_max == doctest::Approx(9.999999738261858).epsilon(0.02));
    CHECK(s.m_min >= 3.984707497881637 - 1e-6);
    CHECK(s.m_max <= 10.0 + 1e-6);
}

TEST_CASE("stats are deterministic and independent of worker count") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    const SampleStats a = estimate_stats(sys, planar_domain(), opts(2000, 5, 1));
    const SampleStats b = estimate_stats(sys, planar_domain(), opts(2000, 5, 3));
    CHECK(a.m_min == b.m_min);
    CHECK(a.m_max == b.m_max);
    CHECK(a.mdot_star == b.mdot_star);
    CHECK(a.lipschitz_est == b.lipschitz_est);
    CHECK(a.m_histogram.counts == b.m_histogram.counts);
    CHECK(a.argmin_m == b.argmin_m);
}

TEST_CASE("doubling N never shrinks the observed range") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    const SampleStats a = estimate_stats(sys, planar_domain(), opts(1000, 2));
    const SampleStats b = estimate_stats(sys, planar_domain(), opts(2000, 2));
    CHECK(b.m_min <= a.m_min);
    CHECK(b.m_max >= a.m_max);
    CHECK(b.mdot_max_observed >= a.mdot_max_observed);
}

TEST_CASE("stats invariants") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    const SampleStats s = estimate_stats(sys, planar_domain(), opts(3000, 9));
    CHECK(s.m_min <= s.m_max);
    CHECK(s.m_histogram.total() == s.n_samples - s.violations);
    CHECK(s.mdot_histogram.total() == s.n_samples - s.violations);
    CHECK(s.m_histogram.counts.size() == 64);
    CHECK(s.m_histogram.edges.front() == doctest::Approx(s.m_min));
    CHECK(s.m_histogram.edges.back() == doctest::Approx(s.m_max));
    CHECK(s.mdot_star == doctest::Approx(1.2 * s.mdot_max_observed));
    CHECK(s.lipschitz_est > 0.0);
    CHECK(std::isfinite(s.lipschitz_est));
}

TEST_CASE("argextreme poses re-evaluate to the recorded values") {
    const ConcreteSystem sys = test::make_system(test::planar_chain(1.0, 0.6));
    const SampleStats s = estimate_stats(sys, planar_domain(), opts(2000, 1));
    const ExtremePoses p = argextreme_poses(s, sys, planar_domain());
    CHECK(p.m_min.M == doctest::Approx(s.m_min));
    CHECK(p.m_max.M == doctest::Approx(s.m_max));
    CHECK(p.mdot_star.mdot == doctest::Approx(s.mdot_max_observed));
    CHECK(compute_M(sys, p.m_min.state.obstacle, p.m_min.state.x) == doctest::Approx(s.m_min));
    const ExtremePoses again = argextreme_poses(s, sys, planar_domain());
    CHECK(again.m_min.state.x.q == p.m_min.state.x.q);
    // the smallest radius sits near the stretched-out singular pose (grid oracle: elbow angle 0)
    CHECK(std::cos(p.m_min.state.x.q(1)) > 0.95);
}

TEST_CASE("sampling guarantee") {
    const double g = sampling_guarantee(0.9999, 100000);
    CHECK(g == doctest::Approx(0.9998638744753096).epsilon(1e-9));
    CHECK(g < 0.9999);
    CHECK(sampling_guarantee(0.5, 1) == doctest::Approx(0.125));
    CHECK(sampling_guarantee(0.9999, 1e9) == doctest::Approx(1.0));
    for (double N : {10.0, 100.0, 1000.0, 10000.0}) {
        CHECK(sampling_guarantee(0.999, N) < sampling_guarantee(0.999, 2 * N));
        CHECK(sampling_guarantee(0.99, N) > sampling_guarantee(0.999, N));
    }
    CHECK_THROWS(sampling_guarantee(1.0, 10));
    CHECK_THROWS(sampling_guarantee(0.5, 0));
}

TEST_CASE("ill-posed abstraction aborts") {
    // near q = 0 the one-joint chain has almost no authority along d while the drift is large
    const ConcreteSystem sys = test::make_system(test::one_joint_chain(), 0.1, -0.05, 0.05, 3.0);
    CHECK_THROWS_AS(estimate_stats(sys, fixed_obstacle(), opts(500)), SamplingError);
    CHECK_THROWS(estimate_stats(analytic_system(), fixed_obstacle(), opts(50)));
}

TEST_CASE("histograms") {
    const Histogram h = make_histogram({0.0, 1.0, 2.0, 3.0}, 3);
    CHECK(h.edges.size() == 4);
    CHECK(h.total() == 4);
    CHECK(h.counts.back() == 2);  // the maximum lands in the last bin
    const Histogram flat = make_histogram({2.0, 2.0}, 4);
    CHECK(flat.total() == 2);
}

}  // TEST_SUITE
