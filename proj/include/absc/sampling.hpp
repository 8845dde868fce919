#pragma once

#include "absc/abstraction.hpp"
#include "absc/dynamics.hpp"
#include "absc/geometry.hpp"
#include "absc/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace absc {

/// Where obstacles live while X is sampled. States whose nearest-point distance falls outside
/// d_range are redrawn (they lie outside the abstract domain the index is designed on).
struct SamplingDomain {
    Eigen::Vector3d obstacle_lo = Eigen::Vector3d::Constant(-1.0);
    Eigen::Vector3d obstacle_hi = Eigen::Vector3d::Constant(1.0);
    Interval radius{0.0, 0.0};
    Interval d_range{0.0, 0.8};
    int max_redraws = 1000;
};

/// Independent generator for draw `index` of stream `seed`; results do not depend on worker count.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

WorldState draw_world_state(const ConcreteSystem& sys, const SamplingDomain& domain, std::mt19937_64& rng);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

Histogram make_histogram(const std::vector<double>& values, int bins = 64);

struct SampleStats {
    std::size_t n_samples = 0;
    double m_min = 0.0;
    double m_max = 0.0;
    double mdot_max_observed = 0.0;  // max |Mdot| over samples and u in U
    double mdot_inflation = 1.2;
    double mdot_star = 0.0;          // mdot_max_observed * inflation
    double lipschitz_est = 0.0;
    std::size_t kinked = 0;          // samples whose dM/dx hit a kink
    Histogram m_histogram;
    Histogram mdot_histogram;
    std::size_t violations = 0;      // samples with 0 not strictly inside Phi_U
    std::uint64_t seed = 0;
    double p = 2.0;

    // Sample indices achieving the extrema (for argextreme_poses).
    std::size_t argmin_m = 0;
    std::size_t argmax_m = 0;
    std::size_t argmax_mdot = 0;
};

struct SamplingOptions {
    std::size_t n_samples = 10000;
    std::uint64_t seed = 1;
    double mdot_inflation = 1.2;
    double p = 2.0;
    int jobs = 1;
    double max_violation_fraction = 0.10;
};

/// Monte Carlo estimate of [M_min, M_max] and Mdot* over X.
/// Throws SamplingError when more than max_violation_fraction of samples violate 0 in Phi_U.
SampleStats estimate_stats(const ConcreteSystem& sys, const SamplingDomain& domain, const SamplingOptions& opts);

/// (1 - p^N)^3.
double sampling_guarantee(double p, double N);

struct ExtremePose {
    std::size_t sample_index = 0;
    WorldState state;
    double M = 0.0;
    double mdot = 0.0;
};

struct ExtremePoses {
    ExtremePose m_min;
    ExtremePose m_max;
    ExtremePose mdot_star;
};

/// Re-draws the recorded extremal samples from their substreams.
ExtremePoses argextreme_poses(const SampleStats& stats, const ConcreteSystem& sys, const SamplingDomain& domain);

}  // namespace absc
