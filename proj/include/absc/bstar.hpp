#pragma once

#include "absc/controller.hpp"
#include "absc/sampling.hpp"
#include "absc/synthesis.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace absc {

struct BstarOptions {
    std::size_t attempts = 200000;  // world-state draws; fixed so hits are monotone in the band
    std::uint64_t seed = 11;
    double band = 0.05;             // boundary band |phi| <= band
    int jobs = 1;
    std::size_t max_witnesses = 8;
};

struct BstarEstimate {
    std::size_t attempts = 0;
    std::size_t hits = 0;        // draws inside the boundary band
    std::size_t infeasible = 0;  // hits with min_u phidot(x, u) >= 0
    std::size_t violations = 0;  // hits with M <= 0, skipped
    double worst_phidot = -std::numeric_limits<double>::infinity();
    std::optional<double> fraction;  // empty when the band was never hit
    std::vector<WorldState> witnesses;
};

/// Monte Carlo estimate of the concrete boundary set without a decreasing control.
BstarEstimate estimate_Bstar_concrete(const ConcreteSystem& sys, const SafetyIndex& index,
                                      const SamplingDomain& domain, const BstarOptions& opts);

}  // namespace absc
