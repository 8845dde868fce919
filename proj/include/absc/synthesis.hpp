#pragma once

#include "absc/abstraction.hpp"
#include "absc/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace absc {

struct IndexRanges {
    Interval d{0.0, 0.8};      // [m]
    Interval ddot{-1.0, 1.0};  // [m/s]
};

/// phi = max(phi0, phi*), phi0 = d_min - d, phi* = d_min^2 - d^2 - k ddot / M.
struct SafetyIndex {
    double d_min = 0.05;
    double k = 1.0;
    double p = 2.0;
    double m_min = 1.0;
    double m_max = 1.0;
    double mdot_star = 0.0;
    IndexRanges ranges;

    /// Throws ConfigError when an invariant (d_min > 0, k > 0, 0 < m_min <= m_max) fails.
    void validate() const;
};

enum class Branch { Phi0, PhiStar };

double phi0(double d, const SafetyIndex& index);
double phi_star(const ExtendedAbstractState& z, const SafetyIndex& index);
double phi(const ExtendedAbstractState& z, const SafetyIndex& index);

struct IndexValue {
    double phi0 = 0.0;
    double phi_star = 0.0;
    double phi = 0.0;
    Branch branch = Branch::PhiStar;  // ties resolve to phi*
    bool below_m_min = false;         // M < m_min (1 - 1e-9): outside the verified model
};

IndexValue evaluate_index(const ExtendedAbstractState& z, const SafetyIndex& index);

struct PhiGradient {
    Eigen::Vector3d grad;  // (dphi/dd, dphi/dddot, dphi/dM)
    Branch branch = Branch::PhiStar;
};

PhiGradient phi_hat_gradient(const ExtendedAbstractState& z, const SafetyIndex& index);

/// (dphi*/dd, dphi*/dddot, dphi*/dM) regardless of which branch is active.
Eigen::Vector3d phi_star_gradient(const ExtendedAbstractState& z, const SafetyIndex& index);

/// k = 2 max|d ddot| + max|d_min^2 - d^2| * mdot_star / m_min over the ranges.
double synthesize_k(const IndexRanges& ranges, double d_min, double m_min, double mdot_star);

struct FeasibilityWitness {
    double d = 0.0;
    double ddot = 0.0;
    double M = 0.0;
    double margin = 0.0;
    Branch branch = Branch::PhiStar;
};

struct FeasibilityReport {
    int resolution = 0;
    std::size_t checked = 0;     // boundary cells with ddot inside the range
    std::size_t infeasible = 0;
    double infeasible_fraction = 0.0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    bool vacuous = false;        // no boundary cell inside the ranges
    std::size_t phi0_cells = 0;  // d = d_min cells governed by phi0
    std::vector<FeasibilityWitness> witnesses;

    bool passed() const { return infeasible == 0; }
};

/// Margin of the stricter abstract feasibility condition at one phi* boundary cell; negative is feasible.
/// The |dphi/dM| mdot_star term is dropped when at_m_min.
double phi_star_boundary_margin(double d, double M, const SafetyIndex& index, bool at_m_min);

/// Grid (d, M) over ranges x [m_min, m_max], solve ddot from phi* = 0 and check each cell.
FeasibilityReport verify_feasibility_grid(const SafetyIndex& index, int resolution = 256,
                                          std::size_t max_witnesses = 16);

}  // namespace absc
