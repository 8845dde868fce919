#include "absc/synthesis.hpp"

#include "absc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace absc {

void SafetyIndex::validate() const {
    if (!(d_min > 0.0)) throw ConfigError("safety index: d_min must be positive");
    if (!(k > 0.0)) throw ConfigError("safety index: k must be positive");
    if (!(m_min > 0.0)) throw ConfigError("safety index: m_min must be positive");
    if (!(m_max >= m_min)) throw ConfigError("safety index: m_max must be >= m_min");
    if (!(mdot_star >= 0.0)) throw ConfigError("safety index: mdot_star must be >= 0");
    if (!(ranges.d.lo <= ranges.d.hi) || !(ranges.ddot.lo <= ranges.ddot.hi))
        throw ConfigError("safety index: ranges must be nonempty");
}

double phi0(double d, const SafetyIndex& index) { return index.d_min - d; }

double phi_star(const ExtendedAbstractState& z, const SafetyIndex& index) {
    return index.d_min * index.d_min - z.d * z.d - index.k * z.ddot / z.M;
}

double phi(const ExtendedAbstractState& z, const SafetyIndex& index) {
    return std::max(phi0(z.d, index), phi_star(z, index));
}

IndexValue evaluate_index(const ExtendedAbstractState& z, const SafetyIndex& index) {
    IndexValue v;
    v.phi0 = phi0(z.d, index);
    v.phi_star = phi_star(z, index);
    v.branch = v.phi0 > v.phi_star ? Branch::Phi0 : Branch::PhiStar;
    v.phi = std::max(v.phi0, v.phi_star);
    v.below_m_min = z.M < index.m_min * (1.0 - 1e-9);
    return v;
}

Eigen::Vector3d phi_star_gradient(const ExtendedAbstractState& z, const SafetyIndex& index) {
    return Eigen::Vector3d(-2.0 * z.d, -index.k / z.M, index.k * z.ddot / (z.M * z.M));
}

PhiGradient phi_hat_gradient(const ExtendedAbstractState& z, const SafetyIndex& index) {
    PhiGradient out;
    if (phi0(z.d, index) > phi_star(z, index)) {
        out.branch = Branch::Phi0;
        out.grad = Eigen::Vector3d(-1.0, 0.0, 0.0);
        return out;
    }
    out.branch = Branch::PhiStar;
    out.grad = phi_star_gradient(z, index);
    return out;
}

double synthesize_k(const IndexRanges& ranges, double d_min, double m_min, double mdot_star) {
    if (!(m_min > 0.0)) throw Error("synthesize_k: m_min must be positive");
    const double max_abs_d = std::max(std::abs(ranges.d.lo), std::abs(ranges.d.hi));
    const double max_abs_ddot = std::max(std::abs(ranges.ddot.lo), std::abs(ranges.ddot.hi));
    double d2_lo = std::min(ranges.d.lo * ranges.d.lo, ranges.d.hi * ranges.d.hi);
    if (ranges.d.lo <= 0.0 && ranges.d.hi >= 0.0) d2_lo = 0.0;
    const double d2_hi = max_abs_d * max_abs_d;
    const double dm2 = d_min * d_min;
    const double max_gap = std::max(std::abs(dm2 - d2_lo), std::abs(dm2 - d2_hi));
    return 2.0 * max_abs_d * max_abs_ddot + max_gap * mdot_star / m_min;
}

double phi_star_boundary_margin(double d, double M, const SafetyIndex& index, bool at_m_min) {
    const double ddot = M * (index.d_min * index.d_min - d * d) / index.k;
    const PhiGradient g = phi_hat_gradient(ExtendedAbstractState{d, ddot, M}, index);
    // min over |v| <= M of dphi/dz (f_z + g_z v) = dphi/dd ddot - |dphi/dddot| M
    double margin = g.grad(0) * ddot - std::abs(g.grad(1)) * M;
    if (!at_m_min) margin += std::abs(g.grad(2)) * index.mdot_star;
    return margin;
}

FeasibilityReport verify_feasibility_grid(const SafetyIndex& index, int resolution, std::size_t max_witnesses) {
    index.validate();
    if (resolution < 16) throw Error("verify_feasibility_grid: resolution must be >= 16");
    FeasibilityReport rep;
    rep.resolution = resolution;
    const auto& r = index.ranges;
    const int nd = resolution;
    const int nm = index.m_max > index.m_min ? resolution : 1;

    auto record = [&](const FeasibilityWitness& w) {
        ++rep.checked;
        rep.worst_margin = std::max(rep.worst_margin, w.margin);
        if (w.margin >= 0.0) {
            ++rep.infeasible;
            if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back(w);
        }
    };

    for (int j = 0; j < nm; ++j) {
        const double M = nm == 1 ? index.m_min
                                 : index.m_min + (index.m_max - index.m_min) * static_cast<double>(j) / (nm - 1);
        const bool at_m_min = j == 0;
        for (int i = 0; i < nd; ++i) {
            const double d = r.d.lo + (r.d.hi - r.d.lo) * static_cast<double>(i) / (nd - 1);
            const double ddot = M * (index.d_min * index.d_min - d * d) / index.k;
            if (!r.ddot.contains(ddot, 0.0)) continue;
            record({d, ddot, M, phi_star_boundary_margin(d, M, index, at_m_min), Branch::PhiStar});
        }

        // phi0 boundary: d = d_min with ddot >= 0 (phi* <= 0 there).
        if (!r.d.contains(index.d_min, 0.0)) continue;
        const double v_lo = std::max(0.0, r.ddot.lo);
        if (v_lo > r.ddot.hi) continue;
        for (int i = 0; i < nd; ++i) {
            const double ddot = v_lo + (r.ddot.hi - v_lo) * static_cast<double>(i) / (nd - 1);
            if (ddot <= 0.0) continue;  // the tie ddot = 0 is the phi* cell above
            ++rep.phi0_cells;
            record({index.d_min, ddot, M, -ddot, Branch::Phi0});
        }
    }
    rep.vacuous = rep.checked == 0;
    if (rep.vacuous) rep.worst_margin = 0.0;
    rep.infeasible_fraction = rep.checked ? static_cast<double>(rep.infeasible) / static_cast<double>(rep.checked) : 0.0;
    return rep;
}

}  // namespace absc
