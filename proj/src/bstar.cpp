#include "absc/bstar.hpp"

#include "absc/errors.hpp"

#include <cmath>

namespace absc {

namespace {

struct BandSample {
    bool hit = false;
    bool violation = false;
    double phidot_min = 0.0;
};

}  // namespace

BstarEstimate estimate_Bstar_concrete(const ConcreteSystem& sys, const SafetyIndex& index,
                                      const SamplingDomain& domain, const BstarOptions& opts) {
    if (!(opts.band > 0.0)) throw Error("estimate_Bstar_concrete: band must be positive");
    index.validate();

    std::vector<BandSample> res(opts.attempts);
    parallel_for(opts.attempts, opts.jobs, [&](std::size_t i) {
        auto rng = substream(opts.seed, i);
        const WorldState ws = draw_world_state(sys, domain, rng);
        const int pid = critical_point(sys, index, ws.obstacle, ws.x);
        const AbstractionEval ev = evaluate_abstraction(sys, ws.obstacle, ws.x, pid);
        const ExtendedAbstractState z{ev.d, ev.ddot, std::max(ev.signed_radius(), kMInteriorEps)};
        BandSample& r = res[i];
        if (std::abs(phi(z, index)) > opts.band) return;
        r.hit = true;
        if (!ev.zero_interior()) {
            r.violation = true;
            return;
        }
        const PhidotCoefficients pc = phidot_coefficients(sys, index, ws.obstacle, ws.x, pid);
        // min over the box of a u + c
        double m = pc.c;
        for (Eigen::Index j = 0; j < pc.a.size(); ++j)
            m += std::min(pc.a(j) * sys.u_min()(j), pc.a(j) * sys.u_max()(j));
        r.phidot_min = m;
    });

    BstarEstimate out;
    out.attempts = opts.attempts;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        if (!r.hit) continue;
        ++out.hits;
        if (r.violation) {
            ++out.violations;
            continue;
        }
        out.worst_phidot = std::max(out.worst_phidot, r.phidot_min);
        if (r.phidot_min >= 0.0) {
            ++out.infeasible;
            if (out.witnesses.size() < opts.max_witnesses) {
                auto rng = substream(opts.seed, i);
                out.witnesses.push_back(draw_world_state(sys, domain, rng));
            }
        }
    }
    const std::size_t usable = out.hits - out.violations;
    if (usable > 0) out.fraction = static_cast<double>(out.infeasible) / static_cast<double>(usable);
    return out;
}

}  // namespace absc
