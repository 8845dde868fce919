#include "absc/sampling.hpp"

#include "absc/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace absc {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

WorldState draw_world_state(const ConcreteSystem& sys, const SamplingDomain& domain, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < domain.max_redraws; ++attempt) {
        WorldState ws;
        ws.x = sample_state(sys, rng);
        for (int i = 0; i < 3; ++i)
            ws.obstacle.center(i) = domain.obstacle_lo(i) + (domain.obstacle_hi(i) - domain.obstacle_lo(i)) * unit(rng);
        ws.obstacle.radius = domain.radius.lo + domain.radius.width() * unit(rng);
        const double d = distance(sys.chain(), ws.x.q, ws.obstacle).d;
        if (domain.d_range.contains(d, 0.0)) return ws;
    }
    throw SamplingError("no state with distance inside the sampling d-range after " +
                        std::to_string(domain.max_redraws) + " draws; check the obstacle region");
}

std::size_t Histogram::total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
    Histogram h;
    if (bins < 1) throw Error("histogram needs at least one bin");
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (values.empty()) {
        h.edges.assign(static_cast<std::size_t>(bins) + 1, 0.0);
        return h;
    }
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (hi <= lo) hi = lo + 1.0;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
    for (double v : values) {
        auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

namespace {

struct SampleResult {
    bool violation = false;
    bool kink = false;
    double M = 0.0;
    double mdot = 0.0;  // max |Mdot| over U
    double lipschitz = 0.0;
};

SampleResult evaluate_sample(const ConcreteSystem& sys, const SamplingDomain& domain, std::uint64_t seed,
                             std::size_t i) {
    auto rng = substream(seed, i);
    const WorldState ws = draw_world_state(sys, domain, rng);
    SampleResult r;
    const AbstractionEval ev = evaluate_abstraction(sys, ws.obstacle, ws.x);
    if (!ev.zero_interior()) {
        r.violation = true;
        return r;
    }
    r.M = ev.signed_radius();
    const MGradient g = M_gradient(sys, ws.obstacle, ws.x, ev.point_id);
    r.kink = g.kink;
    const Interval mdot = mdot_range_at(sys, ws.obstacle, ws.x, g.grad);
    r.mdot = std::max(std::abs(mdot.lo), std::abs(mdot.hi));

    // Lipschitz evidence: one random perturbation of norm 1e-3 with the point pinned.
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd delta(sys.n_x());
    for (int k = 0; k < sys.n_x(); ++k) delta(k) = normal(rng);
    delta *= 1e-3 / delta.norm();
    const ConcreteState xp = ConcreteState::from_stacked(ws.x.stacked() + delta);
    const double mp = evaluate_abstraction(sys, ws.obstacle, xp, ev.point_id).signed_radius();
    r.lipschitz = std::abs(mp - r.M) / 1e-3;
    return r;
}

}  // namespace

SampleStats estimate_stats(const ConcreteSystem& sys, const SamplingDomain& domain, const SamplingOptions& opts) {
    if (opts.n_samples < 100) throw Error("estimate_stats: need at least 100 samples");
    if (!(opts.mdot_inflation >= 1.0)) throw Error("estimate_stats: mdot inflation must be >= 1");

    std::vector<SampleResult> results(opts.n_samples);
    parallel_for(opts.n_samples, opts.jobs,
                 [&](std::size_t i) { results[i] = evaluate_sample(sys, domain, opts.seed, i); });

    SampleStats s;
    s.n_samples = opts.n_samples;
    s.seed = opts.seed;
    s.p = opts.p;
    s.mdot_inflation = opts.mdot_inflation;
    s.m_min = std::numeric_limits<double>::infinity();
    s.m_max = -std::numeric_limits<double>::infinity();
    std::vector<double> ms, mdots;
    ms.reserve(results.size());
    mdots.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (r.violation) {
            ++s.violations;
            continue;
        }
        if (r.kink) ++s.kinked;
        ms.push_back(r.M);
        mdots.push_back(r.mdot);
        if (r.M < s.m_min) {
            s.m_min = r.M;
            s.argmin_m = i;
        }
        if (r.M > s.m_max) {
            s.m_max = r.M;
            s.argmax_m = i;
        }
        if (r.mdot > s.mdot_max_observed) {
            s.mdot_max_observed = r.mdot;
            s.argmax_mdot = i;
        }
        s.lipschitz_est = std::max(s.lipschitz_est, r.lipschitz);
    }

    const double frac = static_cast<double>(s.violations) / static_cast<double>(s.n_samples);
    if (frac > opts.max_violation_fraction || ms.empty()) {
        std::ostringstream msg;
        msg << "abstraction ill-posed on X: " << s.violations << " of " << s.n_samples
            << " samples have 0 outside the implementable abstract control set (" << 100.0 * frac
            << "%); reduce state velocity bounds or enlarge control limits";
        throw SamplingError(msg.str());
    }
    if (s.violations > 0) spdlog::info("estimate_stats: {} assumption violations skipped", s.violations);

    s.mdot_star = s.mdot_max_observed * opts.mdot_inflation;
    s.m_histogram = make_histogram(ms);
    s.mdot_histogram = make_histogram(mdots);
    return s;
}

double sampling_guarantee(double p, double N) {
    if (!(p > 0.0 && p < 1.0)) throw Error("sampling_guarantee: p must lie in (0, 1)");
    if (!(N >= 1.0)) throw Error("sampling_guarantee: N must be >= 1");
    const double miss = std::exp(N * std::log(p));
    return std::pow(1.0 - miss, 3.0);
}

ExtremePoses argextreme_poses(const SampleStats& stats, const ConcreteSystem& sys, const SamplingDomain& domain) {
    auto replay = [&](std::size_t i) {
        auto rng = substream(stats.seed, i);
        ExtremePose pose;
        pose.sample_index = i;
        pose.state = draw_world_state(sys, domain, rng);
        const AbstractionEval ev = evaluate_abstraction(sys, pose.state.obstacle, pose.state.x);
        pose.M = ev.signed_radius();
        const MGradient g = M_gradient(sys, pose.state.obstacle, pose.state.x, ev.point_id);
        const Interval mdot = mdot_range_at(sys, pose.state.obstacle, pose.state.x, g.grad);
        pose.mdot = std::max(std::abs(mdot.lo), std::abs(mdot.hi));
        return pose;
    };
    return ExtremePoses{replay(stats.argmin_m), replay(stats.argmax_m), replay(stats.argmax_mdot)};
}

}  // namespace absc
