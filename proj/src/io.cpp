#include "absc/io.hpp"

#include "absc/errors.hpp"

#include "json_read.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace absc {

using detail::json;

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError(tmp + ": cannot open for writing");
        out << text;
        if (!out) throw ConfigError(tmp + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json histogram_json(const Histogram& h) { return json{{"edges", h.edges}, {"counts", h.counts}}; }

Histogram histogram_from(const json& j, const std::string& path) {
    Histogram h;
    const json& e = detail::require(j, "edges", path);
    const json& c = detail::require(j, "counts", path);
    if (!e.is_array() || !c.is_array() || e.size() != c.size() + 1)
        throw ConfigError(path + ": edges must have one more entry than counts");
    for (std::size_t i = 0; i < e.size(); ++i) h.edges.push_back(detail::as_number(e[i], detail::index_path(path + ".edges", i)));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i].is_number_unsigned() && !c[i].is_number_integer())
            throw ConfigError(detail::index_path(path + ".counts", i) + ": expected a count");
        h.counts.push_back(c[i].get<std::size_t>());
    }
    return h;
}

std::size_t get_count(const json& j, const char* key, const std::string& path) {
    const long long v = detail::get_int(j, key, path);
    if (v < 0) throw ConfigError(detail::join_path(path, key) + ": must be non-negative");
    return static_cast<std::size_t>(v);
}

const char* branch_name(Branch b) { return b == Branch::Phi0 ? "phi0" : "phi_star"; }

}  // namespace

json stats_to_json(const SampleStats& s) {
    return json{{"n_samples", s.n_samples},
                {"m_min", s.m_min},
                {"m_max", s.m_max},
                {"mdot_max_observed", s.mdot_max_observed},
                {"mdot_inflation", s.mdot_inflation},
                {"mdot_star", s.mdot_star},
                {"lipschitz_est", s.lipschitz_est},
                {"kinked", s.kinked},
                {"violations", s.violations},
                {"seed", s.seed},
                {"norm_p", number_or_null(s.p)},
                {"argmin_m", s.argmin_m},
                {"argmax_m", s.argmax_m},
                {"argmax_mdot", s.argmax_mdot},
                {"m_histogram", histogram_json(s.m_histogram)},
                {"mdot_histogram", histogram_json(s.mdot_histogram)}};
}

SampleStats stats_from_json(const json& j, const std::string& source) {
    using namespace detail;
    SampleStats s;
    try {
        s.n_samples = get_count(j, "n_samples", "");
        s.m_min = get_number(j, "m_min", "");
        s.m_max = get_number(j, "m_max", "");
        s.mdot_max_observed = get_number(j, "mdot_max_observed", "");
        s.mdot_inflation = get_number(j, "mdot_inflation", "");
        s.mdot_star = get_number(j, "mdot_star", "");
        s.lipschitz_est = get_number(j, "lipschitz_est", "");
        s.kinked = get_count(j, "kinked", "");
        s.violations = get_count(j, "violations", "");
        const json& seed = require(j, "seed", "");
        if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw ConfigError("seed: expected an integer");
        s.seed = seed.get<std::uint64_t>();
        s.p = require(j, "norm_p", "").is_null() ? std::numeric_limits<double>::infinity() : get_number(j, "norm_p", "");
        s.argmin_m = get_count(j, "argmin_m", "");
        s.argmax_m = get_count(j, "argmax_m", "");
        s.argmax_mdot = get_count(j, "argmax_mdot", "");
        s.m_histogram = histogram_from(require(j, "m_histogram", ""), "m_histogram");
        s.mdot_histogram = histogram_from(require(j, "mdot_histogram", ""), "mdot_histogram");
        if (!(s.m_min > 0.0)) throw ConfigError("m_min: must be positive");
        if (!(s.m_min <= s.m_max)) throw ConfigError("m_max: must be >= m_min");
        if (!(s.mdot_star >= 0.0)) throw ConfigError("mdot_star: must be non-negative");
        if (s.violations > s.n_samples) throw ConfigError("violations: exceeds n_samples");
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return s;
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        os << fmt_double(h.edges[i]) << ',' << fmt_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
    return os.str();
}

json index_to_json(const SafetyIndex& index) {
    return json{{"d_min_m", index.d_min},
                {"k", index.k},
                {"norm_p", number_or_null(index.p)},
                {"m_min", index.m_min},
                {"m_max", index.m_max},
                {"mdot_star", index.mdot_star},
                {"d_range_m", {index.ranges.d.lo, index.ranges.d.hi}},
                {"ddot_range_m_s", {index.ranges.ddot.lo, index.ranges.ddot.hi}}};
}

SafetyIndex index_from_json(const json& j, const std::string& source) {
    using namespace detail;
    SafetyIndex s;
    try {
        s.d_min = get_number(j, "d_min_m", "");
        s.k = get_number(j, "k", "");
        s.p = require(j, "norm_p", "").is_null() ? std::numeric_limits<double>::infinity() : get_number(j, "norm_p", "");
        s.m_min = get_number(j, "m_min", "");
        s.m_max = get_number(j, "m_max", "");
        s.mdot_star = get_number(j, "mdot_star", "");
        const Eigen::VectorXd d = get_vector(j, "d_range_m", "", 2);
        const Eigen::VectorXd v = get_vector(j, "ddot_range_m_s", "", 2);
        if (!(d(0) <= d(1)) || !(v(0) <= v(1))) throw ConfigError("ranges: expected [lo, hi] with lo <= hi");
        s.ranges.d = Interval(d(0), d(1));
        s.ranges.ddot = Interval(v(0), v(1));
        s.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return s;
}

json report_to_json(const FeasibilityReport& r) {
    json w = json::array();
    for (const auto& x : r.witnesses)
        w.push_back(json{{"d", x.d}, {"ddot", x.ddot}, {"M", x.M}, {"margin", x.margin}, {"branch", branch_name(x.branch)}});
    return json{{"resolution", r.resolution},
                {"checked", r.checked},
                {"infeasible", r.infeasible},
                {"infeasible_fraction", r.infeasible_fraction},
                {"worst_margin", number_or_null(r.worst_margin)},
                {"vacuous", r.vacuous},
                {"phi0_cells", r.phi0_cells},
                {"passed", r.passed()},
                {"witnesses", w}};
}

json world_state_to_json(const WorldState& w) {
    return json{{"q_rad", std::vector<double>(w.x.q.data(), w.x.q.data() + w.x.q.size())},
                {"qdot_rad_s", std::vector<double>(w.x.qdot.data(), w.x.qdot.data() + w.x.qdot.size())},
                {"obstacle_center_m", {w.obstacle.center.x(), w.obstacle.center.y(), w.obstacle.center.z()}},
                {"obstacle_radius_m", w.obstacle.radius}};
}

json bstar_to_json(const BstarEstimate& b) {
    json w = json::array();
    for (const auto& s : b.witnesses) w.push_back(world_state_to_json(s));
    return json{{"attempts", b.attempts},
                {"hits", b.hits},
                {"infeasible", b.infeasible},
                {"violations", b.violations},
                {"worst_phidot_min", number_or_null(b.worst_phidot)},
                {"fraction", b.fraction ? json(*b.fraction) : json(nullptr)},
                {"witnesses", w}};
}

std::string suite_csv(const std::vector<SuiteRow>& rows, const std::string& config_hash) {
    std::ostringstream os;
    os << "config,trials,collisions,infeasible_steps,goals_reached,faulted,below_m_min_steps,violation_steps,"
          "min_d_m,observed_m_lo,observed_m_hi,observed_mdot_max,sampled_m_min,sampled_m_max,sampled_mdot_star,"
          "config_hash\n";
    for (const auto& r : rows) {
        os << r.name << ',' << r.trials << ',' << r.collisions << ',' << r.infeasible_steps << ',' << r.goals_reached
           << ',' << r.faulted << ',' << r.below_m_min_steps << ',' << r.violation_steps << ',' << fmt_double(r.min_d)
           << ',' << fmt_double(r.m_lo) << ',' << fmt_double(r.m_hi) << ',' << fmt_double(r.mdot_max) << ',';
        if (r.stats)
            os << fmt_double(r.stats->m_min) << ',' << fmt_double(r.stats->m_max) << ','
               << fmt_double(r.stats->mdot_star);
        else
            os << ",,";
        os << ',' << config_hash << '\n';
    }
    return os.str();
}

std::vector<SuiteCsvRow> parse_suite_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("config,trials,collisions,infeasible_steps", 0) != 0)
        throw ConfigError(source + ": not a suite report (bad header)");
    std::vector<SuiteCsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 12) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 16 columns");
        try {
            SuiteCsvRow r;
            r.config = cells[0];
            r.trials = std::stoull(cells[1]);
            r.collisions = std::stoull(cells[2]);
            r.infeasible_steps = std::stoull(cells[3]);
            r.goals_reached = std::stoull(cells[4]);
            r.faulted = std::stoull(cells[5]);
            r.min_d = std::stod(cells[8]);
            r.m_lo = std::stod(cells[9]);
            r.m_hi = std::stod(cells[10]);
            r.mdot_max = std::stod(cells[11]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

}  // namespace absc
