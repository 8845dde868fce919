#include "absc/config.hpp"

#include "absc/errors.hpp"
#include "absc/robot_file.hpp"

#include "json_read.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace absc {

using detail::json;

namespace {

// Keep in sync with config/defaults.json (a test compares them).
constexpr const char* kDefaults = R"({
  "systems": [],
  "jacobian_mode": "analytic",
  "control_limits": { "qddot_max_rad_s2": [10.0] },
  "state_bounds": { "q_lo_rad": null, "q_hi_rad": null, "qdot_max_rad_s": [1.0] },
  "sampling": {
    "n_samples": 10000,
    "seed": 1,
    "mdot_inflation": 1.2,
    "norm_p": 2.0,
    "obstacle_lo_m": [-0.8, -0.8, 0.0],
    "obstacle_hi_m": [0.8, 0.8, 1.1],
    "obstacle_radius_m": [0.05, 0.15],
    "d_range_m": [0.0, 0.8],
    "max_redraws": 1000,
    "max_violation_fraction": 0.1
  },
  "index": { "d_min_m": 0.05, "d_range_m": [0.0, 0.8], "ddot_range_m_s": [-1.0, 1.0] },
  "verification": { "resolution": 256, "concrete_attempts": 0, "concrete_band": 0.05, "concrete_seed": 11 },
  "simulation": {
    "n_trials": 100,
    "seed": 7,
    "duration_s": 10.0,
    "dt_s": 0.002,
    "trace_every": 10,
    "workspace": {
      "goal_center_m": [0.0, 0.0, 0.333],
      "goal_radius_m": [0.35, 0.7],
      "goal_z_min_m": 0.1,
      "obstacle_lo_m": [-0.8, -0.8, 0.0],
      "obstacle_hi_m": [0.8, 0.8, 1.1],
      "obstacle_radius_m": [0.05, 0.15],
      "on_path_fraction": 0.5,
      "on_path_jitter_m": 0.03,
      "q0_lo_rad": null,
      "q0_hi_rad": null,
      "max_attempts_per_scenario": 200
    }
  },
  "controller": {
    "eta_fraction": 0.02,
    "trigger_band": 0.01,
    "predictive_trigger": true,
    "kp_1_s2": 20.0,
    "kd_1_s": 6.0
  }
})";

void check_keys(const json& user, const json& defaults, const std::string& path) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = detail::join_path(path, it.key());
        if (!defaults.contains(it.key())) throw ConfigError(p + ": unknown key");
        const json& d = defaults[it.key()];
        if (d.is_object()) {
            if (!it.value().is_object()) throw ConfigError(p + ": expected an object");
            check_keys(it.value(), d, p);
        }
    }
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (v.is_null()) return {};
    if (v.is_number()) return {v.get<double>()};
    const Eigen::VectorXd x = detail::as_vector(v, path);
    return std::vector<double>(x.data(), x.data() + x.size());
}

Interval get_interval(const json& obj, const char* key, const std::string& path) {
    const std::string p = detail::join_path(path, key);
    const Eigen::VectorXd v = detail::get_vector(obj, key, path, 2);
    if (!(v(0) <= v(1))) throw ConfigError(p + ": expected [lo, hi] with lo <= hi");
    return Interval(v(0), v(1));
}

void positive(double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path + ": must be a positive finite number");
}

void fraction(double v, const std::string& path) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(path + ": must lie in [0, 1]");
}

std::uint64_t seed_value(const json& obj, const char* key, const std::string& path) {
    const long long s = detail::get_int(obj, key, path);
    if (s < 0) throw ConfigError(detail::join_path(path, key) + ": must be non-negative");
    return static_cast<std::uint64_t>(s);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Per-full-joint list to the actuated joints; single entries broadcast.
Eigen::VectorXd per_actuated(const std::vector<double>& v, const KinematicChain& chain, double fallback,
                             const std::string& what) {
    const auto& act = chain.actuated();
    Eigen::VectorXd out(static_cast<Eigen::Index>(act.size()));
    if (!v.empty() && v.size() != 1 && v.size() != static_cast<std::size_t>(chain.n_joints()))
        throw ConfigError(what + ": expected 1 or " + std::to_string(chain.n_joints()) + " entries, got " +
                          std::to_string(v.size()));
    for (std::size_t i = 0; i < act.size(); ++i) {
        double x = fallback;
        if (v.size() == 1) x = v[0];
        else if (!v.empty()) x = v[static_cast<std::size_t>(act[i])];
        out(static_cast<Eigen::Index>(i)) = x;
    }
    return out;
}

}  // namespace

json default_config_json() { return json::parse(kDefaults); }

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

RunConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir,
                       const json& overrides) {
    using namespace detail;
    json user = parse_json_text(text, source);
    if (!user.is_object()) throw ConfigError(source + ": expected a JSON object at top level");
    json doc = default_config_json();

    RunConfig cfg;
    cfg.source = source;
    try {
        check_keys(user, doc, "");
        doc.merge_patch(user);
        if (!overrides.is_null()) {
            check_keys(overrides, doc, "");
            doc.merge_patch(overrides);
        }
        // merge_patch drops null members; restore optional per-joint arrays
        for (const char* k : {"q_lo_rad", "q_hi_rad"})
            if (!doc["state_bounds"].contains(k)) doc["state_bounds"][k] = nullptr;
        for (const char* k : {"q0_lo_rad", "q0_hi_rad"})
            if (!doc["simulation"]["workspace"].contains(k)) doc["simulation"]["workspace"][k] = nullptr;

        const json& sys = doc["systems"];
        if (!sys.is_array() || sys.empty()) throw ConfigError("systems: expected a non-empty array");
        for (std::size_t i = 0; i < sys.size(); ++i) {
            const std::string p = index_path("systems", i);
            SystemSpec s;
            s.name = get_string(sys[i], "name", p);
            if (s.name.empty() || s.name.find_first_of("/\\ ,") != std::string::npos)
                throw ConfigError(p + ".name: must be non-empty without separators, spaces or commas");
            for (const auto& other : cfg.systems)
                if (other.name == s.name) throw ConfigError(p + ".name: duplicate system name");
            const std::filesystem::path rf = get_string(sys[i], "robot_file", p);
            s.robot_file = (rf.is_absolute() ? rf : std::filesystem::path(base_dir) / rf).lexically_normal().string();
            if (sys[i].contains("frozen")) {
                const json& fz = sys[i]["frozen"];
                if (!fz.is_array()) throw ConfigError(p + ".frozen: expected an array");
                for (std::size_t j = 0; j < fz.size(); ++j) {
                    const std::string fp = index_path(p + ".frozen", j);
                    s.frozen[static_cast<int>(get_int(fz[j], "joint", fp))] = get_number(fz[j], "angle_rad", fp);
                }
            }
            for (auto it = sys[i].begin(); it != sys[i].end(); ++it)
                if (it.key() != "name" && it.key() != "robot_file" && it.key() != "frozen")
                    throw ConfigError(join_path(p, it.key()) + ": unknown key");
            cfg.systems.push_back(std::move(s));
        }

        const std::string mode = get_string(doc, "jacobian_mode", "");
        if (mode == "analytic") cfg.jacobian_mode = JacobianMode::Analytic;
        else if (mode == "finite_difference") cfg.jacobian_mode = JacobianMode::FiniteDifference;
        else throw ConfigError("jacobian_mode: expected \"analytic\" or \"finite_difference\"");

        cfg.qddot_max = number_list(require(doc["control_limits"], "qddot_max_rad_s2", "control_limits"),
                                    "control_limits.qddot_max_rad_s2");
        if (cfg.qddot_max.empty()) throw ConfigError("control_limits.qddot_max_rad_s2: required");
        for (double v : cfg.qddot_max) positive(v, "control_limits.qddot_max_rad_s2");

        const json& sb = doc["state_bounds"];
        cfg.q_lo = number_list(sb["q_lo_rad"], "state_bounds.q_lo_rad");
        cfg.q_hi = number_list(sb["q_hi_rad"], "state_bounds.q_hi_rad");
        if (cfg.q_lo.size() != cfg.q_hi.size()) throw ConfigError("state_bounds: q_lo_rad and q_hi_rad differ in length");
        for (std::size_t i = 0; i < cfg.q_lo.size(); ++i)
            if (!(cfg.q_lo[i] <= cfg.q_hi[i])) throw ConfigError(index_path("state_bounds.q_lo_rad", i) + ": exceeds q_hi_rad");
        cfg.qdot_max = number_list(sb["qdot_max_rad_s"], "state_bounds.qdot_max_rad_s");
        if (cfg.qdot_max.empty()) throw ConfigError("state_bounds.qdot_max_rad_s: required");
        for (double v : cfg.qdot_max)
            if (!(v >= 0.0)) throw ConfigError("state_bounds.qdot_max_rad_s: must be non-negative");

        const json& sm = doc["sampling"];
        const long long n = get_int(sm, "n_samples", "sampling");
        if (n < 100) throw ConfigError("sampling.n_samples: must be >= 100");
        cfg.sampling.n_samples = static_cast<std::size_t>(n);
        cfg.sampling.seed = seed_value(sm, "seed", "sampling");
        cfg.sampling.mdot_inflation = get_number(sm, "mdot_inflation", "sampling");
        if (!(cfg.sampling.mdot_inflation >= 1.0)) throw ConfigError("sampling.mdot_inflation: must be >= 1");
        cfg.sampling.p = get_number(sm, "norm_p", "sampling");
        if (!(cfg.sampling.p >= 1.0)) throw ConfigError("sampling.norm_p: must be >= 1 (or \"inf\")");
        cfg.sampling.max_violation_fraction = get_number(sm, "max_violation_fraction", "sampling");
        fraction(cfg.sampling.max_violation_fraction, "sampling.max_violation_fraction");
        cfg.sampling_domain.obstacle_lo = get_vec3(sm, "obstacle_lo_m", "sampling");
        cfg.sampling_domain.obstacle_hi = get_vec3(sm, "obstacle_hi_m", "sampling");
        if ((cfg.sampling_domain.obstacle_hi - cfg.sampling_domain.obstacle_lo).minCoeff() < 0.0)
            throw ConfigError("sampling.obstacle_hi_m: must be >= obstacle_lo_m");
        cfg.sampling_domain.radius = get_interval(sm, "obstacle_radius_m", "sampling");
        cfg.sampling_domain.d_range = get_interval(sm, "d_range_m", "sampling");
        cfg.sampling_domain.max_redraws = static_cast<int>(get_int(sm, "max_redraws", "sampling"));
        if (cfg.sampling_domain.max_redraws < 1) throw ConfigError("sampling.max_redraws: must be >= 1");

        const json& ix = doc["index"];
        cfg.d_min = get_number(ix, "d_min_m", "index");
        positive(cfg.d_min, "index.d_min_m");
        cfg.ranges.d = get_interval(ix, "d_range_m", "index");
        cfg.ranges.ddot = get_interval(ix, "ddot_range_m_s", "index");

        const json& vf = doc["verification"];
        cfg.resolution = static_cast<int>(get_int(vf, "resolution", "verification"));
        if (cfg.resolution < 16 || cfg.resolution > 8192)
            throw ConfigError("verification.resolution: must lie in [16, 8192]");
        const long long ca = get_int(vf, "concrete_attempts", "verification");
        if (ca < 0) throw ConfigError("verification.concrete_attempts: must be >= 0");
        cfg.bstar.attempts = static_cast<std::size_t>(ca);
        cfg.bstar.band = get_number(vf, "concrete_band", "verification");
        positive(cfg.bstar.band, "verification.concrete_band");
        cfg.bstar.seed = seed_value(vf, "concrete_seed", "verification");

        const json& sim = doc["simulation"];
        const long long nt = get_int(sim, "n_trials", "simulation");
        if (nt < 1) throw ConfigError("simulation.n_trials: must be >= 1");
        cfg.simulation.n_trials = static_cast<std::size_t>(nt);
        cfg.simulation.seed = seed_value(sim, "seed", "simulation");
        cfg.simulation.duration = get_number(sim, "duration_s", "simulation");
        positive(cfg.simulation.duration, "simulation.duration_s");
        cfg.simulation.dt = get_number(sim, "dt_s", "simulation");
        positive(cfg.simulation.dt, "simulation.dt_s");
        if (cfg.simulation.dt > cfg.simulation.duration) throw ConfigError("simulation.dt_s: exceeds duration_s");
        cfg.simulation.trace_every = static_cast<int>(get_int(sim, "trace_every", "simulation"));
        if (cfg.simulation.trace_every < 1) throw ConfigError("simulation.trace_every: must be >= 1");

        const json& ws = sim["workspace"];
        const std::string wp = "simulation.workspace";
        cfg.workspace.goal_center = get_vec3(ws, "goal_center_m", wp);
        cfg.workspace.goal_radius = get_interval(ws, "goal_radius_m", wp);
        cfg.workspace.goal_z_min = get_number(ws, "goal_z_min_m", wp);
        cfg.workspace.obstacle_lo = get_vec3(ws, "obstacle_lo_m", wp);
        cfg.workspace.obstacle_hi = get_vec3(ws, "obstacle_hi_m", wp);
        if ((cfg.workspace.obstacle_hi - cfg.workspace.obstacle_lo).minCoeff() < 0.0)
            throw ConfigError(wp + ".obstacle_hi_m: must be >= obstacle_lo_m");
        cfg.workspace.obstacle_radius = get_interval(ws, "obstacle_radius_m", wp);
        cfg.workspace.on_path_fraction = get_number(ws, "on_path_fraction", wp);
        fraction(cfg.workspace.on_path_fraction, wp + ".on_path_fraction");
        cfg.workspace.on_path_jitter = get_number(ws, "on_path_jitter_m", wp);
        if (!(cfg.workspace.on_path_jitter >= 0.0)) throw ConfigError(wp + ".on_path_jitter_m: must be >= 0");
        cfg.workspace.max_attempts_per_scenario = static_cast<int>(get_int(ws, "max_attempts_per_scenario", wp));
        if (cfg.workspace.max_attempts_per_scenario < 1) throw ConfigError(wp + ".max_attempts_per_scenario: must be >= 1");
        cfg.q0_lo = number_list(ws["q0_lo_rad"], wp + ".q0_lo_rad");
        cfg.q0_hi = number_list(ws["q0_hi_rad"], wp + ".q0_hi_rad");
        if (cfg.q0_lo.size() != cfg.q0_hi.size()) throw ConfigError(wp + ": q0_lo_rad and q0_hi_rad differ in length");

        const json& ct = doc["controller"];
        cfg.controller.eta_fraction = get_number(ct, "eta_fraction", "controller");
        if (!(cfg.controller.eta_fraction >= 0.0 && cfg.controller.eta_fraction < 1.0))
            throw ConfigError("controller.eta_fraction: must lie in [0, 1)");
        cfg.controller.trigger_band = get_number(ct, "trigger_band", "controller");
        if (!(cfg.controller.trigger_band >= 0.0)) throw ConfigError("controller.trigger_band: must be >= 0");
        const json& pt = require(ct, "predictive_trigger", "controller");
        if (!pt.is_boolean()) throw ConfigError("controller.predictive_trigger: expected true or false");
        cfg.controller.lookahead_s = pt.get<bool>() ? cfg.simulation.dt : 0.0;
        cfg.controller.kp = get_number(ct, "kp_1_s2", "controller");
        cfg.controller.kd = get_number(ct, "kd_1_s", "controller");
        if (!(cfg.controller.kp >= 0.0) || !(cfg.controller.kd >= 0.0))
            throw ConfigError("controller: gains must be non-negative");
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }

    cfg.resolved = doc;
    std::string blob = doc.dump();
    for (const auto& s : cfg.systems) {
        if (!std::filesystem::exists(s.robot_file))
            throw ConfigError(source + ": systems." + s.name + ".robot_file: " + s.robot_file + " does not exist");
        blob += read_text(s.robot_file);
    }
    cfg.hash = fnv1a_hex(blob);
    return cfg;
}

RunConfig load_config(const std::string& path, const json& overrides) {
    const std::string text = read_text(path);
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(text, path, dir.empty() ? "." : dir.string(), overrides);
}

ConcreteSystem build_system(const RunConfig& cfg, const SystemSpec& spec) {
    KinematicChain chain = load_robot(spec.robot_file);
    if (!spec.frozen.empty()) {
        std::map<int, double> frozen = chain.frozen();
        for (const auto& [j, a] : spec.frozen) frozen[j] = a;
        chain = chain.with_frozen(std::move(frozen));
    }
    const std::string where = spec.name + ": ";
    try {
        const Eigen::VectorXd umax = per_actuated(cfg.qddot_max, chain, 0.0, "control_limits.qddot_max_rad_s2");
        StateBounds b;
        b.q_lo = per_actuated(cfg.q_lo, chain, -M_PI, "state_bounds.q_lo_rad");
        b.q_hi = per_actuated(cfg.q_hi, chain, M_PI, "state_bounds.q_hi_rad");
        b.qdot_hi = per_actuated(cfg.qdot_max, chain, 0.0, "state_bounds.qdot_max_rad_s");
        b.qdot_lo = -b.qdot_hi;
        return ConcreteSystem(std::move(chain), Polytope::symmetric_box(umax), std::move(b), cfg.jacobian_mode);
    } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
    }
}

Workspace workspace_for(const RunConfig& cfg, const ConcreteSystem& sys) {
    Workspace ws = cfg.workspace;
    if (!cfg.q0_lo.empty()) {
        StateBounds b = sys.bounds();
        b.q_lo = per_actuated(cfg.q0_lo, sys.chain(), 0.0, "simulation.workspace.q0_lo_rad");
        b.q_hi = per_actuated(cfg.q0_hi, sys.chain(), 0.0, "simulation.workspace.q0_hi_rad");
        ws.q0_bounds = b;
    }
    return ws;
}

}  // namespace absc
