#include "absc/cli.hpp"

#include "absc/config.hpp"
#include "absc/errors.hpp"
#include "absc/io.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace absc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

void setup_logging() {
    static bool done = false;
    if (!done) {
        auto logger = spdlog::stderr_color_mt("absc");
        spdlog::set_default_logger(logger);
        done = true;
    }
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("ABSC_LOG")) {
        const auto l = spdlog::level::from_str(lvl);
        // from_str maps unknown names to off; only accept real names
        if (l != spdlog::level::off || std::string(lvl) == "off") spdlog::set_level(l);
    }
}

struct Context {
    RunConfig cfg;
    fs::path out;
    int jobs = 1;
};

fs::path stats_path(const fs::path& out, const std::string& system) { return out / "stats" / system / "stats.json"; }

json read_json(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError(p.string() + ": missing artifact");
    const std::string text = read_text_file(p.string());
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        throw ConfigError(p.string() + ": malformed JSON");
    }
}

std::string short_num(double v) {
    std::ostringstream os;
    os << std::setprecision(5) << v;
    return os.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Merges one command's entry into run_manifest.json; a manifest for another config is replaced.
void update_manifest(const Context& ctx, const std::string& command, const json& entry) {
    const fs::path p = ctx.out / "run_manifest.json";
    json m;
    if (fs::exists(p)) {
        try {
            m = json::parse(read_text_file(p.string()));
        } catch (const json::parse_error&) {
            m = json();
        }
        if (!m.is_object() || m.value("config_hash", "") != ctx.cfg.hash) {
            if (m.is_object()) spdlog::warn("run_manifest.json belongs to another configuration; replacing it");
            m = json();
        }
    }
    if (m.is_null()) {
        json systems = json::array();
        for (const auto& s : ctx.cfg.systems) {
            json fz = json::object();
            for (const auto& [j, a] : s.frozen) fz[std::to_string(j)] = a;
            systems.push_back(json{{"name", s.name}, {"robot_file", s.robot_file}, {"frozen_rad", fz}});
        }
        m = json{{"tool", "absc"},
                 {"version", kVersion},
                 {"config_path", ctx.cfg.source},
                 {"config_hash", ctx.cfg.hash},
                 {"config", ctx.cfg.resolved},
                 {"systems", systems},
                 {"seeds",
                  {{"sampling", ctx.cfg.sampling.seed},
                   {"simulation", ctx.cfg.simulation.seed},
                   {"concrete_check", ctx.cfg.bstar.seed}}},
                 {"commands", json::object()}};
    }
    m["commands"][command] = entry;
    write_text_atomic(p.string(), dump(m));
}

int cmd_sample(const Context& ctx, std::ostream& out) {
    SamplingOptions opts = ctx.cfg.sampling;
    opts.jobs = ctx.jobs;
    json outputs = json::array();
    for (const auto& spec : ctx.cfg.systems) {
        const ConcreteSystem sys = build_system(ctx.cfg, spec);
        const SampleStats st = estimate_stats(sys, ctx.cfg.sampling_domain, opts);
        const ExtremePoses poses = argextreme_poses(st, sys, ctx.cfg.sampling_domain);
        json j = stats_to_json(st);
        j["system"] = spec.name;
        j["n_q"] = sys.n_q();
        j["config_hash"] = ctx.cfg.hash;
        auto pose_json = [](const ExtremePose& p) {
            json w = world_state_to_json(p.state);
            w["sample_index"] = p.sample_index;
            w["M"] = p.M;
            w["mdot"] = p.mdot;
            return w;
        };
        j["extreme_poses"] = json{{"m_min", pose_json(poses.m_min)},
                                  {"m_max", pose_json(poses.m_max)},
                                  {"mdot_star", pose_json(poses.mdot_star)}};
        const fs::path dir = ctx.out / "stats" / spec.name;
        write_text_atomic((dir / "stats.json").string(), dump(j));
        write_text_atomic((dir / "m_histogram.csv").string(), histogram_csv(st.m_histogram));
        write_text_atomic((dir / "mdot_histogram.csv").string(), histogram_csv(st.mdot_histogram));
        outputs.push_back((dir / "stats.json").string());
        out << spec.name << ": n=" << st.n_samples << " m_min=" << fmt_double(st.m_min)
            << " m_max=" << fmt_double(st.m_max) << " mdot_star=" << fmt_double(st.mdot_star)
            << " violations=" << st.violations << "\n";
    }
    update_manifest(ctx, "sample", json{{"outputs", outputs}, {"seed", ctx.cfg.sampling.seed}});
    return kExitOk;
}

int cmd_synthesize(const Context& ctx, const std::vector<std::string>& stats_files, std::ostream& out) {
    std::vector<std::string> files = stats_files;
    if (files.empty())
        for (const auto& s : ctx.cfg.systems) files.push_back(stats_path(ctx.out, s.name).string());

    SafetyIndex index;
    index.d_min = ctx.cfg.d_min;
    index.ranges = ctx.cfg.ranges;
    index.m_min = std::numeric_limits<double>::infinity();
    index.m_max = 0.0;
    index.mdot_star = 0.0;
    std::optional<double> p;
    json sources = json::array();
    for (const auto& f : files) {
        const SampleStats st = stats_from_json(read_json(f), f);
        if (p && *p != st.p) throw ConfigError(f + ": norm_p differs from the other stats files");
        p = st.p;
        index.m_min = std::min(index.m_min, st.m_min);
        index.m_max = std::max(index.m_max, st.m_max);
        index.mdot_star = std::max(index.mdot_star, st.mdot_star);
        sources.push_back(f);
    }
    index.p = *p;
    index.k = synthesize_k(index.ranges, index.d_min, index.m_min, index.mdot_star);
    index.validate();

    json j = index_to_json(index);
    j["config_hash"] = ctx.cfg.hash;
    j["sources"] = sources;
    const fs::path path = ctx.out / "index.json";
    write_text_atomic(path.string(), dump(j));
    update_manifest(ctx, "synthesize", json{{"outputs", {path.string()}}, {"k", index.k}});
    out << "k=" << std::fixed << std::setprecision(4) << index.k << " (m_min=" << fmt_double(index.m_min)
        << ", mdot_star=" << fmt_double(index.mdot_star) << ")\n";
    return kExitOk;
}

int cmd_verify(const Context& ctx, const std::string& index_file, double k_scale, std::ostream& out) {
    const std::string src = index_file.empty() ? (ctx.out / "index.json").string() : index_file;
    SafetyIndex index = index_from_json(read_json(src), src);
    if (!(k_scale > 0.0)) throw ConfigError("--k-scale must be positive");
    index.k *= k_scale;

    const FeasibilityReport rep = verify_feasibility_grid(index, ctx.cfg.resolution);
    json j = report_to_json(rep);
    j["index"] = index_to_json(index);
    j["k_scale"] = k_scale;
    j["config_hash"] = ctx.cfg.hash;

    bool concrete_ok = true;
    if (ctx.cfg.bstar.attempts > 0) {
        json c = json::object();
        BstarOptions bo = ctx.cfg.bstar;
        bo.jobs = ctx.jobs;
        for (const auto& spec : ctx.cfg.systems) {
            const ConcreteSystem sys = build_system(ctx.cfg, spec);
            const BstarEstimate b = estimate_Bstar_concrete(sys, index, ctx.cfg.sampling_domain, bo);
            c[spec.name] = bstar_to_json(b);
            concrete_ok = concrete_ok && b.infeasible == 0;
            out << spec.name << ": concrete boundary samples " << b.hits << ", without decreasing control "
                << b.infeasible << "\n";
        }
        j["concrete"] = c;
    }
    const fs::path path = ctx.out / "feasibility_report.json";
    write_text_atomic(path.string(), dump(j));
    update_manifest(ctx, "verify",
                    json{{"outputs", {path.string()}}, {"k_scale", k_scale}, {"infeasible", rep.infeasible}});
    out << "checked " << rep.checked << " boundary cells, infeasible " << rep.infeasible
        << (rep.vacuous ? " (vacuous: no boundary cell in range)" : "") << "\n";
    return rep.passed() && concrete_ok ? kExitOk : kExitSafetyFailure;
}

int cmd_simulate(const Context& ctx, const std::string& index_file, bool no_safety, bool traces, std::ostream& out) {
    const std::string src = index_file.empty() ? (ctx.out / "index.json").string() : index_file;
    const SafetyIndex index = index_from_json(read_json(src), src);

    SuiteOptions so = ctx.cfg.simulation;
    so.jobs = ctx.jobs;
    so.safety_enabled = !no_safety;
    if (traces) so.trace_dir = (ctx.out / "traces").string();

    std::vector<SuiteRow> rows;
    std::size_t collisions = 0, infeasible = 0, trials = 0;
    for (const auto& spec : ctx.cfg.systems) {
        const ConcreteSystem sys = build_system(ctx.cfg, spec);
        std::optional<SampleStats> st;
        const fs::path sp = stats_path(ctx.out, spec.name);
        if (fs::exists(sp)) st = stats_from_json(read_json(sp), sp.string());
        else spdlog::warn("{}: no stats.json; sampled columns left empty", spec.name);
        std::vector<SuiteEntry> one{SuiteEntry{spec.name, sys, st}};
        auto r = run_suite(one, index, ctx.cfg.controller, workspace_for(ctx.cfg, sys), so);
        collisions += r.front().collisions;
        infeasible += r.front().infeasible_steps;
        trials += r.front().trials;
        out << spec.name << ": trials=" << r.front().trials << " collisions=" << r.front().collisions
            << " infeasible_steps=" << r.front().infeasible_steps << " min_d=" << fmt_double(r.front().min_d) << "\n";
        rows.push_back(std::move(r.front()));
    }
    const fs::path path = ctx.out / "suite_report.csv";
    write_text_atomic(path.string(), suite_csv(rows, ctx.cfg.hash));
    update_manifest(ctx, "simulate",
                    json{{"outputs", {path.string()}},
                         {"seed", ctx.cfg.simulation.seed},
                         {"safety_enabled", !no_safety},
                         {"trials", trials},
                         {"collisions", collisions},
                         {"infeasible_steps", infeasible}});
    out << "total: " << collisions << " collisions, " << infeasible << " infeasible-relaxed steps over " << trials
        << " trials\n";
    return collisions == 0 && infeasible == 0 ? kExitOk : kExitSafetyFailure;
}

int cmd_report(const fs::path& out_dir, std::ostream& out) {
    const json manifest = read_json(out_dir / "run_manifest.json");
    const json index = read_json(out_dir / "index.json");
    const json feas = read_json(out_dir / "feasibility_report.json");
    const fs::path suite_path = out_dir / "suite_report.csv";
    if (!fs::exists(suite_path)) throw ConfigError(suite_path.string() + ": missing artifact");
    const auto rows = parse_suite_csv(read_text_file(suite_path.string()), suite_path.string());
    if (!manifest.contains("systems") || !manifest.contains("seeds"))
        throw ConfigError((out_dir / "run_manifest.json").string() + ": malformed manifest");

    std::ostringstream md;
    md << "# Safety run summary\n\n";
    md << "- config: `" << manifest.value("config_path", "") << "`\n";
    md << "- config hash: `" << manifest.value("config_hash", "") << "`\n";
    md << "- seeds: sampling " << manifest["seeds"].value("sampling", 0ULL) << ", simulation "
       << manifest["seeds"].value("simulation", 0ULL) << ", concrete check "
       << manifest["seeds"].value("concrete_check", 0ULL) << "\n\n";

    md << "## Sampled statistics\n\n| system | n | M min | M max | Mdot* | violations | kinked |\n"
          "|---|---|---|---|---|---|---|\n";
    for (const auto& s : manifest["systems"]) {
        const std::string name = s.value("name", "");
        const fs::path sp = stats_path(out_dir, name);
        const SampleStats st = stats_from_json(read_json(sp), sp.string());
        md << "| " << name << " | " << st.n_samples << " | " << short_num(st.m_min) << " | " << short_num(st.m_max)
           << " | " << short_num(st.mdot_star) << " | " << st.violations << " | " << st.kinked << " |\n";
    }

    const SafetyIndex idx = index_from_json(index, (out_dir / "index.json").string());
    md << "\n## Safety index\n\n";
    md << "phi = max(d_min - d, d_min^2 - d^2 - k ddot / M) with d_min = " << short_num(idx.d_min)
       << " m, k = " << short_num(idx.k) << ", M in [" << short_num(idx.m_min) << ", " << short_num(idx.m_max)
       << "], Mdot* = " << short_num(idx.mdot_star) << ".\n\n";

    md << "## Abstract verification\n\n";
    md << "- grid resolution: " << feas.value("resolution", 0) << "\n";
    md << "- boundary cells checked: " << feas.value("checked", 0ULL) << "\n";
    md << "- infeasible cells: " << feas.value("infeasible", 0ULL) << "\n";
    md << "- result: " << (feas.value("passed", false) ? "passed" : "FAILED")
       << (feas.value("vacuous", false) ? " (vacuous)" : "") << "\n\n";

    md << "## Closed-loop suite\n\n| config | trials | collisions | infeasible steps | goals reached | min d [m] | "
          "M range | Mdot max |\n|---|---|---|---|---|---|---|---|\n";
    std::size_t collisions = 0, infeasible = 0, trials = 0;
    for (const auto& r : rows) {
        md << "| " << r.config << " | " << r.trials << " | " << r.collisions << " | " << r.infeasible_steps << " | "
           << r.goals_reached << " | " << short_num(r.min_d) << " | [" << short_num(r.m_lo) << ", "
           << short_num(r.m_hi) << "] | " << short_num(r.mdot_max) << " |\n";
        collisions += r.collisions;
        infeasible += r.infeasible_steps;
        trials += r.trials;
    }
    md << "\nTotal: " << collisions << " collisions, " << infeasible << " infeasible-relaxed steps over " << trials
       << " trials.\n";

    const fs::path path = out_dir / "summary.md";
    write_text_atomic(path.string(), md.str());
    out << "wrote " << path.string() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    setup_logging();
    CLI::App app{"Abstraction-based safe control toolkit", "absc"};
    app.require_subcommand(1, 1);

    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out_dir = "out";
    app.add_option("--config", config, "Run configuration (JSON)");
    app.add_option("--seed", seed, "Override the sampling and simulation seeds");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "Artifact directory");

    auto* sample = app.add_subcommand("sample", "Monte Carlo statistics of M and Mdot (stats.json, histograms)");
    auto* synth = app.add_subcommand("synthesize", "Synthesize k from stats.json (index.json)");
    std::vector<std::string> stats_files;
    synth->add_option("--stats", stats_files, "stats.json files (default: every configured system)");
    auto* verify = app.add_subcommand("verify", "Grid verification of persistent feasibility");
    std::string index_file;
    double k_scale = 1.0;
    verify->add_option("--index", index_file, "index.json (default: <out-dir>/index.json)");
    verify->add_option("--k-scale", k_scale, "Multiply k before verifying");
    auto* simulate = app.add_subcommand("simulate", "Closed-loop scenario suite (suite_report.csv)");
    bool no_safety = false, traces = false;
    simulate->add_option("--index", index_file, "index.json (default: <out-dir>/index.json)");
    simulate->add_flag("--no-safety", no_safety, "Apply the reference control unfiltered (ablation)");
    simulate->add_flag("--traces", traces, "Write per-trial trace CSVs under <out-dir>/traces");
    auto* report = app.add_subcommand("report", "Collate artifacts into summary.md");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (report->parsed()) return cmd_report(out_dir, out);

        if (config.empty()) throw ConfigError("--config is required for this command");
        json overrides;
        if (seed) overrides = json{{"sampling", {{"seed", *seed}}}, {"simulation", {{"seed", *seed}}}};
        Context ctx{load_config(config, overrides), fs::path(out_dir), jobs};
        fs::create_directories(ctx.out);

        if (sample->parsed()) return cmd_sample(ctx, out);
        if (synth->parsed()) return cmd_synthesize(ctx, stats_files, out);
        if (verify->parsed()) return cmd_verify(ctx, index_file, k_scale, out);
        if (simulate->parsed()) return cmd_simulate(ctx, index_file, no_safety, traces, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace absc
