#pragma once

#include "absc/bstar.hpp"
#include "absc/controller.hpp"
#include "absc/dynamics.hpp"
#include "absc/sampling.hpp"
#include "absc/simulator.hpp"
#include "absc/synthesis.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace absc {

struct SystemSpec {
    std::string name;
    std::string robot_file;         // resolved against the config file's directory
    std::map<int, double> frozen;   // extra frozen joints on top of the robot file's
};

/// Everything a run needs. Values not present in the user file come from default_config_json().
struct RunConfig {
    std::string source;
    std::vector<SystemSpec> systems;

    std::vector<double> qddot_max;  // one entry (broadcast) or one per full joint [rad/s^2]
    std::vector<double> q_lo, q_hi; // per full joint [rad]; empty means [-pi, pi]
    std::vector<double> qdot_max;   // one entry or one per full joint [rad/s]
    JacobianMode jacobian_mode = JacobianMode::Analytic;

    SamplingOptions sampling;
    SamplingDomain sampling_domain;

    double d_min = 0.05;
    IndexRanges ranges;
    int resolution = 256;
    BstarOptions bstar;  // attempts == 0 skips the concrete boundary check

    SuiteOptions simulation;
    Workspace workspace;
    std::vector<double> q0_lo, q0_hi;  // per full joint; empty means the state bounds

    ControllerParams controller;

    nlohmann::json resolved;  // defaults merged with the user file
    std::string hash;         // FNV-1a over the resolved config and robot file contents
};

/// The documented defaults (mirrored by config/defaults.json).
nlohmann::json default_config_json();

/// overrides are merged after the user file (used for command-line overrides such as --seed).
RunConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir,
                       const nlohmann::json& overrides = nullptr);
RunConfig load_config(const std::string& path, const nlohmann::json& overrides = nullptr);

/// Robot + frozen overrides + limits with frozen joints dropped from the per-joint arrays.
ConcreteSystem build_system(const RunConfig& cfg, const SystemSpec& spec);

/// Workspace with q0 bounds mapped onto the system's actuated joints.
Workspace workspace_for(const RunConfig& cfg, const ConcreteSystem& sys);

std::string fnv1a_hex(const std::string& data);

}  // namespace absc
