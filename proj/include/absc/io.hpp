#pragma once

#include "absc/bstar.hpp"
#include "absc/sampling.hpp"
#include "absc/simulator.hpp"
#include "absc/synthesis.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace absc {

/// Writes to path + ".partial" and renames, so an interrupted run leaves only marked partial files.
void write_text_atomic(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

nlohmann::json stats_to_json(const SampleStats& s);
SampleStats stats_from_json(const nlohmann::json& j, const std::string& source);

std::string histogram_csv(const Histogram& h);

nlohmann::json index_to_json(const SafetyIndex& index);
SafetyIndex index_from_json(const nlohmann::json& j, const std::string& source);

nlohmann::json report_to_json(const FeasibilityReport& r);
nlohmann::json bstar_to_json(const BstarEstimate& b);
nlohmann::json world_state_to_json(const WorldState& w);

/// One row per configuration.
std::string suite_csv(const std::vector<SuiteRow>& rows, const std::string& config_hash);

struct SuiteCsvRow {
    std::string config;
    std::size_t trials = 0;
    std::size_t collisions = 0;
    std::size_t infeasible_steps = 0;
    std::size_t goals_reached = 0;
    std::size_t faulted = 0;
    double min_d = 0.0;
    double m_lo = 0.0;
    double m_hi = 0.0;
    double mdot_max = 0.0;
};

std::vector<SuiteCsvRow> parse_suite_csv(const std::string& text, const std::string& source);

/// Shortest round-trip formatting for CSV cells.
std::string fmt_double(double v);

}  // namespace absc
