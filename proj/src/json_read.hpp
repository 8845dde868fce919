#pragma once

// Field accessors that report the offending JSON path on error.

#include "absc/errors.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <limits>
#include <string>
#include <string_view>

namespace absc::detail {

using nlohmann::json;

inline std::string join_path(const std::string& parent, std::string_view key) {
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

inline std::string index_path(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

/// Parse text, converting syntax errors to ConfigError with a line/column.
json parse_json_text(const std::string& text, const std::string& source);

json load_json_file(const std::string& path);

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "expected an object" : path + ": expected an object");
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw ConfigError(join_path(path, key) + ": missing required field");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(path + ": expected a number");
}

inline double get_number(const json& obj, std::string_view key, const std::string& path) {
    return as_number(require(obj, key, path), join_path(path, key));
}

inline double get_number_or(const json& obj, std::string_view key, double fallback, const std::string& path) {
    if (!obj.contains(std::string(key))) return fallback;
    return get_number(obj, key, path);
}

inline long long get_int(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(join_path(path, key) + ": expected an integer");
    return v.get<long long>();
}

inline long long get_int_or(const json& obj, std::string_view key, long long fallback, const std::string& path) {
    if (!obj.contains(std::string(key))) return fallback;
    return get_int(obj, key, path);
}

inline std::string get_string(const json& obj, std::string_view key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) throw ConfigError(join_path(path, key) + ": expected a string");
    return v.get<std::string>();
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& path, Eigen::Index expected = -1) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected)
        throw ConfigError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_number(v[i], index_path(path, i));
    return out;
}

inline Eigen::VectorXd get_vector(const json& obj, std::string_view key, const std::string& path,
                                  Eigen::Index expected = -1) {
    return as_vector(require(obj, key, path), join_path(path, key), expected);
}

inline Eigen::Vector3d get_vec3(const json& obj, std::string_view key, const std::string& path) {
    return get_vector(obj, key, path, 3);
}

}  // namespace absc::detail
