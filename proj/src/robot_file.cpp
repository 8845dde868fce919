#include "absc/robot_file.hpp"

#include "json_read.hpp"

#include <fstream>
#include <sstream>

namespace absc {

namespace detail {

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

}  // namespace detail

KinematicChain parse_robot(const std::string& text, const std::string& source) {
    using namespace detail;
    const json doc = parse_json_text(text, source);
    const std::string root = source;
    try {
        const json& jj = require(doc, "joints", "");
        if (!jj.is_array() || jj.empty()) throw ConfigError("joints: expected a non-empty array");
        std::vector<Joint> joints;
        for (std::size_t i = 0; i < jj.size(); ++i) {
            const std::string path = index_path("joints", i);
            Joint j;
            j.name = jj[i].value("name", "joint" + std::to_string(i));
            j.axis = get_vec3(jj[i], "axis", path);
            j.origin = get_vec3(jj[i], "origin_m", path);
            if (jj[i].contains("type") && jj[i]["type"] != "revolute")
                throw ConfigError(path + ".type: only revolute joints are supported");
            if (j.axis.norm() < 1e-12) throw ConfigError(path + ".axis: must be nonzero");
            joints.push_back(j);
        }

        const json& cp = require(doc, "control_points", "");
        if (!cp.is_array() || cp.empty()) throw ConfigError("control_points: expected a non-empty array");
        std::vector<ControlPoint> points;
        for (std::size_t i = 0; i < cp.size(); ++i) {
            const std::string path = index_path("control_points", i);
            ControlPoint p;
            p.name = cp[i].value("name", "point" + std::to_string(i));
            p.link = static_cast<int>(get_int(cp[i], "link", path));
            if (p.link < 0 || p.link >= static_cast<int>(joints.size()))
                throw ConfigError(path + ".link: index out of range");
            p.offset = get_vec3(cp[i], "offset_m", path);
            points.push_back(p);
        }

        std::map<int, double> frozen;
        if (doc.contains("frozen")) {
            const json& fz = doc["frozen"];
            if (!fz.is_array()) throw ConfigError("frozen: expected an array");
            for (std::size_t i = 0; i < fz.size(); ++i) {
                const std::string path = index_path("frozen", i);
                const int j = static_cast<int>(get_int(fz[i], "joint", path));
                if (j < 0 || j >= static_cast<int>(joints.size())) throw ConfigError(path + ".joint: index out of range");
                frozen[j] = get_number(fz[i], "angle_rad", path);
            }
        }

        Eigen::Vector3d base = Eigen::Vector3d::Zero();
        if (doc.contains("base_m")) base = get_vec3(doc, "base_m", "");

        KinematicChain chain(std::move(joints), std::move(points), std::move(frozen), base);
        if (doc.contains("ee_point")) chain.set_ee_point(chain.point_index(get_string(doc, "ee_point", "")));
        return chain;
    } catch (const ConfigError& e) {
        throw ConfigError(root + ": " + e.what());
    }
}

KinematicChain load_robot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open robot file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_robot(ss.str(), path);
}

}  // namespace absc
