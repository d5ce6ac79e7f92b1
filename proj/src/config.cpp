#include "xplan/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

struct Reader {
    const std::string& origin;

    [[noreturn]] void fail(const YAML::Node& n, const std::string& what) const {
        throw ParseError(origin + ":" + std::to_string(n.Mark().line + 1) + ": " + what);
    }

    template <class T>
    T value(const YAML::Node& n, const std::string& key) const {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "setting '" + key + "' has the wrong type");
        }
    }

    void map(const YAML::Node& n, const std::string& key) const {
        if (!n.IsMap()) fail(n, "setting '" + key + "' must be a mapping");
    }
};

void read_planner(PlannerConfig& c, const YAML::Node& n, const Reader& r) {
    r.map(n, "planner");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (key == "iterations") c.iterations = r.value<int>(kv.second, key);
        else if (key == "max_depth") c.max_depth = r.value<int>(kv.second, key);
        else if (key == "exploration") c.exploration = r.value<double>(kv.second, key);
        else r.fail(kv.first, "unknown planner setting '" + key + "'");
    }
}

void read_kinematics(KinematicsConfig& c, const YAML::Node& n, const Reader& r) {
    r.map(n, "kinematics");
    const std::pair<const char*, double*> fields[] = {
        {"max_acceleration", &c.max_acceleration},
        {"comfortable_deceleration", &c.comfortable_deceleration},
        {"max_deceleration", &c.max_deceleration},
        {"lateral_acceleration", &c.lateral_acceleration},
        {"lane_change_duration", &c.lane_change_duration},
        {"give_way_window", &c.give_way_window},
        {"give_way_distance", &c.give_way_distance},
        {"conflict_radius", &c.conflict_radius},
        {"headway", &c.headway},
        {"vehicle_length", &c.vehicle_length},
        {"idm_min_gap", &c.idm_min_gap},
        {"idm_time_headway", &c.idm_time_headway},
        {"stop_hold", &c.stop_hold},
        {"lookahead", &c.lookahead},
        {"min_continue_length", &c.min_continue_length},
        {"collision_radius", &c.collision_radius},
        {"cut_in_offset", &c.cut_in_offset},
    };
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        bool found = false;
        for (const auto& [name, ptr] : fields) {
            if (key == name) {
                *ptr = r.value<double>(kv.second, key);
                if (!(*ptr > 0.0)) r.fail(kv.second, "kinematics setting '" + key + "' must be positive");
                found = true;
            }
        }
        if (!found) r.fail(kv.first, "unknown kinematics setting '" + key + "'");
    }
}

void read_reward(RewardConfig& c, const YAML::Node& n, const Reader& r) {
    r.map(n, "reward");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        auto comp = parse_component(key);
        if (!comp) r.fail(kv.first, "unknown reward component '" + key + "'");
        c.weight(*comp) = r.value<double>(kv.second, key);
    }
}

void read_recognition(RecognitionConfig& c, const YAML::Node& n, const Reader& r) {
    r.map(n, "recognition");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (key == "beta") c.beta = r.value<double>(kv.second, key);
        else if (key == "max_depth") c.max_depth = r.value<int>(kv.second, key);
        else r.fail(kv.first, "unknown recognition setting '" + key + "'");
    }
    if (!(c.beta >= 0.0)) throw ValidationError("recognition beta must be non-negative");
    if (c.max_depth < 1) throw ValidationError("recognition max_depth must be at least 1");
}

void read_string_map(std::map<std::string, std::string>& out, const YAML::Node& n, const std::string& key,
                     const Reader& r) {
    r.map(n, key);
    for (const auto& kv : n) out[kv.first.as<std::string>()] = r.value<std::string>(kv.second, key);
}

void read_phrases(PhraseTable& t, const YAML::Node& n, const Reader& r) {
    r.map(n, "phrases");
    // a preset resets the table before the other keys apply
    if (const auto preset = n["preset"]) {
        const auto name = r.value<std::string>(preset, "preset");
        if (name == "default") t = default_phrases();
        else if (name == "table") t = table_phrases();
        else r.fail(preset, "unknown phrase preset '" + name + "' (default, table)");
    }
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (key == "preset") continue;
        if (key == "ego_subject") t.ego_subject = r.value<std::string>(kv.second, key);
        else if (key == "other_subject") t.other_subject = r.value<std::string>(kv.second, key);
        else if (key == "other_tense") {
            const auto v = r.value<std::string>(kv.second, key);
            if (v == "present") t.other_tense = Tense::NonEgoPresent;
            else if (v == "participle") t.other_tense = Tense::EgoConditional;
            else r.fail(kv.second, "other_tense must be 'present' or 'participle'");
        } else if (key == "participle") read_string_map(t.participle, kv.second, key, r);
        else if (key == "present") read_string_map(t.present, kv.second, key, r);
        else if (key == "outcomes") read_string_map(t.outcomes, kv.second, key, r);
        else if (key == "components") read_string_map(t.components, kv.second, key, r);
        else if (key == "substitutions") {
            if (!kv.second.IsSequence()) r.fail(kv.second, "substitutions must be a list of [from, to] pairs");
            t.substitutions.clear();
            for (const auto& pair : kv.second) {
                if (!pair.IsSequence() || pair.size() != 2) r.fail(pair, "substitution must be a [from, to] pair");
                t.substitutions.emplace_back(r.value<std::string>(pair[0], key), r.value<std::string>(pair[1], key));
            }
        } else r.fail(kv.first, "unknown phrases setting '" + key + "'");
    }
    t.check_total();
}

}  // namespace

void apply_settings(Settings& s, const std::string& yaml_text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull()) return;
    Reader r{origin};
    r.map(root, "settings");
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key == "planner") read_planner(s.planner, kv.second, r);
        else if (key == "kinematics") read_kinematics(s.kinematics, kv.second, r);
        else if (key == "reward") read_reward(s.reward, kv.second, r);
        else if (key == "recognition") read_recognition(s.recognition, kv.second, r);
        else if (key == "phrases") read_phrases(s.phrases, kv.second, r);
        else if (key == "explain") {
            r.map(kv.second, key);
            for (const auto& e : kv.second) {
                const auto k = e.first.as<std::string>();
                if (k == "suppress_certain") s.summary.suppress_certain = r.value<bool>(e.second, k);
                else r.fail(e.first, "unknown explain setting '" + k + "'");
            }
        } else r.fail(kv.first, "unknown settings section '" + key + "'");
    }
    validate(s.reward);
}

Settings resolve_settings(const std::vector<std::string>& layers) {
    Settings s;
    for (std::size_t i = 0; i < layers.size(); ++i) apply_settings(s, layers[i], "settings layer " + std::to_string(i + 1));
    return s;
}

std::optional<std::string> config_from_environment() {
    const char* path = std::getenv("XPLAN_CONFIG");
    if (!path || !*path) return std::nullopt;
    return std::string(path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace xplan
