#include "xplan/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "xplan/errors.hpp"
#include "xplan/random.hpp"

namespace xplan {
namespace {

std::string where(const YAML::Node& node, const std::string& origin) {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) {
        return origin;
    }
    return origin + ":" + std::to_string(m.line + 1);
}

YAML::Node require(const YAML::Node& node, const char* key, const std::string& ctx, const std::string& origin) {
    if (!node.IsMap()) {
        throw ParseError(where(node, origin) + ": " + ctx + " must be a mapping");
    }
    YAML::Node child = node[key];
    if (!child) {
        throw ParseError(where(node, origin) + ": " + ctx + " is missing field '" + key + "'");
    }
    return child;
}

template <typename T>
T as(const YAML::Node& node, const std::string& ctx, const std::string& origin) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError(where(node, origin) + ": field " + ctx + " has the wrong type");
    }
}

template <typename T>
T get(const YAML::Node& node, const char* key, const std::string& ctx, const std::string& origin) {
    return as<T>(require(node, key, ctx, origin), ctx + "." + key, origin);
}

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback, const std::string& ctx, const std::string& origin) {
    const YAML::Node child = node[key];
    return child ? as<T>(child, ctx + "." + key, origin) : fallback;
}

Vec2 parse_point(const YAML::Node& node, const std::string& ctx, const std::string& origin) {
    if (!node.IsSequence() || node.size() != 2) {
        throw ParseError(where(node, origin) + ": " + ctx + " must be a [x, y] pair");
    }
    return {as<double>(node[0], ctx, origin), as<double>(node[1], ctx, origin)};
}

// Arc given by centre, radius and start/end angles in degrees, sampled at
// roughly one point per `step` metres.
std::vector<Vec2> arc_points(const YAML::Node& node, const std::string& ctx, const std::string& origin) {
    const Vec2 c = parse_point(require(node, "center", ctx, origin), ctx + ".center", origin);
    const double r = get<double>(node, "radius", ctx, origin);
    const double a0 = get<double>(node, "start_deg", ctx, origin) * kPi / 180.0;
    const double a1 = get<double>(node, "end_deg", ctx, origin) * kPi / 180.0;
    const double step = get_or<double>(node, "step_m", 0.5, ctx, origin);
    if (!(r > 0.0) || !(step > 0.0)) {
        throw ParseError(where(node, origin) + ": " + ctx + " needs positive radius and step");
    }
    const int n = std::max(2, static_cast<int>(std::ceil(std::fabs(a1 - a0) * r / step)) + 1);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = a0 + (a1 - a0) * i / (n - 1);
        pts.push_back(c + unit_from_angle(a) * r);
    }
    return pts;
}

std::vector<Vec2> densify(const std::vector<Vec2>& pts, double step) {
    if (pts.size() < 2) {
        return pts;
    }
    std::vector<Vec2> out{pts.front()};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double len = distance(pts[i - 1], pts[i]);
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int k = 1; k <= n; ++k) {
            out.push_back(pts[i - 1] + (pts[i] - pts[i - 1]) * (static_cast<double>(k) / n));
        }
    }
    return out;
}

Lane parse_lane(const YAML::Node& node, const std::string& origin) {
    Lane lane;
    lane.id = get<std::string>(node, "id", "lane", origin);
    const std::string ctx = "lane '" + lane.id + "'";
    std::vector<Vec2> pts;
    if (const YAML::Node arc = node["arc"]) {
        pts = arc_points(arc, ctx + ".arc", origin);
    } else {
        const YAML::Node mid = require(node, "midline", ctx, origin);
        if (!mid.IsSequence()) {
            throw ParseError(where(mid, origin) + ": " + ctx + ".midline must be a list of points");
        }
        for (const auto& p : mid) {
            pts.push_back(parse_point(p, ctx + ".midline", origin));
        }
        // Long straight segments are split so the heading blend stays local.
        if (pts.size() >= 2) {
            pts = densify(pts, get_or<double>(node, "resample_m", 1e9, ctx, origin));
        }
    }
    lane.midline = Polyline(std::move(pts));
    lane.width = get_or<double>(node, "width", 3.5, ctx, origin);
    lane.speed_limit = get_or<double>(node, "speed_limit", 10.0, ctx, origin);
    if (const YAML::Node l = node["left"]; l && !l.IsNull()) {
        lane.left = as<std::string>(l, ctx + ".left", origin);
    }
    if (const YAML::Node r = node["right"]; r && !r.IsNull()) {
        lane.right = as<std::string>(r, ctx + ".right", origin);
    }
    if (const YAML::Node s = node["successors"]) {
        lane.successors = as<std::vector<std::string>>(s, ctx + ".successors", origin);
    }
    return lane;
}

Junction parse_junction(const YAML::Node& node, const std::string& origin) {
    Junction j;
    j.id = get<std::string>(node, "id", "junction", origin);
    const std::string ctx = "junction '" + j.id + "'";
    const YAML::Node conns = require(node, "connections", ctx, origin);
    for (const auto& c : conns) {
        Connection conn;
        conn.incoming = get<std::string>(c, "incoming", ctx + ".connection", origin);
        conn.outgoing = get<std::string>(c, "outgoing", ctx + ".connection", origin);
        const auto turn = get<std::string>(c, "turn", ctx + ".connection", origin);
        const auto dir = parse_turn_direction(turn);
        if (!dir) {
            throw ParseError(where(c, origin) + ": " + ctx + " has unknown turn direction '" + turn + "'");
        }
        conn.direction = *dir;
        conn.has_priority = get_or<bool>(c, "priority", false, ctx + ".connection", origin);
        j.connections.push_back(conn);
    }
    return j;
}

Goal parse_goal(const YAML::Node& node, const std::string& ctx, const std::string& origin) {
    Goal g;
    g.lane = get<std::string>(node, "lane", ctx, origin);
    const YAML::Node s = require(node, "s", ctx, origin);
    if (!s.IsSequence() || s.size() != 2) {
        throw ParseError(where(s, origin) + ": " + ctx + ".s must be an [s_min, s_max] pair");
    }
    g.s_min = as<double>(s[0], ctx + ".s", origin);
    g.s_max = as<double>(s[1], ctx + ".s", origin);
    g.label = get_or<std::string>(node, "label", g.lane, ctx, origin);
    g.include_neighbors = get_or<bool>(node, "include_neighbors", false, ctx, origin);
    return g;
}

VehicleSpec parse_vehicle(const YAML::Node& node, const std::string& ctx, const std::string& origin) {
    VehicleSpec v;
    v.id = get<int>(node, "id", ctx, origin);
    const std::string vctx = ctx + " " + std::to_string(v.id);
    v.lane = get<std::string>(node, "lane", vctx, origin);
    v.s = get<double>(node, "s", vctx, origin);
    v.spawn_range = get_or<double>(node, "spawn_range_m", 0.0, vctx, origin);
    const YAML::Node speeds = require(node, "speed_range_mps", vctx, origin);
    if (!speeds.IsSequence() || speeds.size() != 2) {
        throw ParseError(where(speeds, origin) + ": " + vctx + ".speed_range_mps must be a [min, max] pair");
    }
    v.speed_min = as<double>(speeds[0], vctx + ".speed_range_mps", origin);
    v.speed_max = as<double>(speeds[1], vctx + ".speed_range_mps", origin);
    v.acceleration = get_or<double>(node, "acceleration", 0.0, vctx, origin);
    if (const YAML::Node goals = node["goals"]) {
        for (const auto& g : goals) {
            v.goals.push_back(parse_goal(g, vctx + ".goal", origin));
        }
    }
    return v;
}

}  // namespace

const VehicleSpec& Scenario::vehicle(VehicleId id) const {
    if (id == ego_id) {
        return ego;
    }
    for (const VehicleSpec& v : vehicles) {
        if (v.id == id) {
            return v;
        }
    }
    throw ValidationError("unknown vehicle id " + std::to_string(id));
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ParseError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) {
        throw ParseError(origin + ": scenario must be a mapping");
    }

    Scenario sc;
    sc.source_hash = fnv1a_hex(text);
    sc.name = get_or<std::string>(root, "name", "scenario", "scenario", origin);
    sc.timestep = get<double>(root, "timestep_s", "scenario", origin);
    sc.horizon = get<int>(root, "horizon_steps", "scenario", origin);
    sc.observation = get_or<double>(root, "observation_s", 2.0, "scenario", origin);

    const YAML::Node layout = require(root, "layout", "scenario", origin);
    std::vector<Lane> lanes;
    const YAML::Node lane_nodes = require(layout, "lanes", "layout", origin);
    if (!lane_nodes.IsSequence()) {
        throw ParseError(where(lane_nodes, origin) + ": layout.lanes must be a list");
    }
    for (const auto& l : lane_nodes) {
        lanes.push_back(parse_lane(l, origin));
    }
    std::vector<Junction> junctions;
    if (const YAML::Node js = layout["junctions"]) {
        for (const auto& j : js) {
            junctions.push_back(parse_junction(j, origin));
        }
    }
    sc.layout = RoadLayout(std::move(lanes), std::move(junctions));

    const YAML::Node ego = root["ego"];
    if (!ego) {
        throw ValidationError("ego absent");
    }
    sc.ego = parse_vehicle(ego, "ego", origin);
    sc.ego_id = sc.ego.id;
    const YAML::Node goal = ego["goal"];
    if (!goal) {
        throw ValidationError("ego goal absent");
    }
    sc.ego_goal = parse_goal(goal, "ego.goal", origin);
    sc.ego.goals = {sc.ego_goal};

    if (const YAML::Node vs = root["vehicles"]) {
        for (const auto& v : vs) {
            sc.vehicles.push_back(parse_vehicle(v, "vehicle", origin));
        }
    }
    std::sort(sc.vehicles.begin(), sc.vehicles.end(),
              [](const VehicleSpec& a, const VehicleSpec& b) { return a.id < b.id; });

    if (const YAML::Node settings = root["settings"]) {
        YAML::Emitter out;
        out << settings;
        sc.settings_yaml = out.c_str();
    }

    validate(sc);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string() + ": cannot open scenario file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

void validate(const Scenario& sc) {
    if (!(sc.timestep > 0.0)) {
        throw ValidationError("timestep must be positive");
    }
    if (sc.horizon < 1) {
        throw ValidationError("horizon must be at least one step");
    }
    if (sc.observation < 0.0) {
        throw ValidationError("observation window must be non-negative");
    }
    validate_goal(sc.layout, sc.ego_goal);

    std::set<VehicleId> ids{sc.ego_id};
    auto check_vehicle = [&](const VehicleSpec& v) {
        const std::string name = "vehicle " + std::to_string(v.id);
        if (!sc.layout.has_lane(v.lane)) {
            throw ValidationError(name + " starts on unknown lane '" + v.lane + "'");
        }
        if (v.spawn_range < 0.0) {
            throw ValidationError(name + " has a negative spawn range");
        }
        if (v.speed_min < 0.0 || v.speed_max < v.speed_min) {
            throw ValidationError(name + " has an invalid speed range");
        }
        const double len = sc.layout.lane(v.lane).midline.length();
        if (v.s - 0.5 * v.spawn_range < 0.0 || v.s + 0.5 * v.spawn_range > len) {
            throw ValidationError(name + " spawn range leaves lane '" + v.lane + "'");
        }
    };
    check_vehicle(sc.ego);
    if (!sc.layout.reachable(sc.ego.lane, sc.ego_goal.lane)) {
        throw ValidationError("ego goal unreachable");
    }
    for (const VehicleSpec& v : sc.vehicles) {
        if (!ids.insert(v.id).second) {
            throw ValidationError("duplicate vehicle id " + std::to_string(v.id));
        }
        check_vehicle(v);
        if (v.goals.empty()) {
            throw ValidationError("vehicle " + std::to_string(v.id) + " has no goals");
        }
        for (const Goal& g : v.goals) {
            validate_goal(sc.layout, g);
            if (!sc.layout.reachable(v.lane, g.lane)) {
                throw ValidationError("goal '" + g.label + "' of vehicle " + std::to_string(v.id) + " unreachable");
            }
        }
    }
}

JointState sample_initial_states(const Scenario& sc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    JointState js;
    js.time = 0;
    std::vector<const VehicleSpec*> all{&sc.ego};
    for (const VehicleSpec& v : sc.vehicles) {
        all.push_back(&v);
    }
    std::sort(all.begin(), all.end(), [](const VehicleSpec* a, const VehicleSpec* b) { return a->id < b->id; });
    for (const VehicleSpec* v : all) {
        const double ds = uniform(rng, -0.5 * v->spawn_range, 0.5 * v->spawn_range);
        const double speed = uniform(rng, v->speed_min, v->speed_max);
        const LanePosition pos{v->lane, v->spawn_range > 0.0 ? v->s + ds : v->s, 0.0};
        VehicleState st;
        st.position = sc.layout.to_point(pos);
        st.heading = sc.layout.heading_at(pos);
        st.speed = speed;
        st.acceleration = v->acceleration;
        js.vehicles[v->id] = st;
        js.lanes[v->id] = pos;
    }
    return js;
}

}  // namespace xplan
