#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xplan/geometry.hpp"
#include "xplan/road.hpp"

namespace xplan {

using VehicleId = int;

struct VehicleState {
    Vec2 position;
    double heading = 0.0;  // counter-clockwise from +x, in (-pi, pi]
    double speed = 0.0;
    double acceleration = 0.0;
};

struct JointState {
    int time = 0;
    std::map<VehicleId, VehicleState> vehicles;
    // Lane coordinates of each vehicle where known.
    std::map<VehicleId, LanePosition> lanes;
};

struct VehicleSpec {
    VehicleId id = 0;
    LaneId lane;
    double s = 0.0;
    double spawn_range = 0.0;  // total width of the longitudinal interval, centred on s
    double speed_min = 0.0;
    double speed_max = 0.0;
    double acceleration = 0.0;
    std::vector<Goal> goals;
};

struct Scenario {
    std::string name;
    RoadLayout layout;
    VehicleId ego_id = 0;
    Goal ego_goal;
    VehicleSpec ego;
    std::vector<VehicleSpec> vehicles;  // non-ego traffic, sorted by id
    double timestep = 0.1;
    int horizon = 300;
    // Length of the observed history used by goal recognition.
    double observation = 2.0;
    // Optional `settings` block, re-emitted as YAML text.
    std::string settings_yaml;
    // FNV-1a hash of the source text.
    std::string source_hash;

    const VehicleSpec& vehicle(VehicleId id) const;
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

// Checks every scenario invariant; throws ValidationError.
void validate(const Scenario& scenario);

// Longitudinal offset uniform in [-range/2, range/2] around the nominal arc
// length, speed uniform in the speed range. Pure in (scenario, seed).
JointState sample_initial_states(const Scenario& scenario, std::uint64_t seed);

std::string fnv1a_hex(const std::string& text);

}  // namespace xplan
