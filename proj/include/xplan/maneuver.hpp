#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xplan/road.hpp"
#include "xplan/scenario.hpp"

namespace xplan {

enum class MacroKind { Continue, ChangeLeft, ChangeRight, Exit, ContinueNextExit, Stop };

// A macro action; Exit and Continue-next-exit carry the turn direction.
// The defaulted ordering is the canonical action order used for tie-breaks.
struct MacroAction {
    MacroKind kind = MacroKind::Continue;
    std::optional<TurnDirection> direction;

    auto operator<=>(const MacroAction&) const = default;
    bool operator==(const MacroAction&) const = default;

    // "Continue", "Change-left", "Exit-right", "Continue-next-exit-left", "Stop".
    std::string name() const;
};

std::optional<MacroAction> parse_macro(std::string_view name);
// Every macro name accepted by parse_macro.
std::vector<MacroAction> all_macros();

inline MacroAction continue_macro() { return {MacroKind::Continue, std::nullopt}; }
inline MacroAction stop_macro() { return {MacroKind::Stop, std::nullopt}; }
inline MacroAction change_left() { return {MacroKind::ChangeLeft, std::nullopt}; }
inline MacroAction change_right() { return {MacroKind::ChangeRight, std::nullopt}; }
inline MacroAction exit_macro(TurnDirection d) { return {MacroKind::Exit, d}; }

enum class ManeuverKind { LaneFollow, LaneChangeLeft, LaneChangeRight, TurnLeft, TurnRight, GiveWay, Stop };

std::string_view to_string(ManeuverKind kind);

// Manoeuvres of one macro share a route (the lanes driven, in order); each
// manoeuvre ends once the route arc length reaches end_s.
struct Maneuver {
    ManeuverKind kind = ManeuverKind::LaneFollow;
    std::vector<LaneId> route;
    double end_s = 0.0;
    LaneId target_lane;  // lane changes
    LaneId connector;    // give-way: the junction lane entered afterwards
    std::string junction;
};

struct KinematicsConfig {
    double max_acceleration = 2.0;
    double comfortable_deceleration = 2.0;
    double max_deceleration = 6.0;
    double lateral_acceleration = 2.5;  // caps speed on curves: v^2 * kappa <= a_lat
    double lane_change_duration = 3.0;
    double give_way_window = 4.0;
    double give_way_distance = 15.0;  // approach segment before the stop line
    double conflict_radius = 2.5;
    double headway = 1.5;  // seconds, for lane-change applicability
    double vehicle_length = 4.5;
    double idm_min_gap = 2.0;
    double idm_time_headway = 1.2;
    double stop_hold = 1.0;
    double lookahead = 80.0;
    double min_continue_length = 5.0;
    double collision_radius = 1.5;
    double cut_in_offset = 2.5;  // lateral distance at which a neighbour counts as a leader
};

// One vehicle's motion sampled every dt, starting at global step start_time.
// lanes[i] annotates states[i] with the nearest lane coordinates.
struct Trajectory {
    VehicleId vehicle = 0;
    double dt = 0.1;
    int start_time = 0;
    std::vector<VehicleState> states;
    std::vector<LanePosition> lanes;
    bool truncated = false;     // horizon exhausted before the chain completed
    bool reached_goal = false;  // stopped early inside the requested goal

    bool empty() const { return states.empty(); }
    int end_time() const { return start_time + static_cast<int>(states.size()) - 1; }
    double duration() const { return states.empty() ? 0.0 : dt * static_cast<double>(states.size() - 1); }
    // State at a global step, or nullptr outside the trajectory.
    const VehicleState* at(int time) const;
    const LanePosition* lane_at(int time) const;
    void append(const Trajectory& next);  // next must start at end_time()
};

struct TrajectoryFeatures {
    double time_to_goal = 0.0;
    double jerk = 0.0;
    double angular_acceleration = 0.0;
    double curvature = 0.0;
};

// Fixed trajectories of the other traffic participants.
struct Traffic {
    std::vector<const Trajectory*> vehicles;
};

struct MotionRequest {
    const RoadLayout& layout;
    const KinematicsConfig& config;
    double dt = 0.1;
    int horizon = 300;  // maximum number of steps
    int start_time = 0;
    VehicleId vehicle = 0;
    const Traffic* traffic = nullptr;
    const Goal* goal = nullptr;  // stop as soon as this goal is reached
};

// Macro actions whose first manoeuvre is applicable; sorted canonically.
// `max_distance` bounds how far ahead a junction may be for Exit.
std::vector<MacroAction> applicable_macros(const JointState& state, VehicleId vehicle, const RoadLayout& layout,
                                           const Goal& goal, const KinematicsConfig& config,
                                           double max_distance = 1e9);

std::vector<Maneuver> expand_macro(const MacroAction& macro, const LanePosition& where, const RoadLayout& layout,
                                   const KinematicsConfig& config);
std::vector<Maneuver> expand_macro(const MacroAction& macro, const JointState& state, VehicleId vehicle,
                                   const RoadLayout& layout, const KinematicsConfig& config);

Trajectory generate_trajectory(const std::vector<Maneuver>& maneuvers, const VehicleState& start,
                               const LanePosition& start_lane, const MotionRequest& request);

TrajectoryFeatures extract_features(const Trajectory& trajectory, const Goal& goal, const RoadLayout& layout);

// Lane coordinates of a vehicle in a joint state, locating it if needed.
LanePosition lane_position(const JointState& state, VehicleId vehicle, const RoadLayout& layout);

}  // namespace xplan
