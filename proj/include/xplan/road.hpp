#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xplan/geometry.hpp"

namespace xplan {

using LaneId = std::string;

enum class TurnDirection { Left, Right, Straight };

std::string_view to_string(TurnDirection d);
std::optional<TurnDirection> parse_turn_direction(std::string_view text);

struct Lane {
    LaneId id;
    Polyline midline;
    double width = 3.5;
    double speed_limit = 10.0;
    std::optional<LaneId> left;
    std::optional<LaneId> right;
    std::vector<LaneId> successors;
};

struct Connection {
    LaneId incoming;
    LaneId outgoing;
    TurnDirection direction = TurnDirection::Straight;
    bool has_priority = false;
};

struct Junction {
    std::string id;
    std::vector<Connection> connections;
};

// Arc-length interval on a lane. With include_neighbors the region extends
// across the lateral neighbours of the lane (the whole carriageway).
struct Goal {
    LaneId lane;
    double s_min = 0.0;
    double s_max = 0.0;
    std::string label;
    bool include_neighbors = false;
};

struct LanePosition {
    LaneId lane;
    double s = 0.0;
    double offset = 0.0;  // left positive
};

class RoadLayout {
public:
    RoadLayout() = default;
    // Throws ValidationError naming the violated invariant.
    RoadLayout(std::vector<Lane> lanes, std::vector<Junction> junctions);

    const std::vector<Lane>& lanes() const { return lanes_; }
    const std::vector<Junction>& junctions() const { return junctions_; }

    bool has_lane(const LaneId& id) const { return index_.count(id) > 0; }
    const Lane& lane(const LaneId& id) const;

    // Nearest lane by lateral distance; throws PlanningError("off-road") when
    // the point is further than half a lane width plus margin from every lane.
    LanePosition locate(Vec2 p, double margin = 1.0) const;
    Vec2 to_point(const LanePosition& pos) const;
    double heading_at(const LanePosition& pos) const;

    bool in_goal(const LanePosition& pos, const Goal& goal) const;
    // Lanes that count as the goal lane (itself plus neighbours if requested).
    std::vector<LaneId> goal_lanes(const Goal& goal) const;

    // Successor that continues straight on: a straight junction connection, a
    // successor outside any junction turn, or nothing.
    std::optional<LaneId> straight_successor(const LaneId& id) const;
    // The lane followed by its straight successors (cycle safe).
    std::vector<LaneId> straight_chain(const LaneId& id) const;

    std::vector<const Connection*> connections_from(const LaneId& incoming) const;
    const Connection* connection_to(const LaneId& outgoing) const;
    const Junction* junction_of(const Connection& c) const;
    // Lanes whose traffic has right of way: incoming and outgoing lanes of
    // priority connections.
    bool is_priority_lane(const LaneId& id) const;

    // True when `to` can be reached from `from` through successors and lane
    // changes.
    bool reachable(const LaneId& from, const LaneId& to) const;

    RoadLayout translated(Vec2 delta) const;

private:
    std::vector<Lane> lanes_;
    std::vector<Junction> junctions_;
    std::map<LaneId, std::size_t> index_;
};

void validate_goal(const RoadLayout& layout, const Goal& goal);

}  // namespace xplan
