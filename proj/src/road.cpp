#include "xplan/road.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "xplan/errors.hpp"

namespace xplan {

std::string_view to_string(TurnDirection d) {
    switch (d) {
        case TurnDirection::Left:
            return "left";
        case TurnDirection::Right:
            return "right";
        case TurnDirection::Straight:
            return "straight";
    }
    return "straight";
}

std::optional<TurnDirection> parse_turn_direction(std::string_view text) {
    if (text == "left") return TurnDirection::Left;
    if (text == "right") return TurnDirection::Right;
    if (text == "straight") return TurnDirection::Straight;
    return std::nullopt;
}

RoadLayout::RoadLayout(std::vector<Lane> lanes, std::vector<Junction> junctions)
    : lanes_(std::move(lanes)), junctions_(std::move(junctions)) {
    if (lanes_.empty()) {
        throw ValidationError("layout has no lanes");
    }
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
        const Lane& l = lanes_[i];
        if (!index_.emplace(l.id, i).second) {
            throw ValidationError("duplicate lane id '" + l.id + "'");
        }
    }
    for (const Lane& l : lanes_) {
        if (l.midline.points().size() < 2 || !(l.midline.length() > 0.0)) {
            throw ValidationError("degenerate midline on lane '" + l.id + "'");
        }
        if (!(l.width > 0.0)) {
            throw ValidationError("lane '" + l.id + "' has non-positive width");
        }
        if (!(l.speed_limit > 0.0)) {
            throw ValidationError("lane '" + l.id + "' has non-positive speed limit");
        }
        for (const LaneId& s : l.successors) {
            if (!has_lane(s)) {
                throw ValidationError("lane '" + l.id + "' has unknown successor '" + s + "'");
            }
        }
        if (l.left) {
            if (!has_lane(*l.left)) {
                throw ValidationError("lane '" + l.id + "' has unknown left neighbor '" + *l.left + "'");
            }
            if (lane(*l.left).right != l.id) {
                throw ValidationError("asymmetric neighbor relation between '" + l.id + "' and '" + *l.left + "'");
            }
        }
        if (l.right) {
            if (!has_lane(*l.right)) {
                throw ValidationError("lane '" + l.id + "' has unknown right neighbor '" + *l.right + "'");
            }
            if (lane(*l.right).left != l.id) {
                throw ValidationError("asymmetric neighbor relation between '" + l.id + "' and '" + *l.right + "'");
            }
        }
    }
    std::set<std::string> junction_ids;
    for (const Junction& j : junctions_) {
        if (!junction_ids.insert(j.id).second) {
            throw ValidationError("duplicate junction id '" + j.id + "'");
        }
        for (const Connection& c : j.connections) {
            if (!has_lane(c.incoming) || !has_lane(c.outgoing)) {
                throw ValidationError("junction '" + j.id + "' connection references an unknown lane");
            }
            const auto& succ = lane(c.incoming).successors;
            if (std::find(succ.begin(), succ.end(), c.outgoing) == succ.end()) {
                throw ValidationError("junction '" + j.id + "' connects '" + c.incoming + "' to non-successor '" +
                                      c.outgoing + "'");
            }
        }
    }
}

const Lane& RoadLayout::lane(const LaneId& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        throw ValidationError("unknown lane '" + id + "'");
    }
    return lanes_[it->second];
}

LanePosition RoadLayout::locate(Vec2 p, double margin) const {
    const Lane* best = nullptr;
    Polyline::Projection best_proj;
    double best_excess = std::numeric_limits<double>::infinity();
    for (const Lane& l : lanes_) {
        const auto proj = l.midline.project(p);
        // Compare by how far outside the lane the point lies, so wide and
        // narrow lanes are treated alike.
        const double excess = proj.distance - 0.5 * l.width;
        if (excess < best_excess - 1e-9) {
            best_excess = excess;
            best = &l;
            best_proj = proj;
        }
    }
    if (best == nullptr || best_excess > margin) {
        throw PlanningError("off-road: point is not on any lane");
    }
    return {best->id, best_proj.s, best_proj.offset};
}

Vec2 RoadLayout::to_point(const LanePosition& pos) const {
    const Lane& l = lane(pos.lane);
    return l.midline.point_at(pos.s) + l.midline.left_normal_at(pos.s) * pos.offset;
}

double RoadLayout::heading_at(const LanePosition& pos) const { return lane(pos.lane).midline.heading_at(pos.s); }

std::vector<LaneId> RoadLayout::goal_lanes(const Goal& goal) const {
    std::vector<LaneId> out{goal.lane};
    if (!goal.include_neighbors || !has_lane(goal.lane)) {
        return out;
    }
    for (auto next = lane(goal.lane).left; next && std::find(out.begin(), out.end(), *next) == out.end();
         next = lane(*next).left) {
        out.push_back(*next);
    }
    for (auto next = lane(goal.lane).right; next && std::find(out.begin(), out.end(), *next) == out.end();
         next = lane(*next).right) {
        out.push_back(*next);
    }
    return out;
}

bool RoadLayout::in_goal(const LanePosition& pos, const Goal& goal) const {
    if (pos.s < goal.s_min - 1e-9 || pos.s > goal.s_max + 1e-9) {
        return false;
    }
    if (pos.lane == goal.lane) {
        return true;
    }
    if (!goal.include_neighbors) {
        return false;
    }
    const auto lanes = goal_lanes(goal);
    return std::find(lanes.begin(), lanes.end(), pos.lane) != lanes.end();
}

std::vector<const Connection*> RoadLayout::connections_from(const LaneId& incoming) const {
    std::vector<const Connection*> out;
    for (const Junction& j : junctions_) {
        for (const Connection& c : j.connections) {
            if (c.incoming == incoming) {
                out.push_back(&c);
            }
        }
    }
    return out;
}

const Connection* RoadLayout::connection_to(const LaneId& outgoing) const {
    for (const Junction& j : junctions_) {
        for (const Connection& c : j.connections) {
            if (c.outgoing == outgoing) {
                return &c;
            }
        }
    }
    return nullptr;
}

const Junction* RoadLayout::junction_of(const Connection& conn) const {
    for (const Junction& j : junctions_) {
        for (const Connection& c : j.connections) {
            if (&c == &conn) {
                return &j;
            }
        }
    }
    return nullptr;
}

bool RoadLayout::is_priority_lane(const LaneId& id) const {
    for (const Junction& j : junctions_) {
        for (const Connection& c : j.connections) {
            if (c.has_priority && (c.incoming == id || c.outgoing == id)) {
                return true;
            }
        }
    }
    return false;
}

std::optional<LaneId> RoadLayout::straight_successor(const LaneId& id) const {
    const Lane& l = lane(id);
    const auto conns = connections_from(id);
    for (const Connection* c : conns) {
        if (c->direction == TurnDirection::Straight) {
            return c->outgoing;
        }
    }
    for (const LaneId& s : l.successors) {
        const bool is_turn = std::any_of(conns.begin(), conns.end(), [&](const Connection* c) {
            return c->outgoing == s;
        });
        if (!is_turn) {
            return s;
        }
    }
    return std::nullopt;
}

std::vector<LaneId> RoadLayout::straight_chain(const LaneId& id) const {
    std::vector<LaneId> chain{id};
    for (auto next = straight_successor(id); next; next = straight_successor(*next)) {
        if (std::find(chain.begin(), chain.end(), *next) != chain.end()) {
            break;
        }
        chain.push_back(*next);
    }
    return chain;
}

bool RoadLayout::reachable(const LaneId& from, const LaneId& to) const {
    std::set<LaneId> seen{from};
    std::deque<LaneId> open{from};
    while (!open.empty()) {
        const LaneId cur = open.front();
        open.pop_front();
        if (cur == to) {
            return true;
        }
        const Lane& l = lane(cur);
        std::vector<LaneId> next = l.successors;
        if (l.left) next.push_back(*l.left);
        if (l.right) next.push_back(*l.right);
        for (const LaneId& n : next) {
            if (seen.insert(n).second) {
                open.push_back(n);
            }
        }
    }
    return false;
}

RoadLayout RoadLayout::translated(Vec2 delta) const {
    std::vector<Lane> lanes = lanes_;
    for (Lane& l : lanes) {
        l.midline = l.midline.translated(delta);
    }
    return RoadLayout(std::move(lanes), junctions_);
}

void validate_goal(const RoadLayout& layout, const Goal& goal) {
    if (!layout.has_lane(goal.lane)) {
        throw ValidationError("goal '" + goal.label + "' references unknown lane '" + goal.lane + "'");
    }
    const double len = layout.lane(goal.lane).midline.length();
    if (goal.s_min < 0.0 || goal.s_max > len + 1e-9 || goal.s_min > goal.s_max) {
        throw ValidationError("goal '" + goal.label + "' interval outside lane '" + goal.lane + "'");
    }
}

}  // namespace xplan
