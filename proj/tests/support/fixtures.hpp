#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "xplan/road.hpp"
#include "xplan/scenario.hpp"

namespace fixtures {

using namespace xplan;

inline Lane straight_lane(const std::string& id, Vec2 a, Vec2 b, double step = 1e9) {
    std::vector<Vec2> pts{a};
    double len = distance(a, b);
    int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 1; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
    Lane l;
    l.id = id;
    l.midline = Polyline(pts);
    return l;
}

// Single 100 m lane along +x.
inline RoadLayout single_lane(double length = 100.0) {
    return RoadLayout({straight_lane("A", {0, 0}, {length, 0})}, {});
}

// Two parallel 200 m lanes: R (right, y=0) and L (left, y=3.5).
inline RoadLayout two_lanes() {
    Lane r = straight_lane("R", {0, 0}, {200, 0});
    Lane l = straight_lane("L", {0, 3.5}, {200, 3.5});
    r.left = "L";
    l.right = "R";
    return RoadLayout({r, l}, {});
}

// Lane A (0..60) with a right-turn connector C (quarter circle, r = 10)
// into exit lane E heading south, and a straight successor B.
inline RoadLayout right_turn_junction(bool priority = false) {
    Lane a = straight_lane("A", {0, 0}, {60, 0});
    Lane b = straight_lane("B", {60, 0}, {120, 0});
    std::vector<Vec2> arc;
    for (int i = 0; i <= 30; ++i) {
        double t = kPi / 2.0 - (kPi / 2.0) * i / 30.0;
        arc.push_back({60 + 10 * std::cos(t), -10 + 10 * std::sin(t)});
    }
    Lane c;
    c.id = "C";
    c.midline = Polyline(arc);
    Lane e = straight_lane("E", {70, -10}, {70, -60});
    a.successors = {"B", "C"};
    c.successors = {"E"};
    Junction j{"J1", {{"A", "C", TurnDirection::Right, priority}}};
    return RoadLayout({a, b, c, e}, {j});
}

inline JointState single_vehicle_state(const RoadLayout& layout, const LaneId& lane, double s, double speed,
                                       VehicleId id = 0) {
    JointState js;
    LanePosition lp{lane, s, 0.0};
    js.vehicles[id] = {layout.to_point(lp), layout.heading_at(lp), speed, 0.0};
    js.lanes[id] = lp;
    return js;
}

}  // namespace fixtures
