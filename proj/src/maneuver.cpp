#include "xplan/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

struct NameEntry {
    const char* name;
    MacroAction macro;
};

const std::vector<NameEntry>& name_table() {
    static const std::vector<NameEntry> table = {
        {"Continue", {MacroKind::Continue, std::nullopt}},
        {"Change-left", {MacroKind::ChangeLeft, std::nullopt}},
        {"Change-right", {MacroKind::ChangeRight, std::nullopt}},
        {"Exit-left", {MacroKind::Exit, TurnDirection::Left}},
        {"Exit-right", {MacroKind::Exit, TurnDirection::Right}},
        {"Exit-straight", {MacroKind::Exit, TurnDirection::Straight}},
        {"Continue-next-exit-left", {MacroKind::ContinueNextExit, TurnDirection::Left}},
        {"Continue-next-exit-right", {MacroKind::ContinueNextExit, TurnDirection::Right}},
        {"Continue-next-exit-straight", {MacroKind::ContinueNextExit, TurnDirection::Straight}},
        {"Stop", {MacroKind::Stop, std::nullopt}},
    };
    return table;
}

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double smoothstep_rate(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 * u * (1.0 - u);
}

// A sequence of lanes driven one after another, addressed by a single arc
// length.
class Route {
public:
    Route(const RoadLayout& layout, std::vector<LaneId> lanes) : layout_(&layout), lanes_(std::move(lanes)) {
        if (lanes_.empty()) throw PlanningError("empty route");
        double acc = 0.0;
        for (const auto& id : lanes_) {
            offsets_.push_back(acc);
            acc += layout.lane(id).midline.length();
        }
        length_ = acc;
        build_caps();
    }

    const std::vector<LaneId>& lanes() const { return lanes_; }
    double length() const { return length_; }

    std::optional<double> offset_of(const LaneId& id) const {
        for (std::size_t i = 0; i < lanes_.size(); ++i)
            if (lanes_[i] == id) return offsets_[i];
        return std::nullopt;
    }

    std::size_t index_at(double s) const {
        std::size_t i = 0;
        while (i + 1 < lanes_.size() && s >= offsets_[i + 1]) ++i;
        return i;
    }

    const Lane& lane_at(double s) const { return layout_->lane(lanes_[index_at(s)]); }

    double local(double s) const { return s - offsets_[index_at(s)]; }

    Vec2 point(double s, double d) const {
        const Lane& l = lane_at(s);
        double ls = local(s);
        return l.midline.point_at(ls) + l.midline.left_normal_at(ls) * d;
    }

    // Route position of a point that lies within `radius` of the lane at s or
    // the one after it (a vehicle cutting in from a neighbouring lane).
    std::optional<double> cut_in_position(Vec2 p, double s, double radius) const {
        const std::size_t i = index_at(std::min(s, length_));
        for (std::size_t k = i; k < std::min(i + 2, lanes_.size()); ++k) {
            const Polyline& mid = layout_->lane(lanes_[k]).midline;
            auto pr = mid.project(p);
            if (pr.distance <= radius && pr.s > 0.0 && pr.s < mid.length()) return offsets_[k] + pr.s;
        }
        return std::nullopt;
    }

    double tangent(double s) const {
        const Lane& l = lane_at(s);
        return l.midline.heading_at(local(s));
    }

    // Highest speed compatible with limits and curvature ahead, braking at b.
    double speed_cap(double s, double lookahead, double b) const {
        double cap = lane_at(std::min(s, length_)).speed_limit;
        for (const auto& [sk, vk] : caps_) {
            // a curve vertex just behind still bounds the speed
            if (sk < s - 1.0) continue;
            if (sk < s) {
                cap = std::min(cap, vk);
                continue;
            }
            if (sk > s + lookahead) break;
            cap = std::min(cap, std::sqrt(vk * vk + 2.0 * b * (sk - s)));
        }
        return cap;
    }

    // Point-wise caps at s (curvature), used when already on the curve.
    double local_cap(double s) const {
        double cap = lane_at(std::min(s, length_)).speed_limit;
        // nearest cap points on either side
        for (const auto& [sk, vk] : caps_) {
            if (std::abs(sk - s) < 1.0) cap = std::min(cap, vk);
        }
        return cap;
    }

    void set_lateral_acceleration(double a) {
        lateral_ = a;
        build_caps();
    }

private:
    void build_caps() {
        caps_.clear();
        for (std::size_t i = 0; i < lanes_.size(); ++i) {
            const Lane& l = layout_->lane(lanes_[i]);
            caps_.emplace_back(offsets_[i], l.speed_limit);
            const auto& arc = l.midline.arc_lengths();
            for (std::size_t k = 1; k + 1 < arc.size(); ++k) {
                double kappa = l.midline.vertex_curvature(k);
                if (kappa < 1e-6) continue;
                caps_.emplace_back(offsets_[i] + arc[k], std::sqrt(lateral_ / kappa));
            }
        }
        std::sort(caps_.begin(), caps_.end());
    }

    const RoadLayout* layout_;
    std::vector<LaneId> lanes_;
    std::vector<double> offsets_;
    double length_ = 0.0;
    double lateral_ = 2.5;
    std::vector<std::pair<double, double>> caps_;
};

// Chain of lanes starting with `id`, as a route.
std::vector<LaneId> chain_from(const RoadLayout& layout, const LaneId& id) { return layout.straight_chain(id); }

struct Leader {
    double gap = std::numeric_limits<double>::infinity();
    double speed = 0.0;
};

// Nearest vehicle ahead on the route at global step `time`.
Leader find_leader(const Route& route, double s, const MotionRequest& req, int time) {
    Leader best;
    if (!req.traffic) return best;
    for (const Trajectory* other : req.traffic->vehicles) {
        if (!other || other->vehicle == req.vehicle) continue;
        const VehicleState* st = other->at(time);
        const LanePosition* lp = other->lane_at(time);
        if (!st || !lp) continue;
        std::optional<double> pos_opt;
        if (auto off = route.offset_of(lp->lane)) pos_opt = *off + lp->s;
        else pos_opt = route.cut_in_position(st->position, s, req.config.cut_in_offset);
        if (!pos_opt) continue;
        double pos = *pos_opt;
        double gap = pos - s - req.config.vehicle_length;
        if (pos <= s) continue;
        if (gap < best.gap) {
            best.gap = gap;
            best.speed = st->speed;
        }
    }
    return best;
}

double idm_acceleration(double v, double v_des, const Leader& leader, const KinematicsConfig& c, double dt) {
    double a;
    if (v <= v_des)
        a = std::min(c.max_acceleration, (v_des - v) / dt);
    else
        a = std::max(-1.5 * c.comfortable_deceleration, (v_des - v) / dt);
    if (std::isfinite(leader.gap)) {
        double dv = v - leader.speed;
        double s_star = c.idm_min_gap +
                        std::max(0.0, v * c.idm_time_headway +
                                          v * dv / (2.0 * std::sqrt(c.max_acceleration * c.comfortable_deceleration)));
        double gap = std::max(leader.gap, 0.1);
        double ratio = v / std::max(v_des, 0.1);
        double a_idm = c.max_acceleration * (1.0 - std::pow(std::min(ratio, 1.0), 4) - (s_star / gap) * (s_star / gap));
        a = std::min(a, a_idm);
    }
    return std::max(a, -c.max_deceleration);
}

class Generator {
public:
    Generator(const VehicleState& start, const LanePosition& start_lane, const MotionRequest& req)
        : req_(req), v_(start.speed), heading_(start.heading) {
        traj_.vehicle = req.vehicle;
        traj_.dt = req.dt;
        traj_.start_time = req.start_time;
        traj_.states.push_back(start);
        traj_.lanes.push_back(start_lane);
        current_lane_ = start_lane;
        if (req.goal && req.layout.in_goal(start_lane, *req.goal)) {
            traj_.reached_goal = true;
            finished_ = true;
        }
    }

    bool finished() const { return finished_; }
    Trajectory take() { return std::move(traj_); }

    void run(const Maneuver& m) {
        if (finished_) return;
        anchor(m.route);
        switch (m.kind) {
            case ManeuverKind::LaneFollow:
            case ManeuverKind::TurnLeft:
            case ManeuverKind::TurnRight: follow(m.end_s); break;
            case ManeuverKind::GiveWay: give_way(m); break;
            case ManeuverKind::LaneChangeLeft:
            case ManeuverKind::LaneChangeRight: lane_change(m); break;
            case ManeuverKind::Stop: stop(); break;
        }
    }

private:
    int time() const { return req_.start_time + static_cast<int>(traj_.states.size()) - 1; }
    int steps() const { return static_cast<int>(traj_.states.size()) - 1; }

    // Places the vehicle on a (possibly new) route.
    void anchor(const std::vector<LaneId>& lanes) {
        if (route_ && route_->lanes() == lanes) return;
        route_.emplace(req_.layout, lanes);
        route_->set_lateral_acceleration(req_.config.lateral_acceleration);
        auto off = route_->offset_of(current_lane_.lane);
        if (off) {
            s_ = *off + current_lane_.s;
            d_ = current_lane_.offset;
        } else {
            // project onto the nearest lane of the route
            double best = std::numeric_limits<double>::infinity();
            Vec2 p = traj_.states.back().position;
            for (const auto& id : lanes) {
                auto pr = req_.layout.lane(id).midline.project(p);
                if (pr.distance < best) {
                    best = pr.distance;
                    s_ = *route_->offset_of(id) + pr.s;
                    d_ = pr.offset;
                }
            }
        }
    }

    bool at_horizon() const { return steps() >= req_.horizon; }

    // One integration step. `a` is the commanded acceleration, `dd` the
    // lateral displacement requested for this step, `lat_rate` the lateral
    // rate (m per m) at the end of the step, used for the heading.
    void step(double a, double dd = 0.0, double lat_rate = 0.0) {
        const double dt = req_.dt;
        double travel = v_ * dt;
        if (std::abs(dd) > travel) dd = std::copysign(travel, dd);
        double ds = std::sqrt(std::max(0.0, travel * travel - dd * dd));
        s_ += ds;
        d_ += dd;
        double v_next = v_ + a * dt;
        if (v_next < 1e-9) v_next = 0.0;
        double applied = (v_next - v_) / dt;
        v_ = v_next;
        if (travel > 1e-9 || v_ > 0.0) heading_ = wrap_angle(route_->tangent(std::min(s_, route_->length())) + std::atan(lat_rate));
        VehicleState st;
        st.position = route_->point(std::min(s_, route_->length()), d_) +
                      (s_ > route_->length() ? unit_from_angle(route_->tangent(route_->length())) * (s_ - route_->length())
                                             : Vec2{});
        st.heading = heading_;
        st.speed = v_;
        st.acceleration = applied;
        traj_.states.push_back(st);
        current_lane_ = annotate(st.position);
        traj_.lanes.push_back(current_lane_);
        if (req_.goal && req_.layout.in_goal(current_lane_, *req_.goal)) {
            traj_.reached_goal = true;
            finished_ = true;
        }
        if (!finished_ && at_horizon()) {
            traj_.truncated = true;
            finished_ = true;
        }
    }

    LanePosition annotate(Vec2 p) const {
        const Lane& l = route_->lane_at(std::min(s_, route_->length()));
        LanePosition lp{l.id, route_->local(std::min(s_, route_->length())), d_};
        if (std::abs(d_) <= l.width / 2.0) return lp;
        auto side = d_ > 0 ? l.left : l.right;
        if (side) {
            auto pr = req_.layout.lane(*side).midline.project(p);
            return {*side, pr.s, pr.offset};
        }
        return lp;
    }

    double target_speed(double extra_cap = std::numeric_limits<double>::infinity()) const {
        double b = req_.config.comfortable_deceleration;
        // evaluated where the vehicle will be after this step
        double v = route_->speed_cap(s_ + v_ * req_.dt, req_.config.lookahead, b);
        return std::min(v, extra_cap);
    }

    double accel_on(const Route& route, double s, double v_des) const {
        Leader leader = find_leader(route, s, req_, time());
        return idm_acceleration(v_, v_des, leader, req_.config, req_.dt);
    }

    void follow(double end_s) {
        end_s = std::min(end_s, route_->length());
        while (!finished_ && s_ < end_s - 1e-9) {
            double a = accel_on(*route_, s_, target_speed());
            step(a);
        }
    }

    // True if a priority-lane vehicle occupies or is about to occupy the
    // conflict region of the connector.
    bool must_yield(const Maneuver& m) const {
        if (!req_.traffic || m.connector.empty()) return false;
        const Connection* conn = req_.layout.connection_to(m.connector);
        if (conn && conn->has_priority) return false;
        const auto& pts = req_.layout.lane(m.connector).midline.points();
        const double r = req_.config.conflict_radius;
        auto in_conflict = [&](Vec2 p) {
            for (const auto& q : pts)
                if (distance(p, q) <= r) return true;
            return false;
        };
        const int window = static_cast<int>(std::lround(req_.config.give_way_window / req_.dt));
        const int now = time();
        for (const Trajectory* other : req_.traffic->vehicles) {
            if (!other || other->vehicle == req_.vehicle) continue;
            const VehicleState* st = other->at(now);
            const LanePosition* lp = other->lane_at(now);
            if (!st) continue;
            if (in_conflict(st->position)) return true;
            if (!lp || !req_.layout.is_priority_lane(lp->lane)) continue;
            for (int k = 1; k <= window; ++k) {
                const VehicleState* f = other->at(now + k);
                if (!f) break;
                if (in_conflict(f->position)) return true;
            }
        }
        return false;
    }

    void give_way(const Maneuver& m) {
        const double stop_s = std::min(m.end_s, route_->length());
        const double b = req_.config.comfortable_deceleration;
        while (!finished_ && s_ < stop_s - 1e-9) {
            bool yield = must_yield(m);
            double a;
            if (yield) {
                double room = std::max(0.0, stop_s - s_ - 0.25);
                if (room < 0.5 && v_ < 1.0) {
                    a = -v_ / req_.dt;  // hold at the line
                } else {
                    double cap = std::sqrt(2.0 * b * room);
                    a = accel_on(*route_, s_, target_speed(cap));
                    // make sure we can stop before the line
                    double need = room > 1e-6 ? -(v_ * v_) / (2.0 * room) : -v_ / req_.dt;
                    a = std::min(a, std::max(need, -req_.config.max_deceleration));
                }
            } else {
                a = accel_on(*route_, s_, target_speed());
            }
            step(a);
            if (yield && v_ == 0.0 && s_ < stop_s - 1e-9) {
                // waiting; keep going until the horizon or the way clears
                continue;
            }
        }
    }

    void lane_change(const Maneuver& m) {
        const Lane& from = route_->lane_at(s_);
        const Lane& to = req_.layout.lane(m.target_lane);
        const double width = 0.5 * (from.width + to.width);
        const double sign = m.kind == ManeuverKind::LaneChangeLeft ? 1.0 : -1.0;
        const double d0 = d_;
        const double target_d = sign * width;
        const double T = req_.config.lane_change_duration;
        Route target(req_.layout, chain_from(req_.layout, m.target_lane));
        target.set_lateral_acceleration(req_.config.lateral_acceleration);
        auto target_off = target.offset_of(m.target_lane);
        double u = 0.0;  // progress in [0, 1]
        while (!finished_ && u < 1.0 - 1e-12) {
            double v_des = target_speed();
            double a = accel_on(*route_, s_, v_des);
            // vehicles in the target lane also count as leaders
            auto pr = to.midline.project(route_->point(std::min(s_, route_->length()), 0.0));
            double ts = *target_off + pr.s;
            a = std::min(a, accel_on(target, ts, std::min(v_des, target.speed_cap(ts, req_.config.lookahead,
                                                                                  req_.config.comfortable_deceleration))));
            double du = req_.dt / T;
            double dd = (target_d - d0) * (smoothstep(u + du) - smoothstep(u));
            double travel = v_ * req_.dt;
            if (travel < 1e-9) {
                step(a);
                continue;
            }
            // slow the lateral progress if the step is too short
            double limit = 0.7 * travel;
            if (std::abs(dd) > limit) {
                double scale = limit / std::abs(dd);
                du *= scale;
                dd = (target_d - d0) * (smoothstep(u + du) - smoothstep(u));
            }
            u = std::min(1.0, u + du);
            double ds_next = std::max(1e-9, (v_ + a * req_.dt) * req_.dt);
            double rate = (target_d - d0) * smoothstep_rate(u) * (req_.dt / T) / ds_next;
            if (u >= 1.0 - 1e-12) rate = 0.0;
            step(a, dd, rate);
        }
        if (u >= 1.0 - 1e-12) {
            // re-anchor on the target lane's chain
            Vec2 p = traj_.states.back().position;
            auto pr = to.midline.project(p);
            current_lane_ = {to.id, pr.s, pr.offset};
            traj_.lanes.back() = current_lane_;
            route_.emplace(target);
            s_ = *target_off + pr.s;
            d_ = pr.offset;
            traj_.states.back().heading = wrap_angle(route_->tangent(s_));
            heading_ = traj_.states.back().heading;
        }
    }

    void stop() {
        const double b = req_.config.comfortable_deceleration;
        while (!finished_ && v_ > 0.0) {
            if (s_ >= route_->length() - 1e-9) break;
            double a = std::max(-b, -v_ / req_.dt);
            Leader leader = find_leader(*route_, s_, req_, time());
            if (std::isfinite(leader.gap)) a = std::min(a, idm_acceleration(v_, 0.0, leader, req_.config, req_.dt));
            step(a);
        }
        int hold = static_cast<int>(std::lround(req_.config.stop_hold / req_.dt));
        for (int i = 0; i < hold && !finished_; ++i) step(0.0);
    }

    const MotionRequest& req_;
    Trajectory traj_;
    std::optional<Route> route_;
    LanePosition current_lane_;
    double s_ = 0.0;
    double d_ = 0.0;
    double v_ = 0.0;
    double heading_ = 0.0;
    bool finished_ = false;
};

// First lane at or after position `from` in the chain that has junction
// connections. Returns its index.
std::optional<std::size_t> next_junction_lane(const RoadLayout& layout, const std::vector<LaneId>& chain,
                                              std::size_t from) {
    for (std::size_t i = from; i < chain.size(); ++i)
        if (!layout.connections_from(chain[i]).empty()) return i;
    return std::nullopt;
}

double chain_offset(const RoadLayout& layout, const std::vector<LaneId>& chain, std::size_t index) {
    double acc = 0.0;
    for (std::size_t i = 0; i < index; ++i) acc += layout.lane(chain[i]).midline.length();
    return acc;
}

double chain_length(const RoadLayout& layout, const std::vector<LaneId>& chain) {
    return chain_offset(layout, chain, chain.size());
}

// Route through a junction connection: chain up to the incoming lane, the
// connector and the lane it leads into.
std::vector<Maneuver> exit_maneuvers(const RoadLayout& layout, const KinematicsConfig& cfg,
                                     const std::vector<LaneId>& chain, std::size_t junction_index,
                                     const Connection& conn, double s_now) {
    std::vector<LaneId> route(chain.begin(), chain.begin() + static_cast<long>(junction_index) + 1);
    route.push_back(conn.outgoing);
    auto after = layout.straight_successor(conn.outgoing);
    if (!after && !layout.lane(conn.outgoing).successors.empty()) after = layout.lane(conn.outgoing).successors.front();
    if (after) route.push_back(*after);
    const double stop_s = chain_offset(layout, chain, junction_index + 1);
    const double connector_end = stop_s + layout.lane(conn.outgoing).midline.length();
    const Junction* j = layout.junction_of(conn);
    std::string jid = j ? j->id : std::string();

    Maneuver approach{ManeuverKind::LaneFollow, route, std::max(s_now, stop_s - cfg.give_way_distance), {}, {}, jid};
    Maneuver yield{ManeuverKind::GiveWay, route, stop_s, {}, conn.outgoing, jid};
    ManeuverKind turn_kind = conn.direction == TurnDirection::Left    ? ManeuverKind::TurnLeft
                             : conn.direction == TurnDirection::Right ? ManeuverKind::TurnRight
                                                                      : ManeuverKind::LaneFollow;
    Maneuver turn{turn_kind, route, after ? connector_end + 1e-6 : connector_end, {}, {}, jid};
    return {approach, yield, turn};
}

}  // namespace

std::string MacroAction::name() const {
    for (const auto& e : name_table())
        if (e.macro == *this) return e.name;
    throw PlanningError("malformed macro action");
}

std::optional<MacroAction> parse_macro(std::string_view name) {
    for (const auto& e : name_table())
        if (name == e.name) return e.macro;
    return std::nullopt;
}

std::vector<MacroAction> all_macros() {
    std::vector<MacroAction> out;
    for (const auto& e : name_table()) out.push_back(e.macro);
    std::sort(out.begin(), out.end());
    return out;
}

std::string_view to_string(ManeuverKind kind) {
    switch (kind) {
        case ManeuverKind::LaneFollow: return "lane-follow";
        case ManeuverKind::LaneChangeLeft: return "lane-change-left";
        case ManeuverKind::LaneChangeRight: return "lane-change-right";
        case ManeuverKind::TurnLeft: return "turn-left";
        case ManeuverKind::TurnRight: return "turn-right";
        case ManeuverKind::GiveWay: return "give-way";
        case ManeuverKind::Stop: return "stop";
    }
    return "?";
}

const VehicleState* Trajectory::at(int time) const {
    int i = time - start_time;
    if (i < 0 || i >= static_cast<int>(states.size())) return nullptr;
    return &states[static_cast<std::size_t>(i)];
}

const LanePosition* Trajectory::lane_at(int time) const {
    int i = time - start_time;
    if (i < 0 || i >= static_cast<int>(lanes.size())) return nullptr;
    return &lanes[static_cast<std::size_t>(i)];
}

void Trajectory::append(const Trajectory& next) {
    if (next.empty()) return;
    if (empty()) {
        *this = next;
        return;
    }
    if (next.start_time != end_time()) throw PlanningError("trajectory segments are not contiguous");
    states.insert(states.end(), next.states.begin() + 1, next.states.end());
    lanes.insert(lanes.end(), next.lanes.begin() + 1, next.lanes.end());
    truncated = next.truncated;
    reached_goal = next.reached_goal;
}

LanePosition lane_position(const JointState& state, VehicleId vehicle, const RoadLayout& layout) {
    auto it = state.lanes.find(vehicle);
    if (it != state.lanes.end()) return it->second;
    auto vs = state.vehicles.find(vehicle);
    if (vs == state.vehicles.end()) throw PlanningError("unknown vehicle " + std::to_string(vehicle));
    return layout.locate(vs->second.position);
}

std::vector<MacroAction> applicable_macros(const JointState& state, VehicleId vehicle, const RoadLayout& layout,
                                           const Goal& goal, const KinematicsConfig& config, double max_distance) {
    std::vector<MacroAction> out;
    const LanePosition where = lane_position(state, vehicle, layout);
    const VehicleState& me = state.vehicles.at(vehicle);
    const Lane& lane = layout.lane(where.lane);
    const auto chain = layout.straight_chain(where.lane);
    const double remaining = chain_length(layout, chain) - where.s;

    // Continue: the lane keeps going toward the goal
    {
        auto goal_lanes = layout.goal_lanes(goal);
        bool toward = std::any_of(chain.begin(), chain.end(), [&](const LaneId& id) {
            return std::find(goal_lanes.begin(), goal_lanes.end(), id) != goal_lanes.end();
        });
        if (toward && remaining >= config.min_continue_length) out.push_back(continue_macro());
    }

    // Lane changes: neighbour exists, room to complete, headway in target lane
    auto change_ok = [&](const std::optional<LaneId>& side) {
        if (!side) return false;
        const Lane& to = layout.lane(*side);
        auto tchain = layout.straight_chain(*side);
        auto pr = to.midline.project(me.position);
        double room = chain_length(layout, tchain) - pr.s;
        if (room < std::max(config.min_continue_length, me.speed * config.lane_change_duration)) return false;
        for (const auto& [id, st] : state.vehicles) {
            if (id == vehicle) continue;
            LanePosition lp = lane_position(state, id, layout);
            double off = 0.0;
            bool found = false;
            for (const auto& tl : tchain) {
                if (tl == lp.lane) {
                    found = true;
                    break;
                }
                off += layout.lane(tl).midline.length();
            }
            if (!found) continue;
            double delta = off + lp.s - pr.s;
            double gap = std::abs(delta) - config.vehicle_length;
            double follower_speed = delta >= 0 ? me.speed : st.speed;
            if (gap < config.headway * follower_speed || gap < 0.0) return false;
        }
        return true;
    };
    if (change_ok(lane.left)) out.push_back(change_left());
    if (change_ok(lane.right)) out.push_back(change_right());

    // Exits at the first junction ahead
    auto first = next_junction_lane(layout, chain, 0);
    if (first) {
        double stop_s = chain_offset(layout, chain, *first + 1);
        double dist = stop_s - where.s;
        if (dist >= 0.0 && dist <= max_distance) {
            for (const Connection* c : layout.connections_from(chain[*first]))
                out.push_back(exit_macro(c->direction));
        }
        auto second = next_junction_lane(layout, chain, *first + 1);
        if (second) {
            for (const Connection* c : layout.connections_from(chain[*second]))
                out.push_back({MacroKind::ContinueNextExit, c->direction});
        }
    }

    out.push_back(stop_macro());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Maneuver> expand_macro(const MacroAction& macro, const LanePosition& where, const RoadLayout& layout,
                                   const KinematicsConfig& config) {
    const auto chain = layout.straight_chain(where.lane);
    const Lane& lane = layout.lane(where.lane);
    switch (macro.kind) {
        case MacroKind::Continue:
            return {{ManeuverKind::LaneFollow, chain, chain_length(layout, chain), {}, {}, {}}};
        case MacroKind::ChangeLeft:
        case MacroKind::ChangeRight: {
            auto side = macro.kind == MacroKind::ChangeLeft ? lane.left : lane.right;
            if (!side) throw PlanningError("inapplicable macro " + macro.name() + ": no neighbouring lane");
            ManeuverKind k =
                macro.kind == MacroKind::ChangeLeft ? ManeuverKind::LaneChangeLeft : ManeuverKind::LaneChangeRight;
            return {{k, chain, chain_length(layout, chain), *side, {}, {}}};
        }
        case MacroKind::Exit:
        case MacroKind::ContinueNextExit: {
            auto j = next_junction_lane(layout, chain, 0);
            if (j && macro.kind == MacroKind::ContinueNextExit) j = next_junction_lane(layout, chain, *j + 1);
            if (!j) throw PlanningError("inapplicable macro " + macro.name() + ": no junction ahead");
            for (const Connection* c : layout.connections_from(chain[*j]))
                if (c->direction == *macro.direction) return exit_maneuvers(layout, config, chain, *j, *c, where.s);
            throw PlanningError("inapplicable macro " + macro.name() + ": no such turn");
        }
        case MacroKind::Stop: return {{ManeuverKind::Stop, chain, chain_length(layout, chain), {}, {}, {}}};
    }
    throw PlanningError("malformed macro action");
}

std::vector<Maneuver> expand_macro(const MacroAction& macro, const JointState& state, VehicleId vehicle,
                                   const RoadLayout& layout, const KinematicsConfig& config) {
    return expand_macro(macro, lane_position(state, vehicle, layout), layout, config);
}

Trajectory generate_trajectory(const std::vector<Maneuver>& maneuvers, const VehicleState& start,
                               const LanePosition& start_lane, const MotionRequest& request) {
    Generator gen(start, start_lane, request);
    for (const auto& m : maneuvers) {
        if (gen.finished()) break;
        gen.run(m);
    }
    Trajectory t = gen.take();
    t.vehicle = request.vehicle;
    return t;
}

TrajectoryFeatures extract_features(const Trajectory& trajectory, const Goal& goal, const RoadLayout& layout) {
    TrajectoryFeatures f;
    const auto& st = trajectory.states;
    const double dt = trajectory.dt;
    const std::size_t n = st.size();
    if (n == 0) return f;

    f.time_to_goal = dt * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        LanePosition lp;
        if (i < trajectory.lanes.size()) {
            lp = trajectory.lanes[i];
        } else {
            try {
                lp = layout.locate(st[i].position);
            } catch (const PlanningError&) {
                continue;
            }
        }
        if (layout.in_goal(lp, goal)) {
            f.time_to_goal = dt * static_cast<double>(i);
            break;
        }
    }

    if (n >= 3) {
        double jerk = 0.0;
        double ang = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            jerk += std::abs(st[i + 1].speed - 2.0 * st[i].speed + st[i - 1].speed) / (dt * dt);
            double d1 = wrap_angle(st[i + 1].heading - st[i].heading);
            double d0 = wrap_angle(st[i].heading - st[i - 1].heading);
            ang += std::abs(d1 - d0) / (dt * dt);
        }
        f.jerk = jerk / static_cast<double>(n - 2);
        f.angular_acceleration = ang / static_cast<double>(n - 2);
    }

    double curv = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double ds = distance(st[i + 1].position, st[i].position);
        if (ds < 1e-6) continue;
        curv += std::abs(wrap_angle(st[i + 1].heading - st[i].heading)) / ds;
        ++count;
    }
    if (count) f.curvature = curv / static_cast<double>(count);
    return f;
}

}  // namespace xplan
