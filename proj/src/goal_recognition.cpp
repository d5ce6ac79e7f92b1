#include "xplan/goal_recognition.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

bool undoes_lane_change(const std::vector<MacroAction>& seq, const MacroAction& next) {
    for (const auto& m : seq) {
        if (m.kind == MacroKind::ChangeLeft && next.kind == MacroKind::ChangeRight) return true;
        if (m.kind == MacroKind::ChangeRight && next.kind == MacroKind::ChangeLeft) return true;
    }
    return false;
}

bool same_states(const Trajectory& a, const Trajectory& b) {
    if (a.states.size() != b.states.size()) return false;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const auto& x = a.states[i];
        const auto& y = b.states[i];
        if (!(x.position == y.position) || x.heading != y.heading || x.speed != y.speed) return false;
    }
    return true;
}

struct Search {
    VehicleId vehicle;
    const Goal& goal;
    const PredictionContext& ctx;
    int start_time;
    std::vector<CandidateTrajectory> found;

    void dfs(std::vector<MacroAction>& seq, const Trajectory& so_far) {
        if (static_cast<int>(seq.size()) >= ctx.recognition.max_depth) return;
        const int used = static_cast<int>(so_far.states.size()) - 1;
        if (used >= ctx.horizon) return;
        JointState js;
        js.time = so_far.end_time();
        js.vehicles[vehicle] = so_far.states.back();
        js.lanes[vehicle] = so_far.lanes.back();
        std::vector<MacroAction> acts;
        try {
            acts = applicable_macros(js, vehicle, ctx.layout, goal, ctx.kinematics);
        } catch (const PlanningError&) {
            return;
        }
        for (const auto& m : acts) {
            if (m.kind == MacroKind::Stop || undoes_lane_change(seq, m)) continue;
            MotionRequest req{ctx.layout, ctx.kinematics};
            req.dt = ctx.dt;
            req.horizon = ctx.horizon - used;
            req.start_time = so_far.end_time();
            req.vehicle = vehicle;
            req.traffic = ctx.traffic;
            req.goal = &goal;
            Trajectory seg;
            try {
                seg = generate_trajectory(expand_macro(m, so_far.lanes.back(), ctx.layout, ctx.kinematics),
                                          so_far.states.back(), so_far.lanes.back(), req);
            } catch (const PlanningError&) {
                continue;
            }
            if (seg.states.size() < 2 && !seg.reached_goal) continue;
            Trajectory next = so_far;
            next.append(seg);
            seq.push_back(m);
            if (seg.reached_goal) {
                CandidateTrajectory c;
                c.macros = seq;
                c.trajectory = std::move(next);
                found.push_back(std::move(c));
            } else if (!seg.truncated) {
                dfs(seq, next);
            }
            seq.pop_back();
        }
    }
};

Trajectory start_trajectory(VehicleId vehicle, const VehicleState& state, const LanePosition& where, double dt,
                            int start_time) {
    Trajectory t;
    t.vehicle = vehicle;
    t.dt = dt;
    t.start_time = start_time;
    t.states.push_back(state);
    t.lanes.push_back(where);
    return t;
}

std::vector<CandidateTrajectory> enumerate(VehicleId vehicle, const VehicleState& state, const LanePosition& where,
                                           const Goal& goal, const PredictionContext& ctx, int start_time) {
    Search search{vehicle, goal, ctx, start_time, {}};
    Trajectory root = start_trajectory(vehicle, state, where, ctx.dt, start_time);
    if (ctx.layout.in_goal(where, goal)) {
        CandidateTrajectory c;
        c.trajectory = root;
        c.trajectory.reached_goal = true;
        search.found.push_back(std::move(c));
        return search.found;
    }
    std::vector<MacroAction> seq;
    search.dfs(seq, root);
    // merge plans that drive identically; the first in canonical order stays
    std::vector<CandidateTrajectory> unique;
    for (auto& c : search.found) {
        bool dup = std::any_of(unique.begin(), unique.end(),
                               [&](const CandidateTrajectory& u) { return same_states(u.trajectory, c.trajectory); });
        if (!dup) unique.push_back(std::move(c));
    }
    return unique;
}

double best_reward(const std::vector<CandidateTrajectory>& cs) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : cs) best = std::max(best, c.reward);
    return best;
}

}  // namespace

std::vector<CandidateTrajectory> trajectory_distribution(VehicleId vehicle, const VehicleState& state,
                                                         const LanePosition& where, const Goal& goal,
                                                         const PredictionContext& ctx, int start_time) {
    auto cs = enumerate(vehicle, state, where, goal, ctx, start_time);
    if (cs.empty()) throw PlanningError("goal unreachable: " + goal.label);
    for (auto& c : cs) c.reward = features_reward(extract_features(c.trajectory, goal, ctx.layout), ctx.reward);
    const double top = best_reward(cs);
    double z = 0.0;
    for (auto& c : cs) {
        c.probability = std::exp(ctx.recognition.beta * (c.reward - top));
        z += c.probability;
    }
    for (auto& c : cs) c.probability /= z;
    return cs;
}

Trajectory observed_prefix(VehicleId vehicle, const VehicleState& current, const LanePosition& where,
                           double acceleration, double duration, const RoadLayout& layout, double dt) {
    const int n = static_cast<int>(std::lround(duration / dt));
    std::vector<VehicleState> back{current};
    std::vector<LanePosition> lanes{where};
    const Lane& lane = layout.lane(where.lane);
    double s = where.s;
    double v = current.speed;
    for (int k = 0; k < n; ++k) {
        // inverse of the forward step s' = s + v dt, v' = v + a dt
        double v_prev = std::max(0.0, v - acceleration * dt);
        double s_prev = s - v_prev * dt;
        if (s_prev < 0.0) break;
        LanePosition lp{lane.id, s_prev, where.offset};
        VehicleState st;
        st.position = layout.to_point(lp);
        st.heading = layout.heading_at(lp);
        st.speed = v_prev;
        st.acceleration = acceleration;
        back.push_back(st);
        lanes.push_back(lp);
        s = s_prev;
        v = v_prev;
    }
    Trajectory t;
    t.vehicle = vehicle;
    t.dt = dt;
    t.start_time = -static_cast<int>(back.size() - 1);
    t.states.assign(back.rbegin(), back.rend());
    t.lanes.assign(lanes.rbegin(), lanes.rend());
    return t;
}

GoalPosterior goal_posterior(const Trajectory& observed, const std::vector<Goal>& goals,
                             const PredictionContext& ctx) {
    if (goals.empty()) throw PlanningError("vehicle has no goals");
    if (observed.empty()) throw PlanningError("observed trajectory is empty");
    const VehicleId id = observed.vehicle;
    std::vector<double> logits(goals.size(), -std::numeric_limits<double>::infinity());
    bool any = false;
    for (std::size_t g = 0; g < goals.size(); ++g) {
        const Goal& goal = goals[g];
        auto now = enumerate(id, observed.states.back(), observed.lanes.back(), goal, ctx, observed.end_time());
        if (now.empty()) continue;
        // best reward achievable given what was observed
        double r_hat = -std::numeric_limits<double>::infinity();
        for (const auto& c : now) {
            Trajectory full = observed;
            full.append(c.trajectory);
            r_hat = std::max(r_hat, features_reward(extract_features(full, goal, ctx.layout), ctx.reward));
        }
        // optimal reward from where the observation started
        auto from_start =
            enumerate(id, observed.states.front(), observed.lanes.front(), goal, ctx, observed.start_time);
        double r_star = r_hat;
        for (const auto& c : from_start)
            r_star = std::max(r_star, features_reward(extract_features(c.trajectory, goal, ctx.layout), ctx.reward));
        logits[g] = ctx.recognition.beta * (r_hat - r_star);
        any = true;
    }
    if (!any) throw PlanningError("all goals unreachable");
    const double top = *std::max_element(logits.begin(), logits.end());
    GoalPosterior post;
    double z = 0.0;
    for (double l : logits) {
        double p = std::isfinite(l) ? std::exp(l - top) : 0.0;
        post.probabilities.push_back(p);
        z += p;
    }
    for (double& p : post.probabilities) p /= z;
    return post;
}

VehiclePrediction predict_vehicle(const Scenario& scenario, const VehicleSpec& spec, const JointState& initial,
                                  const PredictionContext& ctx) {
    VehiclePrediction out;
    out.vehicle = spec.id;
    const VehicleState& st = initial.vehicles.at(spec.id);
    const LanePosition where = lane_position(initial, spec.id, ctx.layout);
    out.observed = observed_prefix(spec.id, st, where, spec.acceleration, scenario.observation, ctx.layout, ctx.dt);
    GoalPosterior post = goal_posterior(out.observed, spec.goals, ctx);
    for (std::size_t g = 0; g < spec.goals.size(); ++g) {
        GoalPrediction gp;
        gp.goal = spec.goals[g];
        gp.probability = post.probabilities[g];
        if (gp.probability > 0.0)
            gp.trajectories = trajectory_distribution(spec.id, st, where, spec.goals[g], ctx, initial.time);
        out.goals.push_back(std::move(gp));
    }
    return out;
}

std::vector<Trajectory> constant_velocity_traffic(const JointState& initial, const RoadLayout& layout, double dt,
                                                  int from, int to) {
    std::vector<Trajectory> out;
    for (const auto& [id, st] : initial.vehicles) {
        const LanePosition where = lane_position(initial, id, layout);
        const auto chain = layout.straight_chain(where.lane);
        Trajectory t;
        t.vehicle = id;
        t.dt = dt;
        t.start_time = from;
        for (int k = from; k <= to; ++k) {
            double s = std::max(0.0, where.s + st.speed * dt * (k - initial.time));
            std::size_t i = 0;
            while (i < chain.size() && s > layout.lane(chain[i]).midline.length()) {
                s -= layout.lane(chain[i]).midline.length();
                ++i;
            }
            if (i == chain.size()) break;
            LanePosition lp{chain[i], s, 0.0};
            VehicleState vs;
            vs.position = layout.to_point(lp);
            vs.heading = layout.heading_at(lp);
            vs.speed = st.speed;
            t.states.push_back(vs);
            t.lanes.push_back(lp);
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<VehiclePrediction> predict_all(const Scenario& scenario, const JointState& initial,
                                           const PredictionContext& ctx) {
    const int back = static_cast<int>(std::lround(scenario.observation / ctx.dt));
    const auto assumed = constant_velocity_traffic(initial, ctx.layout, ctx.dt, initial.time - back,
                                                   initial.time + ctx.horizon);
    Traffic traffic;
    for (const auto& t : assumed) traffic.vehicles.push_back(&t);
    PredictionContext with_traffic = ctx;
    with_traffic.traffic = &traffic;
    std::vector<std::future<VehiclePrediction>> jobs;
    for (const auto& spec : scenario.vehicles)
        jobs.push_back(std::async(std::launch::async, [&scenario, &spec, &initial, &with_traffic] {
            return predict_vehicle(scenario, spec, initial, with_traffic);
        }));
    std::vector<VehiclePrediction> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace xplan
