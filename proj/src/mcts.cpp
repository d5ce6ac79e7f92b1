#include "xplan/mcts.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "xplan/errors.hpp"
#include "xplan/random.hpp"

namespace xplan {

namespace {

template <class Weights>
int sample_index(std::mt19937_64& rng, const Weights& weights) {
    double u = uniform01(rng);
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    return last;
}

JointState state_at(const JointState& base_ego, VehicleId ego, const Traffic& traffic, int time) {
    JointState js;
    js.time = time;
    js.vehicles[ego] = base_ego.vehicles.at(ego);
    js.lanes[ego] = base_ego.lanes.at(ego);
    for (const Trajectory* t : traffic.vehicles) {
        const VehicleState* st = t->at(time);
        const LanePosition* lp = t->lane_at(time);
        if (!st) continue;
        js.vehicles[t->vehicle] = *st;
        if (lp) js.lanes[t->vehicle] = *lp;
    }
    return js;
}

MacroAction select_action(const TreeNode& node, const std::vector<MacroAction>& applicable, double c) {
    for (const auto& a : applicable) {
        auto it = node.children.find(a);
        if (it == node.children.end() || it->second.visits == 0) return a;
    }
    double best = -std::numeric_limits<double>::infinity();
    MacroAction choice = applicable.front();
    const double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
    for (const auto& a : applicable) {
        const ChildStats& s = node.children.at(a);
        double ucb = s.q + c * std::sqrt(log_n / s.visits);
        if (ucb > best) {
            best = ucb;
            choice = a;
        }
    }
    return choice;
}

}  // namespace

void validate(const PlannerConfig& config) {
    if (config.iterations < 1) throw ValidationError("iterations (K) must be at least 1");
    if (config.max_depth < 1) throw ValidationError("max depth must be at least 1");
    if (!std::isfinite(config.exploration) || config.exploration < 0.0)
        throw ValidationError("exploration constant must be finite and non-negative");
}

StepResult simulate_step(const JointState& state, const MacroAction& macro, const SimulationContext& ctx) {
    const Scenario& sc = ctx.scenario;
    const VehicleId ego = sc.ego_id;
    StepResult out;
    out.state = state;
    const LanePosition where = lane_position(state, ego, sc.layout);
    MotionRequest req{sc.layout, ctx.kinematics};
    req.dt = sc.timestep;
    req.horizon = sc.horizon - state.time;
    req.start_time = state.time;
    req.vehicle = ego;
    req.traffic = &ctx.traffic;
    req.goal = &sc.ego_goal;
    if (req.horizon <= 0) {
        out.outcome = Outcome::Termination;
        return out;
    }
    try {
        out.ego = generate_trajectory(expand_macro(macro, where, sc.layout, ctx.kinematics),
                                      state.vehicles.at(ego), where, req);
    } catch (const PlanningError&) {
        out.outcome = Outcome::Dead;
        return out;
    }
    const double reach = 2.0 * ctx.kinematics.collision_radius;
    for (std::size_t i = 1; i < out.ego.states.size(); ++i) {
        const int t = out.ego.start_time + static_cast<int>(i);
        const Vec2 p = out.ego.states[i].position;
        double nearest = std::numeric_limits<double>::infinity();
        for (const Trajectory* other : ctx.traffic.vehicles) {
            const VehicleState* st = other->at(t);
            if (!st) continue;
            double d = distance(p, st->position);
            if (d < reach && d < nearest) {
                nearest = d;
                out.collided_with = other->vehicle;
            }
        }
        bool collided = out.collided_with.has_value();
        bool done = sc.layout.in_goal(out.ego.lanes[i], sc.ego_goal);
        if (collided || done || i + 1 == out.ego.states.size()) {
            out.ego.states.resize(i + 1);
            out.ego.lanes.resize(i + 1);
            if (collided)
                out.outcome = Outcome::Collision;
            else if (done)
                out.outcome = Outcome::Done;
            else if (t >= sc.horizon)
                out.outcome = Outcome::Termination;
            break;
        }
    }
    JointState ego_only;
    ego_only.vehicles[ego] = out.ego.states.back();
    ego_only.lanes[ego] = out.ego.lanes.back();
    out.state = state_at(ego_only, ego, ctx.traffic, out.ego.end_time());
    if (!out.outcome && out.ego.states.size() < 2) out.outcome = Outcome::Dead;  // no progress possible
    return out;
}

MacroSequence best_plan(const SearchTree& tree) {
    MacroSequence plan;
    while (true) {
        const TreeNode* node = tree.find(plan);
        if (!node || node->children.empty()) break;
        const MacroAction* best = nullptr;
        const ChildStats* best_stats = nullptr;
        for (const auto& [a, s] : node->children) {
            if (s.visits == 0) continue;
            if (!best || s.visits > best_stats->visits || (s.visits == best_stats->visits && s.q > best_stats->q)) {
                best = &a;
                best_stats = &s;
            }
        }
        if (!best) break;
        plan.push_back(*best);
    }
    return plan;
}

JointSample sample_agents(const std::vector<VehiclePrediction>& predictions, std::uint64_t seed, int iteration) {
    std::mt19937_64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(iteration)));
    JointSample out;
    for (const auto& vp : predictions) {
        std::vector<double> gw;
        for (const auto& g : vp.goals) gw.push_back(g.trajectories.empty() ? 0.0 : g.probability);
        int g = sample_index(rng, gw);
        if (g < 0) throw PlanningError("vehicle " + std::to_string(vp.vehicle) + " has no reachable goal");
        std::vector<double> tw;
        for (const auto& c : vp.goals[static_cast<std::size_t>(g)].trajectories) tw.push_back(c.probability);
        int s = sample_index(rng, tw);
        out.push_back({vp.vehicle, g, s});
    }
    std::sort(out.begin(), out.end());
    return out;
}

PlanResult run_mcts(const Scenario& scenario, const JointState& initial,
                    const std::vector<VehiclePrediction>& predictions, const PlannerConfig& config,
                    const KinematicsConfig& kinematics, const RewardConfig& reward) {
    validate(config);
    validate(reward);
    PlanResult result;
    const VehicleId ego = scenario.ego_id;
    std::map<VehicleId, const VehiclePrediction*> by_id;
    for (const auto& vp : predictions) by_id[vp.vehicle] = &vp;

    for (int k = 0; k < config.iterations; ++k) {
        TraceRecord rec;
        rec.agents = sample_agents(predictions, config.seed, k);
        Traffic traffic;
        for (const auto& a : rec.agents) {
            const auto& gp = by_id.at(a.vehicle)->goals[static_cast<std::size_t>(a.goal)];
            traffic.vehicles.push_back(&gp.trajectories[static_cast<std::size_t>(a.trajectory)].trajectory);
        }
        SimulationContext ctx{scenario, kinematics, reward, traffic};

        JointState state = state_at(initial, ego, traffic, initial.time);
        Trajectory ego_path;
        ego_path.vehicle = ego;
        ego_path.dt = scenario.timestep;
        ego_path.start_time = initial.time;
        ego_path.states.push_back(initial.vehicles.at(ego));
        ego_path.lanes.push_back(lane_position(initial, ego, scenario.layout));

        std::optional<Outcome> outcome;
        MacroSequence prefix;
        std::vector<std::pair<MacroSequence, MacroAction>> path;
        while (!outcome) {
            if (static_cast<int>(prefix.size()) >= config.max_depth) {
                outcome = Outcome::Termination;
                break;
            }
            TreeNode& node = result.tree.nodes[prefix];
            const double dist = scenario.layout.lane(state.lanes.at(ego).lane).speed_limit *
                                scenario.timestep * (scenario.horizon - state.time);
            std::vector<MacroAction> acts;
            try {
                acts = applicable_macros(state, ego, scenario.layout, scenario.ego_goal, kinematics, dist);
            } catch (const PlanningError&) {
                acts.clear();
            }
            if (acts.empty()) {
                outcome = Outcome::Dead;
                break;
            }
            MacroAction a = select_action(node, acts, config.exploration);
            node.children[a];  // make sure the child exists
            path.emplace_back(prefix, a);
            prefix.push_back(a);
            StepResult step = simulate_step(state, a, ctx);
            if (!step.ego.empty()) ego_path.append(step.ego);
            state = step.state;
            outcome = step.outcome;
            rec.collided_with = step.collided_with;
        }
        rec.macros = prefix;
        rec.outcome = *outcome;
        rec.components = terminal_reward(ego_path, rec.outcome, scenario.ego_goal, scenario.layout, reward).components;
        if (rec.outcome != Outcome::Collision) rec.collided_with.reset();
        rec.reward = rec.outcome == Outcome::Dead ? reward.weight(Component::Collision)
                                                  : scalar_reward(rec.components, reward);

        for (const auto& [pre, a] : path) {
            TreeNode& node = result.tree.nodes[pre];
            ChildStats& s = node.children[a];
            node.visits += 1;
            s.visits += 1;
            s.q += (rec.reward - s.q) / s.visits;
        }
        result.tree.nodes[prefix].terminal_arrivals += 1;
        result.traces.push_back(std::move(rec));
    }
    result.plan = best_plan(result.tree);
    return result;
}

}  // namespace xplan
