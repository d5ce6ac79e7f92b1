#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "xplan/goal_recognition.hpp"
#include "xplan/maneuver.hpp"
#include "xplan/reward.hpp"
#include "xplan/scenario.hpp"

namespace xplan {

struct PlannerConfig {
    int iterations = 300;  // K
    int max_depth = 3;     // d_max
    double exploration = std::sqrt(2.0);
    std::uint64_t seed = 0;
};

void validate(const PlannerConfig& config);

// One non-ego vehicle's sampled goal and trajectory, as indices into its
// VehiclePrediction.
struct AgentSample {
    VehicleId vehicle = 0;
    int goal = 0;
    int trajectory = 0;

    auto operator<=>(const AgentSample&) const = default;
};

using JointSample = std::vector<AgentSample>;  // sorted by vehicle id

struct TraceRecord {
    JointSample agents;
    std::vector<MacroAction> macros;  // macros[d] was chosen at depth d + 1
    RewardComponents components;      // raw quantities
    Outcome outcome = Outcome::Dead;
    double reward = 0.0;  // value that was back-propagated
    std::optional<VehicleId> collided_with;
};

using TraceLog = std::vector<TraceRecord>;

struct ChildStats {
    int visits = 0;
    double q = 0.0;
};

struct TreeNode {
    int visits = 0;             // times an action was selected here
    int terminal_arrivals = 0;  // simulations that ended on arriving here
    std::map<MacroAction, ChildStats> children;
};

using MacroSequence = std::vector<MacroAction>;

struct SearchTree {
    std::map<MacroSequence, TreeNode> nodes;

    const TreeNode* find(const MacroSequence& prefix) const {
        auto it = nodes.find(prefix);
        return it == nodes.end() ? nullptr : &it->second;
    }
};

struct PlanResult {
    MacroSequence plan;  // omega_F
    SearchTree tree;
    TraceLog traces;
};

struct StepResult {
    JointState state;
    std::optional<Outcome> outcome;
    std::optional<VehicleId> collided_with;
    Trajectory ego;  // the ego motion for this macro
};

struct SimulationContext {
    const Scenario& scenario;
    const KinematicsConfig& kinematics;
    const RewardConfig& reward;
    const Traffic& traffic;
};

// Executes one ego macro from `state` while the other vehicles follow
// their fixed trajectories. Terminal checks per step: collision, goal,
// horizon.
StepResult simulate_step(const JointState& state, const MacroAction& macro, const SimulationContext& ctx);

// The macro sequence following maximal visits, then Q, then action order.
MacroSequence best_plan(const SearchTree& tree);

JointSample sample_agents(const std::vector<VehiclePrediction>& predictions, std::uint64_t seed, int iteration);

PlanResult run_mcts(const Scenario& scenario, const JointState& initial,
                    const std::vector<VehiclePrediction>& predictions, const PlannerConfig& config,
                    const KinematicsConfig& kinematics, const RewardConfig& reward);

}  // namespace xplan
