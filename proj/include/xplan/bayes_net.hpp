#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "xplan/mcts.hpp"
#include "xplan/reward.hpp"

namespace xplan {

// p(G^i) and p(S^i | G^i) for one non-ego vehicle. trajectory[g][s] is the
// probability of the s-th trajectory towards goal g.
struct AgentPrior {
    VehicleId vehicle = 0;
    std::vector<double> goal;
    std::vector<std::vector<double>> trajectory;
    // Descriptive only: goal labels and the macro plan behind each trajectory.
    std::vector<std::string> goal_labels;
    std::vector<std::vector<MacroSequence>> plans;
};

std::vector<AgentPrior> priors_from(const std::vector<VehiclePrediction>& predictions);

enum class VarKind { Goal, Trajectory, Action, RewardExists, Outcome };

// G^i / S^i are indexed by vehicle id, Omega_d by depth (1-based), R^b_c by
// component index.
struct Variable {
    VarKind kind = VarKind::Action;
    int index = 0;

    auto operator<=>(const Variable&) const = default;
};

std::string to_string(const Variable& v);

inline Variable goal_var(VehicleId i) { return {VarKind::Goal, i}; }
inline Variable trajectory_var(VehicleId i) { return {VarKind::Trajectory, i}; }
inline Variable action_var(int depth) { return {VarKind::Action, depth}; }
inline Variable exists_var(Component c) { return {VarKind::RewardExists, static_cast<int>(c)}; }
inline Variable outcome_var() { return {VarKind::Outcome, 0}; }

// Goal and trajectory indices are ints; actions may be empty (nullopt).
using Value = std::variant<int, std::optional<MacroAction>, Outcome, bool>;

std::string to_string(const Value& v);

using Assignment = std::map<Variable, Value>;

// Selection counts at one (prefix, joint sample) state.
struct ActionCounts {
    std::map<MacroAction, int> selections;
    int terminal = 0;
    std::vector<int> traces;  // supporting trace indices

    int arrivals() const;
};

struct ComponentStats {
    int count = 0;
    double mean = 0.0;           // reward space (weight * quantity)
    double variance = 0.0;       // unbiased; 0 for a single sample
    double quantity_mean = 0.0;  // raw quantity
};

// Reward statistics at a reached macro sequence, pooled over joint samples.
struct RewardStats {
    int count = 0;
    std::map<Outcome, int> outcomes;  // existence pattern counts
    std::array<ComponentStats, kComponentCount> components;
    std::vector<int> traces;

    double outcome_probability(Outcome o) const;
};

// One point of the realized discrete support.
struct World {
    JointSample agents;
    MacroSequence omega;
    Outcome outcome = Outcome::Dead;
    double p = 0.0;
};

class BnModel {
public:
    BnModel(TraceLog traces, std::vector<AgentPrior> priors, int max_depth, RewardConfig reward);

    int max_depth() const { return max_depth_; }
    const std::vector<AgentPrior>& priors() const { return priors_; }
    const TraceLog& traces() const { return traces_; }
    const RewardConfig& reward_config() const { return reward_; }
    const std::map<std::pair<MacroSequence, JointSample>, ActionCounts>& action_cpds() const { return actions_; }
    const std::map<MacroSequence, RewardStats>& reward_cpds() const { return rewards_; }
    const std::vector<World>& worlds() const { return worlds_; }
    std::vector<Variable> variables() const;
    std::vector<Value> support(const Variable& v) const;

    // p(G, S) for a joint sample.
    double agents_probability(const JointSample& agents) const;
    // p(Omega_d = action | prefix, S); nullopt is the empty action.
    double action_probability(const MacroSequence& prefix, const JointSample& agents,
                              const std::optional<MacroAction>& action) const;
    // p(Omega = omega | S) by the chain rule, including the final empty value.
    double sequence_probability(const MacroSequence& omega, const JointSample& agents) const;
    // Probability of the existence pattern of `outcome` at a reached state.
    double pattern_probability(const MacroSequence& omega, Outcome outcome) const;
    const RewardStats* reward_stats(const MacroSequence& omega) const;

    // Value a variable takes in a world; R^b follows from the outcome.
    Value value_in(const World& w, const Variable& v) const;

private:
    void enumerate();

    TraceLog traces_;
    std::vector<AgentPrior> priors_;
    int max_depth_;
    RewardConfig reward_;
    std::map<std::pair<MacroSequence, JointSample>, ActionCounts> actions_;
    std::map<MacroSequence, RewardStats> rewards_;
    std::vector<World> worlds_;
};

// Throws InferenceError("empty trace log") for an empty log.
BnModel build_bn(const TraceLog& traces, const std::vector<AgentPrior>& priors, int max_depth,
                 const RewardConfig& reward);

// Complete assignment including reward values (nullopt = empty).
struct FullAssignment {
    std::map<VehicleId, int> goals;
    std::map<VehicleId, int> trajectories;
    std::vector<std::optional<MacroAction>> actions;  // one per depth
    std::array<std::optional<double>, kComponentCount> rewards;  // reward space
    std::array<bool, kComponentCount> exists{};
    Outcome outcome = Outcome::Dead;
};

// Product of all factors: mass for discrete variables, density for the set
// reward components. Throws InferenceError("incomplete assignment").
double joint_probability(const BnModel& model, const FullAssignment& a);

using Distribution = std::map<std::vector<Value>, double>;

// Exact p(targets | evidence) by enumeration over the realized support.
// Throws ZeroProbabilityEvidence when the evidence has probability 0.
Distribution query(const BnModel& model, const std::vector<Variable>& targets, const Assignment& evidence);

// Marginal probability of the evidence.
double evidence_probability(const BnModel& model, const Assignment& evidence);

struct ExpectedReward {
    std::array<std::optional<double>, kComponentCount> reward;    // E[R_c | evidence, R_c set]
    std::array<std::optional<double>, kComponentCount> quantity;  // same in quantity space
};

ExpectedReward expected_reward(const BnModel& model, const Assignment& evidence);

nlohmann::json to_json(const BnModel& model);

}  // namespace xplan
