#pragma once

#include <vector>

#include "xplan/maneuver.hpp"
#include "xplan/reward.hpp"
#include "xplan/scenario.hpp"

namespace xplan {

struct RecognitionConfig {
    double beta = 1.0;  // rationality
    int max_depth = 3;  // macro actions per candidate plan
};

struct PredictionContext {
    const RoadLayout& layout;
    const KinematicsConfig& kinematics;
    const RewardConfig& reward;
    RecognitionConfig recognition;
    double dt = 0.1;
    int horizon = 300;
    // Other vehicles' assumed motion, seen by give-way and car following.
    const Traffic* traffic = nullptr;
};

struct CandidateTrajectory {
    std::vector<MacroAction> macros;
    Trajectory trajectory;
    double reward = 0.0;
    double probability = 0.0;
};

// Probabilities indexed like the goal list passed in.
struct GoalPosterior {
    std::vector<double> probabilities;
};

struct GoalPrediction {
    Goal goal;
    double probability = 0.0;
    std::vector<CandidateTrajectory> trajectories;  // empty if unreachable
};

struct VehiclePrediction {
    VehicleId vehicle = 0;
    Trajectory observed;
    std::vector<GoalPrediction> goals;  // same order as the vehicle's goal set
};

// Macro-action plans (depth-bounded, no Stop, no undone lane change) that
// reach the goal, one trajectory each, weighted by softmax(beta * reward).
// Candidates producing identical trajectories are merged. Throws
// PlanningError("goal unreachable") when nothing reaches the goal.
std::vector<CandidateTrajectory> trajectory_distribution(VehicleId vehicle, const VehicleState& state,
                                                         const LanePosition& where, const Goal& goal,
                                                         const PredictionContext& ctx, int start_time = 0);

// The observed history s_{1:t}: the current state extrapolated backwards
// with constant acceleration over `duration` seconds along the lane.
Trajectory observed_prefix(VehicleId vehicle, const VehicleState& current, const LanePosition& where,
                           double acceleration, double duration, const RoadLayout& layout, double dt);

// p(g | s_{1:t}) proportional to exp(beta * (best reward given the prefix -
// optimal reward from the start of the prefix)), uniform prior.
GoalPosterior goal_posterior(const Trajectory& observed, const std::vector<Goal>& goals,
                             const PredictionContext& ctx);

VehiclePrediction predict_vehicle(const Scenario& scenario, const VehicleSpec& spec, const JointState& initial,
                                  const PredictionContext& ctx);

// Predictions for every non-ego vehicle, sorted by id. Vehicles are
// processed concurrently.
// Every vehicle driving its current lane chain at constant speed over the
// global steps [from, to]; the assumed traffic during recognition.
std::vector<Trajectory> constant_velocity_traffic(const JointState& initial, const RoadLayout& layout, double dt,
                                                  int from, int to);

std::vector<VehiclePrediction> predict_all(const Scenario& scenario, const JointState& initial,
                                           const PredictionContext& ctx);

}  // namespace xplan
