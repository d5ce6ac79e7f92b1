#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "xplan/maneuver.hpp"

namespace xplan {

enum class Component { Time, Jerk, AngularAcceleration, Curvature, Collision, Termination };

inline constexpr std::size_t kComponentCount = 6;
inline constexpr std::array<Component, kComponentCount> kComponents = {
    Component::Time,      Component::Jerk,      Component::AngularAcceleration,
    Component::Curvature, Component::Collision, Component::Termination};

std::string_view to_string(Component c);
std::optional<Component> parse_component(std::string_view name);

enum class Outcome { Done, Collision, Termination, Dead };

inline constexpr std::array<Outcome, 4> kOutcomes = {Outcome::Done, Outcome::Collision, Outcome::Termination,
                                                     Outcome::Dead};

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view name);

// Components whose joint presence makes the outcome hold. Dead has none: it
// holds when no other outcome does.
std::vector<Component> outcome_components(Outcome o);

struct RewardConfig {
    std::array<double, kComponentCount> weights = {-1.0, -0.1, -0.1, -0.1, -100.0, -50.0};

    double weight(Component c) const { return weights[static_cast<std::size_t>(c)]; }
    double& weight(Component c) { return weights[static_cast<std::size_t>(c)]; }
};

// Throws ValidationError on non-finite weights or non-negative collision or
// termination weights.
void validate(const RewardConfig& config);

// Raw (unweighted) quantities per component; nullopt is the empty value.
struct RewardComponents {
    std::array<std::optional<double>, kComponentCount> values;

    const std::optional<double>& operator[](Component c) const { return values[static_cast<std::size_t>(c)]; }
    std::optional<double>& operator[](Component c) { return values[static_cast<std::size_t>(c)]; }
    bool operator==(const RewardComponents&) const = default;
};

RewardComponents components_for(Outcome outcome, const TrajectoryFeatures& features);
double scalar_reward(const RewardComponents& components, const RewardConfig& config);
double features_reward(const TrajectoryFeatures& features, const RewardConfig& config);

// The outcome implied by which components are present.
Outcome outcome_of(const RewardComponents& components);

struct TerminalReward {
    double reward = 0.0;
    RewardComponents components;
};

TerminalReward terminal_reward(const Trajectory& trajectory, Outcome outcome, const Goal& goal,
                               const RoadLayout& layout, const RewardConfig& config);

}  // namespace xplan
