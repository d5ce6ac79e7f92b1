#include "xplan/reward.hpp"

#include <cmath>

#include "xplan/errors.hpp"

namespace xplan {

std::string_view to_string(Component c) {
    switch (c) {
        case Component::Time: return "time";
        case Component::Jerk: return "jerk";
        case Component::AngularAcceleration: return "angular-acceleration";
        case Component::Curvature: return "curvature";
        case Component::Collision: return "collision";
        case Component::Termination: return "termination";
    }
    return "?";
}

std::optional<Component> parse_component(std::string_view name) {
    for (Component c : kComponents)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Done: return "done";
        case Outcome::Collision: return "collision";
        case Outcome::Termination: return "termination";
        case Outcome::Dead: return "dead";
    }
    return "?";
}

std::optional<Outcome> parse_outcome(std::string_view name) {
    for (Outcome o : kOutcomes)
        if (to_string(o) == name) return o;
    return std::nullopt;
}

std::vector<Component> outcome_components(Outcome o) {
    switch (o) {
        case Outcome::Done:
            return {Component::Time, Component::Jerk, Component::AngularAcceleration, Component::Curvature};
        case Outcome::Collision: return {Component::Collision};
        case Outcome::Termination: return {Component::Termination};
        case Outcome::Dead: return {};
    }
    return {};
}

void validate(const RewardConfig& config) {
    for (Component c : kComponents)
        if (!std::isfinite(config.weight(c)))
            throw ValidationError("reward weight for " + std::string(to_string(c)) + " is not finite");
    if (config.weight(Component::Collision) >= 0.0) throw ValidationError("collision weight must be negative");
    if (config.weight(Component::Termination) >= 0.0) throw ValidationError("termination weight must be negative");
}

RewardComponents components_for(Outcome outcome, const TrajectoryFeatures& f) {
    RewardComponents r;
    switch (outcome) {
        case Outcome::Done:
            r[Component::Time] = f.time_to_goal;
            r[Component::Jerk] = f.jerk;
            r[Component::AngularAcceleration] = f.angular_acceleration;
            r[Component::Curvature] = f.curvature;
            break;
        case Outcome::Collision: r[Component::Collision] = 1.0; break;
        case Outcome::Termination: r[Component::Termination] = 1.0; break;
        case Outcome::Dead: break;
    }
    return r;
}

double scalar_reward(const RewardComponents& components, const RewardConfig& config) {
    double total = 0.0;
    for (Component c : kComponents)
        if (components[c]) total += config.weight(c) * *components[c];
    return total;
}

double features_reward(const TrajectoryFeatures& f, const RewardConfig& config) {
    return scalar_reward(components_for(Outcome::Done, f), config);
}

Outcome outcome_of(const RewardComponents& components) {
    for (Outcome o : {Outcome::Collision, Outcome::Termination, Outcome::Done}) {
        bool all = true;
        for (Component c : outcome_components(o)) all = all && components[c].has_value();
        if (all) return o;
    }
    return Outcome::Dead;
}

TerminalReward terminal_reward(const Trajectory& trajectory, Outcome outcome, const Goal& goal,
                               const RoadLayout& layout, const RewardConfig& config) {
    TerminalReward out;
    TrajectoryFeatures f;
    if (outcome == Outcome::Done) f = extract_features(trajectory, goal, layout);
    out.components = components_for(outcome, f);
    out.reward = scalar_reward(out.components, config);
    return out;
}

}  // namespace xplan
