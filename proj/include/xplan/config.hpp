#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xplan/goal_recognition.hpp"
#include "xplan/grammar.hpp"
#include "xplan/maneuver.hpp"
#include "xplan/mcts.hpp"
#include "xplan/reward.hpp"

namespace xplan {

struct Settings {
    PlannerConfig planner;
    KinematicsConfig kinematics;
    RewardConfig reward;
    RecognitionConfig recognition;
    PhraseTable phrases = default_phrases();
    SummaryOptions summary;
};

// Overlays one YAML settings document onto `settings`. Unknown keys are
// rejected so that typos do not pass silently. Throws ParseError or
// ValidationError.
void apply_settings(Settings& settings, const std::string& yaml_text, const std::string& origin);

// Defaults, then each layer in order.
Settings resolve_settings(const std::vector<std::string>& layers);

// Config file named by the XPLAN_CONFIG environment variable, if set.
std::optional<std::string> config_from_environment();

std::string read_text_file(const std::string& path);

}  // namespace xplan
