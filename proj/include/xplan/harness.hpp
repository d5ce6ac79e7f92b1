#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xplan/bayes_net.hpp"
#include "xplan/causal.hpp"
#include "xplan/config.hpp"
#include "xplan/mcts.hpp"
#include "xplan/scenario.hpp"

namespace xplan {

// Exit codes of the command line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitParse = 3,
    kExitValidation = 4,
    kExitPlanning = 5,
    kExitInference = 6,
    kExitQuery = 7,
    kExitUnexplored = 8,
};

int exit_code_for(const std::exception& e);

struct SettingsLayer {
    std::string origin;
    std::string text;
};

struct RunOptions {
    std::uint64_t seed = 0;
    std::optional<int> iterations;
    std::optional<int> max_depth;
    std::vector<SettingsLayer> extra_layers;  // applied after the scenario's own settings
};

struct Run {
    Scenario scenario;
    std::vector<SettingsLayer> layers;
    Settings settings;
    std::uint64_t seed = 0;
    JointState initial;
    std::vector<VehiclePrediction> predictions;
    PlanResult result;
};

Settings settings_for(const std::vector<SettingsLayer>& layers, std::optional<int> iterations,
                      std::optional<int> max_depth, std::uint64_t seed);

// Sample the initial state, recognise goals, run the search.
Run plan_scenario(const Scenario& scenario, const RunOptions& options);

BnModel model_of(const Run& run);

nlohmann::json run_to_json(const Run& run);

// Everything explanation needs, restored from a run directory.
struct LoadedRun {
    std::vector<SettingsLayer> layers;
    Settings settings;
    MacroSequence plan;
    BnModel model;
};

LoadedRun load_run(const std::filesystem::path& dir, const std::vector<SettingsLayer>& extra_layers = {});

// Writes run.json and bn.json; returns the factual plan as text.
std::string write_run(const Run& run, const std::filesystem::path& dir);

// "omega1=Continue,omega2=Exit-right"; throws QueryError.
CounterfactualQuery parse_query(const std::string& text, int max_depth);

std::string format_plan(const MacroSequence& plan);

struct ExplainOptions {
    int n_causes = 1;
    int n_effects = 1;
    bool raw = false;
    bool json = false;
};

std::string explain(const LoadedRun& run, const std::string& query_text, const ExplainOptions& options);

struct BatchRow {
    int run = 0;
    std::uint64_t seed = 0;
    std::string plan;
    std::string query;
    std::string outcome;
    std::string probability;
    std::string explanation;
    std::string error;
};

struct BatchOptions {
    int runs = 10;
    std::uint64_t base_seed = 0;
    std::optional<int> iterations;
    std::optional<int> max_depth;
    std::vector<std::string> queries;
    ExplainOptions explain;
    std::vector<SettingsLayer> extra_layers;
    unsigned threads = 0;  // 0: hardware concurrency
};

std::vector<BatchRow> run_batch(const Scenario& scenario, const BatchOptions& options);
std::string batch_csv(const std::vector<BatchRow>& rows);

}  // namespace xplan
