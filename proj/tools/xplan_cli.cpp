#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "xplan/errors.hpp"
#include "xplan/harness.hpp"

namespace {

using namespace xplan;

std::vector<SettingsLayer> config_layers(const std::string& config_path) {
    std::vector<SettingsLayer> layers;
    std::string path = config_path;
    if (path.empty()) {
        if (auto env = config_from_environment()) path = *env;
    }
    if (!path.empty()) layers.push_back({path, read_text_file(path)});
    return layers;
}

std::vector<std::string> split_queries(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';'))
        if (part.find_first_not_of(" \t") != std::string::npos) out.push_back(part);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explainable macro-action planner"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Settings YAML (overrides XPLAN_CONFIG)");

    auto* plan = app.add_subcommand("plan", "Plan a scenario and persist the run");
    std::string scenario_path, out_dir;
    std::uint64_t seed = 0;
    std::optional<int> iterations, max_depth;
    bool dump_bn = false;
    plan->add_option("--scenario", scenario_path, "Scenario YAML")->required();
    plan->add_option("--seed", seed, "Random seed");
    plan->add_option("--iterations", iterations, "MCTS iterations K");
    plan->add_option("--max-depth", max_depth, "Maximum search depth");
    plan->add_option("--out", out_dir, "Run directory")->required();
    plan->add_option("--config", config_path, "Settings YAML (overrides XPLAN_CONFIG)");
    plan->add_flag("--dump-bn", dump_bn, "Print the network export to stdout");

    auto* expl = app.add_subcommand("explain", "Answer a counterfactual query on a persisted run");
    std::string run_dir, query;
    ExplainOptions eopts;
    bool dump_causal = false;
    expl->add_option("--run", run_dir, "Run directory")->required();
    expl->add_option("--query", query, "Query such as omega1=Continue")->required();
    expl->add_option("--n-causes", eopts.n_causes, "Number of causes");
    expl->add_option("--n-effects", eopts.n_effects, "Number of effects");
    expl->add_flag("--raw", eopts.raw, "Print the sentence before post-processing");
    expl->add_flag("--json", eopts.json, "Print the causal summary as JSON");
    expl->add_flag("--dump-causal", dump_causal, "Alias of --json");
    expl->add_option("--config", config_path, "Settings YAML (overrides XPLAN_CONFIG)");

    auto* batch = app.add_subcommand("batch", "Run seeded simulations and tabulate query answers");
    BatchOptions bopts;
    std::string queries, csv_path;
    batch->add_option("--scenario", scenario_path, "Scenario YAML")->required();
    batch->add_option("--runs", bopts.runs, "Number of runs")->required();
    batch->add_option("--queries", queries, "Queries separated by ';'")->required();
    batch->add_option("--out", csv_path, "Output CSV")->required();
    batch->add_option("--seed", bopts.base_seed, "Seed of the first run");
    batch->add_option("--iterations", bopts.iterations, "MCTS iterations K");
    batch->add_option("--max-depth", bopts.max_depth, "Maximum search depth");
    batch->add_option("--threads", bopts.threads, "Worker threads (0 = hardware)");
    batch->add_option("--n-causes", bopts.explain.n_causes, "Number of causes");
    batch->add_option("--n-effects", bopts.explain.n_effects, "Number of effects");
    batch->add_option("--config", config_path, "Settings YAML (overrides XPLAN_CONFIG)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*plan) {
            RunOptions ro;
            ro.seed = seed;
            ro.iterations = iterations;
            ro.max_depth = max_depth;
            ro.extra_layers = config_layers(config_path);
            Scenario sc = load_scenario(scenario_path);
            Run run = plan_scenario(sc, ro);
            const std::string text = write_run(run, out_dir);
            if (dump_bn) std::cout << to_json(model_of(run)).dump(1) << "\n";
            std::cout << "plan: " << text << "\n";
        } else if (*expl) {
            eopts.json = eopts.json || dump_causal;
            LoadedRun loaded = load_run(run_dir, config_layers(config_path));
            std::cout << explain(loaded, query, eopts) << "\n";
        } else if (*batch) {
            bopts.queries = split_queries(queries);
            bopts.extra_layers = config_layers(config_path);
            Scenario sc = load_scenario(scenario_path);
            const std::string csv = batch_csv(run_batch(sc, bopts));
            std::ofstream out(csv_path, std::ios::binary);
            if (!out) throw ValidationError("cannot write " + csv_path);
            out << csv;
            std::cout << "wrote " << csv_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
