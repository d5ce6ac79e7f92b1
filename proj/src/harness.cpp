#include "xplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "xplan/errors.hpp"
#include "xplan/grammar.hpp"

namespace xplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json sequence_json(const MacroSequence& seq) {
    json out = json::array();
    for (const auto& m : seq) out.push_back(m.name());
    return out;
}

MacroSequence sequence_from(const json& j) {
    MacroSequence out;
    for (const auto& name : j) {
        auto m = parse_macro(name.get<std::string>());
        if (!m) throw ParseError("run file: unknown macro '" + name.get<std::string>() + "'");
        out.push_back(*m);
    }
    return out;
}

json trace_json(const TraceRecord& t) {
    json agents = json::array();
    for (const auto& a : t.agents) agents.push_back({a.vehicle, a.goal, a.trajectory});
    json comps = json::object();
    for (Component c : kComponents)
        if (t.components[c]) comps[std::string(to_string(c))] = *t.components[c];
    json out = {{"agents", agents},
                {"macros", sequence_json(t.macros)},
                {"components", comps},
                {"outcome", std::string(to_string(t.outcome))},
                {"reward", t.reward}};
    out["collided_with"] = t.collided_with ? json(*t.collided_with) : json(nullptr);
    return out;
}

TraceRecord trace_from(const json& j) {
    TraceRecord t;
    for (const auto& a : j.at("agents")) t.agents.push_back({a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>()});
    t.macros = sequence_from(j.at("macros"));
    for (const auto& [k, v] : j.at("components").items()) {
        auto c = parse_component(k);
        if (!c) throw ParseError("run file: unknown component '" + k + "'");
        t.components[*c] = v.get<double>();
    }
    auto o = parse_outcome(j.at("outcome").get<std::string>());
    if (!o) throw ParseError("run file: unknown outcome");
    t.outcome = *o;
    t.reward = j.at("reward").get<double>();
    if (!j.at("collided_with").is_null()) t.collided_with = j.at("collided_with").get<int>();
    return t;
}

json priors_json(const std::vector<AgentPrior>& priors) {
    json out = json::array();
    for (const auto& p : priors) {
        json plans = json::array();
        for (const auto& per_goal : p.plans) {
            json g = json::array();
            for (const auto& seq : per_goal) g.push_back(sequence_json(seq));
            plans.push_back(g);
        }
        out.push_back({{"vehicle", p.vehicle},
                       {"goal", p.goal},
                       {"trajectory", p.trajectory},
                       {"goal_labels", p.goal_labels},
                       {"plans", plans}});
    }
    return out;
}

std::vector<AgentPrior> priors_from_json(const json& j) {
    std::vector<AgentPrior> out;
    for (const auto& e : j) {
        AgentPrior p;
        p.vehicle = e.at("vehicle").get<int>();
        p.goal = e.at("goal").get<std::vector<double>>();
        p.trajectory = e.at("trajectory").get<std::vector<std::vector<double>>>();
        p.goal_labels = e.at("goal_labels").get<std::vector<std::string>>();
        for (const auto& g : e.at("plans")) {
            std::vector<MacroSequence> per_goal;
            for (const auto& seq : g) per_goal.push_back(sequence_from(seq));
            p.plans.push_back(std::move(per_goal));
        }
        out.push_back(std::move(p));
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", p);
    return buf;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UnexploredCounterfactual*>(&e) || dynamic_cast<const ZeroProbabilityEvidence*>(&e))
        return kExitUnexplored;
    if (dynamic_cast<const QueryError*>(&e)) return kExitQuery;
    if (dynamic_cast<const InferenceError*>(&e)) return kExitInference;
    if (dynamic_cast<const PlanningError*>(&e)) return kExitPlanning;
    if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
    if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
    return 1;
}

Settings settings_for(const std::vector<SettingsLayer>& layers, std::optional<int> iterations,
                      std::optional<int> max_depth, std::uint64_t seed) {
    Settings s;
    for (const auto& l : layers) apply_settings(s, l.text, l.origin);
    if (iterations) s.planner.iterations = *iterations;
    if (max_depth) s.planner.max_depth = *max_depth;
    s.planner.seed = seed;
    validate(s.planner);
    return s;
}

Run plan_scenario(const Scenario& scenario, const RunOptions& options) {
    Run run;
    run.scenario = scenario;
    if (!scenario.settings_yaml.empty()) run.layers.push_back({scenario.name + " settings", scenario.settings_yaml});
    for (const auto& l : options.extra_layers) run.layers.push_back(l);
    run.seed = options.seed;
    run.settings = settings_for(run.layers, options.iterations, options.max_depth, options.seed);
    validate(scenario);
    run.initial = sample_initial_states(scenario, options.seed);
    PredictionContext ctx{scenario.layout, run.settings.kinematics, run.settings.reward, run.settings.recognition,
                          scenario.timestep, scenario.horizon};
    run.predictions = predict_all(scenario, run.initial, ctx);
    run.result = run_mcts(scenario, run.initial, run.predictions, run.settings.planner, run.settings.kinematics,
                          run.settings.reward);
    return run;
}

BnModel model_of(const Run& run) {
    return build_bn(run.result.traces, priors_from(run.predictions), run.settings.planner.max_depth,
                    run.settings.reward);
}

json run_to_json(const Run& run) {
    json out;
    out["format"] = 1;
    out["scenario"] = {{"name", run.scenario.name}, {"hash", run.scenario.source_hash}};
    out["seed"] = run.seed;
    json layers = json::array();
    for (const auto& l : run.layers) layers.push_back({{"origin", l.origin}, {"text", l.text}});
    out["settings_layers"] = layers;
    out["planner"] = {{"iterations", run.settings.planner.iterations},
                      {"max_depth", run.settings.planner.max_depth},
                      {"exploration", run.settings.planner.exploration}};

    json initial = json::array();
    for (const auto& [id, st] : run.initial.vehicles) {
        const auto& lp = run.initial.lanes.at(id);
        initial.push_back({{"id", id},
                           {"x", st.position.x},
                           {"y", st.position.y},
                           {"heading", st.heading},
                           {"speed", st.speed},
                           {"lane", lp.lane},
                           {"s", lp.s}});
    }
    out["initial_state"] = initial;

    json preds = json::array();
    for (const auto& vp : run.predictions) {
        json goals = json::array();
        for (const auto& g : vp.goals) {
            json trajs = json::array();
            for (const auto& c : g.trajectories)
                trajs.push_back({{"macros", sequence_json(c.macros)},
                                 {"probability", c.probability},
                                 {"reward", c.reward},
                                 {"steps", c.trajectory.states.size()}});
            goals.push_back({{"label", g.goal.label}, {"probability", g.probability}, {"trajectories", trajs}});
        }
        preds.push_back({{"vehicle", vp.vehicle}, {"goals", goals}});
    }
    out["predictions"] = preds;
    out["agent_priors"] = priors_json(priors_from(run.predictions));
    out["plan"] = sequence_json(run.result.plan);

    json tree = json::array();
    for (const auto& [prefix, node] : run.result.tree.nodes) {
        json children = json::object();
        for (const auto& [a, s] : node.children) children[a.name()] = {{"visits", s.visits}, {"q", s.q}};
        tree.push_back({{"prefix", sequence_json(prefix)},
                        {"visits", node.visits},
                        {"terminal_arrivals", node.terminal_arrivals},
                        {"children", children}});
    }
    out["tree"] = tree;
    json traces = json::array();
    for (const auto& t : run.result.traces) traces.push_back(trace_json(t));
    out["traces"] = traces;
    return out;
}

std::string write_run(const Run& run, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / "run.json", run_to_json(run).dump(1) + "\n");
    write_file(dir / "bn.json", to_json(model_of(run)).dump(1) + "\n");
    return format_plan(run.result.plan);
}

LoadedRun load_run(const fs::path& dir, const std::vector<SettingsLayer>& extra_layers) {
    const fs::path file = dir / "run.json";
    if (!fs::exists(file)) throw ParseError(file.string() + ": run file not found");
    json j;
    try {
        j = json::parse(read_text_file(file.string()));
    } catch (const json::exception& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
    try {
        std::vector<SettingsLayer> layers;
        for (const auto& l : j.at("settings_layers"))
            layers.push_back({l.at("origin").get<std::string>(), l.at("text").get<std::string>()});
        const auto iterations = j.at("planner").at("iterations").get<int>();
        const auto depth = j.at("planner").at("max_depth").get<int>();
        const auto seed = j.at("seed").get<std::uint64_t>();
        // the model must use the weights the search used
        Settings planned = settings_for(layers, iterations, depth, seed);
        auto all = layers;
        all.insert(all.end(), extra_layers.begin(), extra_layers.end());
        Settings settings = settings_for(all, iterations, depth, seed);
        TraceLog traces;
        for (const auto& t : j.at("traces")) traces.push_back(trace_from(t));
        auto priors = priors_from_json(j.at("agent_priors"));
        BnModel model = build_bn(traces, priors, depth, planned.reward);
        return LoadedRun{all, settings, sequence_from(j.at("plan")), std::move(model)};
    } catch (const json::exception& e) {
        throw ParseError(file.string() + ": malformed run file: " + e.what());
    }
}

CounterfactualQuery parse_query(const std::string& text, int max_depth) {
    std::string names;
    for (const auto& m : all_macros()) names += (names.empty() ? "" : ", ") + m.name();
    auto fail = [&](const std::string& part) -> CounterfactualQuery {
        throw QueryError("malformed query '" + part + "': expected omegaD=Action with D in 1.." +
                         std::to_string(max_depth) + " and Action one of " + names);
    };
    CounterfactualQuery q;
    std::stringstream ss(text);
    std::string part;
    bool any = false;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        any = true;
        auto eq = part.find('=');
        if (eq == std::string::npos || part.rfind("omega", 0) != 0) return fail(part);
        const std::string digits = trim(part.substr(5, eq - 5));
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 6)
            return fail(part);
        const int d = std::stoi(digits);
        auto m = parse_macro(trim(part.substr(eq + 1)));
        if (d < 1 || d > max_depth || !m) return fail(part);
        if (q.actions.count(d)) throw QueryError("depth " + std::to_string(d) + " assigned twice in query");
        q.actions[d] = *m;
    }
    if (!any) return fail(text);
    return q;
}

std::string format_plan(const MacroSequence& plan) {
    std::string out = "[";
    for (std::size_t i = 0; i < plan.size(); ++i) out += (i ? ", " : "") + plan[i].name();
    return out + "]";
}

std::string explain(const LoadedRun& run, const std::string& query_text, const ExplainOptions& options) {
    if (options.n_causes < 0 || options.n_effects < 0) throw QueryError("cause and effect counts must be >= 0");
    CounterfactualQuery q = parse_query(query_text, run.model.max_depth());
    q.n_causes = options.n_causes;
    q.n_effects = options.n_effects;
    CausalSummary summary = explain_query(run.model, run.plan, q, run.settings.summary);
    const std::string raw = generate_raw(summary, run.settings.phrases);
    const std::string text = post_process(raw, run.settings.phrases);
    if (options.json) {
        json j = to_json(summary);
        j["raw"] = raw;
        j["explanation"] = text;
        return j.dump(2);
    }
    return options.raw ? raw : text;
}

std::vector<BatchRow> run_batch(const Scenario& scenario, const BatchOptions& options) {
    if (options.runs < 1) throw ValidationError("runs must be at least 1");
    if (options.queries.empty()) throw QueryError("batch needs at least one query");
    std::vector<std::vector<BatchRow>> per_run(static_cast<std::size_t>(options.runs));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < options.runs; r = next++) {
            const std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(r);
            auto& rows = per_run[static_cast<std::size_t>(r)];
            try {
                RunOptions ro;
                ro.seed = seed;
                ro.iterations = options.iterations;
                ro.max_depth = options.max_depth;
                ro.extra_layers = options.extra_layers;
                Run run = plan_scenario(scenario, ro);
                LoadedRun loaded{run.layers, run.settings, run.result.plan, model_of(run)};
                for (const auto& qtext : options.queries) {
                    BatchRow row{r, seed, format_plan(run.result.plan), qtext, "", "", "", ""};
                    try {
                        CounterfactualQuery q = parse_query(qtext, loaded.model.max_depth());
                        q.n_causes = options.explain.n_causes;
                        q.n_effects = options.explain.n_effects;
                        OutcomeResult o = outcome_given_cf(loaded.model, q);
                        row.outcome = std::string(to_string(o.most_likely));
                        row.probability = format_probability(o.probability);
                        ExplainOptions eo = options.explain;
                        eo.json = false;
                        row.explanation = explain(loaded, qtext, eo);
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                    rows.push_back(std::move(row));
                }
            } catch (const std::exception& e) {
                for (const auto& qtext : options.queries) rows.push_back({r, seed, "", qtext, "", "", "", e.what()});
            }
        }
    };
    unsigned n = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(options.runs));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::vector<BatchRow> out;
    for (auto& rows : per_run)
        for (auto& row : rows) out.push_back(std::move(row));
    return out;
}

std::string batch_csv(const std::vector<BatchRow>& rows) {
    std::string out = "run,seed,plan,query,outcome,probability,explanation,error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + csv_field(r.plan) + "," +
               csv_field(r.query) + "," + csv_field(r.outcome) + "," + r.probability + "," +
               csv_field(r.explanation) + "," + csv_field(r.error) + "\n";
    }
    return out;
}

}  // namespace xplan
