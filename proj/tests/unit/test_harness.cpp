#include <filesystem>

#include "doctest.h"
#include "xplan/errors.hpp"
#include "xplan/harness.hpp"

using namespace xplan;
namespace fs = std::filesystem;

namespace {

Scenario scenario(const std::string& file) { return load_scenario(std::string(XPLAN_SCENARIO_DIR) + "/" + file); }

std::string query_error(const std::string& text) {
    try {
        parse_query(text, 3);
    } catch (const QueryError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("query parsing") {
    const auto q = parse_query("omega1=Continue, omega2=Exit-right", 3);
    REQUIRE(q.actions.size() == 2);
    CHECK(q.actions.at(1) == continue_macro());
    CHECK(q.actions.at(2) == exit_macro(TurnDirection::Right));
    const std::string e = query_error("omega9=Fly");
    CHECK(e.find("1..3") != std::string::npos);
    CHECK(e.find("Change-left") != std::string::npos);
    CHECK(!query_error("").empty());
    CHECK(!query_error("omega1").empty());
    CHECK(!query_error("omega1=Continue,omega1=Stop").empty());
    CHECK(!query_error("omegax=Continue").empty());
}

TEST_CASE("exit codes are distinct per error kind") {
    CHECK(exit_code_for(ParseError("x")) == kExitParse);
    CHECK(exit_code_for(ValidationError("x")) == kExitValidation);
    CHECK(exit_code_for(PlanningError("x")) == kExitPlanning);
    CHECK(exit_code_for(InferenceError("x")) == kExitInference);
    CHECK(exit_code_for(QueryError("x")) == kExitQuery);
    CHECK(exit_code_for(UnexploredCounterfactual("x")) == kExitUnexplored);
    CHECK(exit_code_for(ZeroProbabilityEvidence("x")) == kExitUnexplored);
}

TEST_CASE("run directory round trip reproduces explanations") {
    const Scenario s = scenario("s1.yaml");
    RunOptions o;
    o.seed = 4;
    o.iterations = 100;
    const Run run = plan_scenario(s, o);
    const fs::path dir = fs::temp_directory_path() / "xplan_harness_test";
    fs::remove_all(dir);
    CHECK(write_run(run, dir) == format_plan(run.result.plan));
    CHECK(fs::exists(dir / "run.json"));
    CHECK(fs::exists(dir / "bn.json"));
    const LoadedRun loaded = load_run(dir);
    CHECK(loaded.plan == run.result.plan);
    CHECK(loaded.model.traces().size() == run.result.traces.size());
    CHECK(to_json(loaded.model) == to_json(model_of(run)));

    ExplainOptions eo;
    const std::string text = explain(loaded, "omega1=Continue", eo);
    CHECK(text.rfind("If ego had gone straight then it would have", 0) == 0);
    eo.json = true;
    const auto j = nlohmann::json::parse(explain(loaded, "omega1=Continue", eo));
    CHECK(j.contains("explanation"));
    CHECK(j.contains("raw"));
    CHECK_THROWS_AS(explain(loaded, "omega1=Stop,omega2=Stop,omega3=Stop", {}), UnexploredCounterfactual);
    fs::remove_all(dir);
}

TEST_CASE("missing run directory is a parse error") {
    CHECK_THROWS_AS(load_run("/nonexistent/run"), ParseError);
}

TEST_CASE("batch rows are ordered and deterministic") {
    const Scenario s = scenario("s1.yaml");
    BatchOptions o;
    o.runs = 3;
    o.iterations = 60;
    o.queries = {"omega1=Continue", "omega1=Exit-right"};
    o.threads = 2;
    const auto rows = run_batch(s, o);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].run == static_cast<int>(i / 2));
        CHECK(rows[i].seed == i / 2);
    }
    o.threads = 1;
    CHECK(batch_csv(rows) == batch_csv(run_batch(s, o)));
    CHECK(batch_csv(rows).rfind("run,seed,plan,query,outcome,probability,explanation,error\n", 0) == 0);
    o.runs = 1;
    CHECK(run_batch(s, o).size() == 2);
}
