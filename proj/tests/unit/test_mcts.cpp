#include "doctest.h"
#include "xplan/errors.hpp"
#include "xplan/harness.hpp"
#include "xplan/mcts.hpp"

using namespace xplan;

namespace {

Run plan(const std::string& file, std::uint64_t seed, int k, int depth) {
    const Scenario s = load_scenario(std::string(XPLAN_SCENARIO_DIR) + "/" + file);
    RunOptions o;
    o.seed = seed;
    o.iterations = k;
    o.max_depth = depth;
    return plan_scenario(s, o);
}

}  // namespace

TEST_CASE("planner config validation") {
    PlannerConfig c;
    CHECK_NOTHROW(validate(c));
    c.iterations = 0;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = {};
    c.max_depth = 0;
    CHECK_THROWS_AS(validate(c), ValidationError);
}

TEST_CASE("tree statistics are consistent with the traces") {
    const Run run = plan("s1.yaml", 1, 120, 3);
    const auto& r = run.result;
    CHECK(r.traces.size() == 120);
    const TreeNode* root = r.tree.find({});
    REQUIRE(root != nullptr);
    CHECK(root->visits + root->terminal_arrivals == 120);
    for (const auto& [prefix, node] : r.tree.nodes) {
        int selected = 0;
        for (const auto& [a, c] : node.children) selected += c.visits;
        CHECK(selected == node.visits);
        for (const auto& [a, c] : node.children) {
            MacroSequence child = prefix;
            child.push_back(a);
            const TreeNode* n = r.tree.find(child);
            const int through = n ? n->visits + n->terminal_arrivals : 0;
            CHECK(through == c.visits);
        }
    }
    for (const auto& t : r.traces) {
        CHECK(t.macros.size() <= 3);
        CHECK(outcome_of(t.components) == t.outcome);
        CHECK(t.agents.size() == run.predictions.size());
    }
}

TEST_CASE("depth one search spends every iteration at the root") {
    const Run run = plan("s1.yaml", 2, 50, 1);
    const TreeNode* root = run.result.tree.find({});
    REQUIRE(root != nullptr);
    int total = 0;
    for (const auto& [a, c] : root->children) total += c.visits;
    CHECK(total == 50);
    CHECK(run.result.plan.size() == 1);
    for (const auto& t : run.result.traces) CHECK(t.macros.size() == 1);
}

TEST_CASE("search is deterministic for a seed") {
    const Run a = plan("s2.yaml", 3, 80, 3);
    const Run b = plan("s2.yaml", 3, 80, 3);
    CHECK(a.result.plan == b.result.plan);
    REQUIRE(a.result.traces.size() == b.result.traces.size());
    for (std::size_t i = 0; i < a.result.traces.size(); ++i) {
        CHECK(a.result.traces[i].macros == b.result.traces[i].macros);
        CHECK(a.result.traces[i].agents == b.result.traces[i].agents);
        CHECK(a.result.traces[i].reward == b.result.traces[i].reward);
    }
}

TEST_CASE("best plan follows visits") {
    SearchTree t;
    t.nodes[{}].visits = 10;
    t.nodes[{}].children[continue_macro()] = {3, 1.0};
    t.nodes[{}].children[change_left()] = {7, -1.0};
    t.nodes[{change_left()}].visits = 5;
    t.nodes[{change_left()}].children[continue_macro()] = {5, 0.0};
    CHECK(best_plan(t) == MacroSequence{change_left(), continue_macro()});
}

TEST_CASE("agent samples come from the predictions") {
    const Run run = plan("s1.yaml", 0, 10, 1);
    for (int i = 0; i < 20; ++i) {
        const auto s = sample_agents(run.predictions, 5, i);
        REQUIRE(s.size() == run.predictions.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& g = run.predictions[k].goals[static_cast<std::size_t>(s[k].goal)];
            CHECK(g.probability > 0.0);
            CHECK(s[k].trajectory < static_cast<int>(g.trajectories.size()));
        }
        CHECK(s == sample_agents(run.predictions, 5, i));
    }
}
