#include <chrono>
#include <random>

#include "doctest.h"
#include "xplan/errors.hpp"
#include "xplan/grammar.hpp"

using namespace xplan;

namespace {

CausalSummary worked_example() {
    CausalSummary in;
    in.s.omega = {continue_macro()};
    in.s.outcome = Outcome::Done;
    in.s.p = 0.75;
    in.e = {{Component::Time, -5.0, std::nullopt}};
    Cause c;
    c.vehicle = 1;
    c.macros = {change_right()};
    c.probability = 0.6;
    in.c = {c};
    return in;
}

}  // namespace

TEST_CASE("worked example is reproduced exactly") {
    const auto start = std::chrono::steady_clock::now();
    const std::string raw = generate_raw(worked_example(), default_phrases());
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(raw ==
          "If ego had continued ahead then it would have likely reached its goal with lower time to goal because "
          "vehicle 1 would have probably changed right.");
    CHECK(elapsed < std::chrono::milliseconds(1));
}

TEST_CASE("adverb thresholds") {
    CHECK(adverb(0.0) == "never");
    CHECK(adverb(0.1) == "unlikely");
    CHECK(adverb(0.33) == "unlikely");
    CHECK(adverb(0.34) == "probably");
    CHECK(adverb(0.5) == "probably");
    CHECK(adverb(0.67) == "probably");
    CHECK(adverb(0.68) == "likely");
    CHECK(adverb(0.9) == "likely");
    CHECK(adverb(1.0) == "certainly");
    CHECK(adverb(std::nullopt) == "");
    CHECK_THROWS_AS(adverb(1.5), ValidationError);
    CHECK_THROWS_AS(adverb(-0.1), ValidationError);
}

TEST_CASE("post-processing substitutes comparisons") {
    const PhraseTable t = table_phrases();
    CHECK(post_process("If ego had gone straight then it would have reached the goal with higher time to goal because "
                       "vehicle 1 probably changes right then exits right.",
                       t) ==
          "If ego had gone straight then it would have reached the goal slower because vehicle 1 probably changes "
          "right then exits right.");
    CHECK(post_process("reached the goal with higher time to goal and with higher jerk", t) ==
          "reached the goal slower and with more jerk");
    CHECK(post_process("with lower angular acceleration", t) == "with less angular acceleration");
}

TEST_CASE("post-processing is idempotent on a fuzz corpus") {
    const PhraseTable t = default_phrases();
    const std::vector<std::string> pieces{"with", " ", "higher", "lower", "time to goal", "with higher",
                                          "with lower time to goal", "slower", "faster", "more", "less", "jerk",
                                          "x", ".", "with higher time", " to goal", "wit", "h "};
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(0, 12);
    for (int n = 0; n < 1000; ++n) {
        std::string s;
        const int k = len(rng);
        for (int i = 0; i < k; ++i) s += pieces[pick(rng)];
        const std::string once = post_process(s, t);
        CAPTURE(s);
        CHECK(post_process(once, t) == once);
    }
}

TEST_CASE("macro sequences join with then") {
    const PhraseTable t = table_phrases();
    CHECK(realize_macros({change_right(), exit_macro(TurnDirection::Right)}, Tense::NonEgoPresent, t) ==
          "changes right then exits right");
    CHECK(realize_macros({continue_macro()}, Tense::EgoConditional, t) == "gone straight");
}

TEST_CASE("collision outcome names the partner") {
    CausalSummary in = worked_example();
    in.s.outcome = Outcome::Collision;
    in.s.p = std::nullopt;
    in.s.collided_with = 1;
    in.e.clear();
    in.c.clear();
    CHECK(generate_raw(in, default_phrases()) == "If ego had continued ahead then it would have collided with vehicle 1.");
    in.s.collided_with = std::nullopt;
    CHECK(generate_raw(in, default_phrases()) == "If ego had continued ahead then it would have collided.");
}

TEST_CASE("effects chain with and") {
    CausalSummary in = worked_example();
    in.e.push_back({Component::Jerk, 0.2, 3.0});
    in.c.clear();
    CHECK(explain_text(in, default_phrases()) ==
          "If ego had continued ahead then it would have likely reached its goal faster and with more jerk.");
}

TEST_CASE("phrase tables are total") {
    CHECK_NOTHROW(default_phrases().check_total());
    CHECK_NOTHROW(table_phrases().check_total());
    PhraseTable broken = default_phrases();
    broken.components.erase("jerk");
    CHECK_THROWS_AS(broken.check_total(), ValidationError);
}
