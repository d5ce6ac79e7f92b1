#include <string>

#include "doctest.h"
#include "xplan/errors.hpp"
#include "xplan/scenario.hpp"

using namespace xplan;

namespace {

const char* kBase = R"(
name: tiny
timestep_s: 0.1
horizon_steps: 100
layout:
  lanes:
    - id: R
      midline: [[0, 0], [200, 0]]
      left: L
    - id: L
      midline: [[0, 3.5], [200, 3.5]]
      right: R
ego:
  id: 0
  lane: R
  s: 20
  spawn_range_m: 10
  speed_range_mps: [5, 10]
  goal: {lane: R, s: [150, 190]}
vehicles:
  - id: 1
    lane: L
    s: 50
    speed_range_mps: [8, 8]
    goals:
      - {lane: L, s: [150, 200]}
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

template <class E>
std::string error_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parse a minimal scenario") {
    auto sc = parse_scenario(kBase);
    CHECK(sc.layout.lanes().size() == 2);
    CHECK(sc.ego_id == 0);
    CHECK(sc.vehicles.size() == 1);
    CHECK(sc.ego_goal.lane == "R");
    CHECK(sc.timestep == doctest::Approx(0.1));
}

TEST_CASE("missing ego goal is a validation error") {
    auto text = replace(kBase, "  goal: {lane: R, s: [150, 190]}\n", "");
    CHECK(error_of<ValidationError>(text).find("ego goal absent") != std::string::npos);
}

TEST_CASE("one-point midline is a validation error") {
    auto text = replace(kBase, "[[0, 0], [200, 0]]", "[[0, 0]]");
    CHECK(error_of<ValidationError>(text).find("degenerate midline") != std::string::npos);
}

TEST_CASE("asymmetric neighbours are rejected") {
    auto text = replace(kBase, "      right: R\n", "");
    CHECK_FALSE(error_of<ValidationError>(text).empty());
}

TEST_CASE("malformed YAML is a parse error with a line number") {
    auto msg = error_of<ParseError>("layout: [1, 2\nfoo: }");
    CHECK_FALSE(msg.empty());
    CHECK(msg.find("<string>:") != std::string::npos);
}

TEST_CASE("missing field reports context") {
    auto text = replace(kBase, "timestep_s: 0.1\n", "");
    CHECK(error_of<ParseError>(text).find("timestep_s") != std::string::npos);
}

TEST_CASE("sampling respects ranges and is deterministic") {
    auto sc = parse_scenario(kBase);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto js = sample_initial_states(sc, seed);
        const auto& ego = js.vehicles.at(0);
        CHECK(ego.speed >= 5.0);
        CHECK(ego.speed <= 10.0);
        CHECK(js.lanes.at(0).s >= 15.0);
        CHECK(js.lanes.at(0).s <= 25.0);
        CHECK(js.vehicles.at(1).speed == 8.0);
    }
    auto a = sample_initial_states(sc, 42);
    auto b = sample_initial_states(sc, 42);
    CHECK(a.vehicles.at(0).position == b.vehicles.at(0).position);
    CHECK(a.vehicles.at(0).speed == b.vehicles.at(0).speed);
}

TEST_CASE("zero spawn range places the vehicle at the nominal position") {
    auto sc = parse_scenario(kBase);
    auto js = sample_initial_states(sc, 7);
    CHECK(js.lanes.at(1).s == 50.0);
    CHECK(js.vehicles.at(1).position.x == doctest::Approx(50.0));
    CHECK(js.vehicles.at(1).position.y == doctest::Approx(3.5));
}

TEST_CASE("sampled speeds are uniform on average") {
    auto sc = parse_scenario(kBase);
    double sum = 0.0;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) sum += sample_initial_states(sc, static_cast<std::uint64_t>(seed)).vehicles.at(0).speed;
    CHECK(std::abs(sum / n - 7.5) < 0.05);
}

TEST_CASE("loading is pure") {
    auto a = parse_scenario(kBase);
    auto b = parse_scenario(kBase);
    CHECK(a.source_hash == b.source_hash);
    CHECK(a.layout.lanes().size() == b.layout.lanes().size());
    CHECK(a.layout.lane("R").midline.points() == b.layout.lane("R").midline.points());
}

TEST_CASE("unreachable ego goal is rejected") {
    std::string text = kBase;
    text = replace(text, "      left: L\n", "");
    text = replace(text, "      right: R\n", "");
    text = replace(text, "goal: {lane: R, s: [150, 190]}", "goal: {lane: L, s: [150, 190]}");
    CHECK(error_of<ValidationError>(text).find("unreachable") != std::string::npos);
}
