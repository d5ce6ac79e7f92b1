#pragma once

#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "xplan/bayes_net.hpp"

namespace xplan {

struct CounterfactualQuery {
    std::map<int, MacroAction> actions;  // depth (1-based) -> action
    int n_causes = 1;
    int n_effects = 1;
};

// Orders the query's actions by depth.
MacroSequence counterfactual_sequence(const CounterfactualQuery& query);
Assignment evidence_of(const CounterfactualQuery& query);
// Evidence pinning every action of a full sequence.
Assignment evidence_of(const MacroSequence& sequence);

struct OutcomeResult {
    std::map<Outcome, double> distribution;
    Outcome most_likely = Outcome::Dead;
    double probability = 0.0;
};

// p(O | omega_CF); ties prefer collision, done, termination, dead. Throws
// UnexploredCounterfactual when the evidence has probability 0.
OutcomeResult outcome_given_cf(const BnModel& model, const CounterfactualQuery& query);

struct Effect {
    Component component = Component::Time;
    double delta = 0.0;                    // E[R|F] - E[R|CF], reward space
    std::optional<double> quantity_delta;  // E[q|CF] - E[q|F], raw quantity
};

// Deltas over components set under both conditionals, sorted by |delta|
// descending (stable in component order), truncated to n_effects.
std::vector<Effect> reward_deltas(const BnModel& model, const MacroSequence& factual, const CounterfactualQuery& query);
std::vector<Effect> reward_deltas(const BnModel& model, const Assignment& factual, const Assignment& counterfactual,
                                  int n_effects);

struct Influence {
    VehicleId vehicle = 0;
    int goal = 0;
    int trajectory = 0;
    double divergence = 0.0;  // bits; may be infinite
    // Marginal mass the conditional gives zero probability, and the KL sum
    // over the remaining points. Infinite divergences are ranked by these.
    double unsupported = 0.0;
    double supported = 0.0;
};

// KL(p(Omega) || p(Omega | G^i = g, S^i = s)) in bits over the realized
// support of the full action vector.
double influence_divergence(const BnModel& model, VehicleId vehicle, int goal, int trajectory);
Influence influence_of(const BnModel& model, VehicleId vehicle, int goal, int trajectory);

// Every (vehicle, goal, trajectory) with positive prior, unsorted.
std::vector<Influence> all_influences(const BnModel& model);

struct Cause {
    VehicleId vehicle = 0;
    int goal = 0;
    int trajectory = 0;
    MacroSequence macros;
    double probability = 0.0;  // p(g | observations) * p(s | g)
    double divergence = 0.0;
};

// Vehicles whose divergence is the same for every (g, s) are dropped; each
// remaining vehicle contributes its least divergent (g, s). Sorted by
// divergence ascending, infinite last (infinite ones by unsupported mass,
// then by the supported sum); truncated to n_causes.
std::vector<Cause> agent_influences(const BnModel& model, int n_causes);

struct SummaryScenario {
    MacroSequence omega;
    Outcome outcome = Outcome::Dead;
    std::optional<double> p;  // nullopt suppresses the adverb
    std::optional<VehicleId> collided_with;
};

struct CausalSummary {
    SummaryScenario s;
    std::vector<Effect> e;
    std::vector<Cause> c;
};

struct SummaryOptions {
    bool suppress_certain = true;  // p == 1 is passed on as empty
};

CausalSummary assemble_summary(const OutcomeResult& outcome, std::vector<Effect> effects, std::vector<Cause> causes,
                               const CounterfactualQuery& query, const SummaryOptions& options = {},
                               std::optional<VehicleId> collided_with = std::nullopt);

// Most frequent collision partner among traces consistent with the query.
std::optional<VehicleId> collision_partner(const BnModel& model, const CounterfactualQuery& query);

// Full pipeline for one query.
CausalSummary explain_query(const BnModel& model, const MacroSequence& factual, const CounterfactualQuery& query,
                            const SummaryOptions& options = {});

nlohmann::json to_json(const CausalSummary& summary);

}  // namespace xplan
