#include "xplan/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

// Tie-break order for the most likely outcome: safety-salient first.
constexpr std::array<Outcome, 4> kOutcomePriority = {Outcome::Collision, Outcome::Done, Outcome::Termination,
                                                     Outcome::Dead};

std::string describe(const CounterfactualQuery& q) {
    std::string out;
    for (const auto& [d, a] : q.actions) {
        if (!out.empty()) out += ",";
        out += "omega" + std::to_string(d) + "=" + a.name();
    }
    return out;
}

std::vector<Variable> action_vars(const BnModel& model) {
    std::vector<Variable> out;
    for (int d = 1; d <= model.max_depth(); ++d) out.push_back(action_var(d));
    return out;
}

}  // namespace

MacroSequence counterfactual_sequence(const CounterfactualQuery& query) {
    MacroSequence out;
    for (const auto& [d, a] : query.actions) out.push_back(a);
    return out;
}

Assignment evidence_of(const CounterfactualQuery& query) {
    Assignment ev;
    for (const auto& [d, a] : query.actions) ev[action_var(d)] = std::optional<MacroAction>(a);
    return ev;
}

Assignment evidence_of(const MacroSequence& sequence) {
    Assignment ev;
    for (std::size_t i = 0; i < sequence.size(); ++i)
        ev[action_var(static_cast<int>(i) + 1)] = std::optional<MacroAction>(sequence[i]);
    return ev;
}

OutcomeResult outcome_given_cf(const BnModel& model, const CounterfactualQuery& cf) {
    Distribution dist;
    try {
        dist = query(model, {outcome_var()}, evidence_of(cf));
    } catch (const ZeroProbabilityEvidence&) {
        throw UnexploredCounterfactual("unexplored counterfactual: " + describe(cf) +
                                       " was never reached by the search");
    }
    OutcomeResult out;
    for (Outcome o : kOutcomes) out.distribution[o] = 0.0;
    for (const auto& [key, p] : dist) out.distribution[std::get<Outcome>(key.front())] += p;
    double best = -1.0;
    for (Outcome o : kOutcomePriority) {
        if (out.distribution[o] > best) {
            best = out.distribution[o];
            out.most_likely = o;
        }
    }
    out.probability = best;
    return out;
}

std::vector<Effect> reward_deltas(const BnModel& model, const Assignment& factual, const Assignment& counterfactual,
                                  int n_effects) {
    ExpectedReward f, cf;
    try {
        f = expected_reward(model, factual);
        cf = expected_reward(model, counterfactual);
    } catch (const ZeroProbabilityEvidence&) {
        throw UnexploredCounterfactual("unexplored counterfactual: reward expectation has no support");
    }
    std::vector<Effect> out;
    for (Component c : kComponents) {
        const auto i = static_cast<std::size_t>(c);
        if (!f.reward[i] || !cf.reward[i]) continue;
        Effect e;
        e.component = c;
        e.delta = *f.reward[i] - *cf.reward[i];
        e.quantity_delta = *cf.quantity[i] - *f.quantity[i];
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Effect& a, const Effect& b) { return std::abs(a.delta) > std::abs(b.delta); });
    if (n_effects >= 0 && static_cast<int>(out.size()) > n_effects) out.resize(static_cast<std::size_t>(n_effects));
    return out;
}

std::vector<Effect> reward_deltas(const BnModel& model, const MacroSequence& factual,
                                  const CounterfactualQuery& query) {
    if (evidence_probability(model, evidence_of(query)) <= 0.0)
        throw UnexploredCounterfactual("unexplored counterfactual: " + describe(query) +
                                       " was never reached by the search");
    return reward_deltas(model, evidence_of(factual), evidence_of(query), query.n_effects);
}

Influence influence_of(const BnModel& model, VehicleId vehicle, int goal, int trajectory) {
    Influence inf{vehicle, goal, trajectory, 0.0, 0.0, 0.0};
    const auto vars = action_vars(model);
    const Distribution marginal = query(model, vars, {});
    Distribution conditional;
    try {
        conditional = query(model, vars, {{goal_var(vehicle), goal}, {trajectory_var(vehicle), trajectory}});
    } catch (const ZeroProbabilityEvidence&) {
        inf.divergence = std::numeric_limits<double>::infinity();
        inf.unsupported = 1.0;
        return inf;
    }
    for (const auto& [omega, p] : marginal) {
        if (p <= 0.0) continue;
        auto it = conditional.find(omega);
        if (it == conditional.end() || it->second <= 0.0)
            inf.unsupported += p;
        else
            inf.supported += p * std::log2(p / it->second);
    }
    inf.divergence = inf.unsupported > 0.0 ? std::numeric_limits<double>::infinity() : std::max(0.0, inf.supported);
    return inf;
}

double influence_divergence(const BnModel& model, VehicleId vehicle, int goal, int trajectory) {
    return influence_of(model, vehicle, goal, trajectory).divergence;
}

std::vector<Influence> all_influences(const BnModel& model) {
    std::vector<Influence> out;
    for (const auto& prior : model.priors()) {
        for (std::size_t g = 0; g < prior.goal.size(); ++g) {
            if (prior.goal[g] <= 0.0) continue;
            for (std::size_t t = 0; t < prior.trajectory[g].size(); ++t) {
                if (prior.trajectory[g][t] <= 0.0) continue;
                out.push_back(influence_of(model, prior.vehicle, static_cast<int>(g), static_cast<int>(t)));
            }
        }
    }
    return out;
}

namespace {

bool less_divergent(const Influence& a, const Influence& b) {
    if (std::isfinite(a.divergence) != std::isfinite(b.divergence)) return std::isfinite(a.divergence);
    if (std::isfinite(a.divergence)) return a.divergence < b.divergence;
    if (a.unsupported != b.unsupported) return a.unsupported < b.unsupported;
    return a.supported < b.supported;
}

bool same_divergence(const Influence& a, const Influence& b) {
    if (std::isfinite(a.divergence) != std::isfinite(b.divergence)) return false;
    if (std::isfinite(a.divergence)) return std::abs(a.divergence - b.divergence) <= 1e-12;
    return std::abs(a.unsupported - b.unsupported) <= 1e-12 && std::abs(a.supported - b.supported) <= 1e-12;
}

}  // namespace

std::vector<Cause> agent_influences(const BnModel& model, int n_causes) {
    const auto all = all_influences(model);
    std::vector<std::pair<Influence, Cause>> ranked;
    for (const auto& prior : model.priors()) {
        std::vector<Influence> mine;
        for (const auto& inf : all)
            if (inf.vehicle == prior.vehicle) mine.push_back(inf);
        if (mine.empty()) continue;
        const bool constant =
            std::all_of(mine.begin(), mine.end(), [&](const Influence& x) { return same_divergence(x, mine.front()); });
        if (constant) continue;  // does not affect the ego's actions
        const Influence& best = *std::min_element(mine.begin(), mine.end(), less_divergent);
        Cause c;
        c.vehicle = best.vehicle;
        c.goal = best.goal;
        c.trajectory = best.trajectory;
        c.divergence = best.divergence;
        const auto g = static_cast<std::size_t>(best.goal);
        const auto t = static_cast<std::size_t>(best.trajectory);
        c.probability = prior.goal[g] * prior.trajectory[g][t];
        if (g < prior.plans.size() && t < prior.plans[g].size()) c.macros = prior.plans[g][t];
        ranked.emplace_back(best, std::move(c));
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return less_divergent(a.first, b.first); });
    std::vector<Cause> out;
    for (auto& r : ranked) out.push_back(std::move(r.second));
    if (n_causes >= 0 && static_cast<int>(out.size()) > n_causes) out.resize(static_cast<std::size_t>(n_causes));
    return out;
}

std::optional<VehicleId> collision_partner(const BnModel& model, const CounterfactualQuery& query) {
    std::map<VehicleId, int> counts;
    for (const auto& t : model.traces()) {
        if (t.outcome != Outcome::Collision || !t.collided_with) continue;
        bool ok = true;
        for (const auto& [d, a] : query.actions) {
            const auto i = static_cast<std::size_t>(d - 1);
            ok = ok && i < t.macros.size() && t.macros[i] == a;
        }
        if (ok) counts[*t.collided_with] += 1;
    }
    std::optional<VehicleId> best;
    int n = 0;
    for (const auto& [v, c] : counts)
        if (c > n) {
            n = c;
            best = v;
        }
    return best;
}

CausalSummary assemble_summary(const OutcomeResult& outcome, std::vector<Effect> effects, std::vector<Cause> causes,
                               const CounterfactualQuery& query, const SummaryOptions& options,
                               std::optional<VehicleId> collided_with) {
    CausalSummary s;
    s.s.omega = counterfactual_sequence(query);
    s.s.outcome = outcome.most_likely;
    if (!(options.suppress_certain && outcome.probability == 1.0)) s.s.p = outcome.probability;
    if (outcome.most_likely == Outcome::Collision) s.s.collided_with = collided_with;
    if (query.n_effects >= 0 && static_cast<int>(effects.size()) > query.n_effects)
        effects.resize(static_cast<std::size_t>(query.n_effects));
    if (query.n_causes >= 0 && static_cast<int>(causes.size()) > query.n_causes)
        causes.resize(static_cast<std::size_t>(query.n_causes));
    s.e = std::move(effects);
    s.c = std::move(causes);
    return s;
}

CausalSummary explain_query(const BnModel& model, const MacroSequence& factual, const CounterfactualQuery& query,
                            const SummaryOptions& options) {
    if (query.actions.empty()) throw QueryError("empty counterfactual query");
    for (const auto& [d, a] : query.actions)
        if (d < 1 || d > model.max_depth())
            throw QueryError("depth " + std::to_string(d) + " outside 1.." + std::to_string(model.max_depth()));
    OutcomeResult o = outcome_given_cf(model, query);
    auto effects = reward_deltas(model, factual, query);
    auto causes = agent_influences(model, query.n_causes);
    return assemble_summary(o, std::move(effects), std::move(causes), query, options, collision_partner(model, query));
}

nlohmann::json to_json(const CausalSummary& summary) {
    using nlohmann::json;
    json omega = json::array();
    for (const auto& m : summary.s.omega) omega.push_back(m.name());
    json s = {{"omega", omega}, {"o", std::string(to_string(summary.s.outcome))}};
    s["p"] = summary.s.p ? json(*summary.s.p) : json(nullptr);
    if (summary.s.collided_with) s["collided_with"] = *summary.s.collided_with;
    json e = json::array();
    for (const auto& x : summary.e) {
        json item = {{"delta", x.delta}, {"r", std::string(to_string(x.component))}};
        if (x.quantity_delta) item["quantity_delta"] = *x.quantity_delta;
        e.push_back(item);
    }
    json c = json::array();
    for (const auto& x : summary.c) {
        json macros = json::array();
        for (const auto& m : x.macros) macros.push_back(m.name());
        json div = std::isfinite(x.divergence) ? json(x.divergence) : json("inf");
        c.push_back({{"i", x.vehicle},
                     {"goal", x.goal},
                     {"trajectory", x.trajectory},
                     {"omega", macros},
                     {"p", x.probability},
                     {"divergence", div}});
    }
    return {{"s", s}, {"e", e}, {"c", c}};
}

}  // namespace xplan
