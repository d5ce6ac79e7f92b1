#pragma once

// Property checks on models built from random trace logs. Each returns an
// empty string on success or a description of the first violation.

#include <cmath>
#include <sstream>
#include <string>

#include "bn_oracle.hpp"
#include "xplan/causal.hpp"

namespace properties {

using namespace xplan;

constexpr double kTol = 1e-9;

inline std::string fail(const std::string& what, double got, double want) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << ", want " << want;
    return os.str();
}

// Sample mean and unbiased variance of a component at a reached state, in
// reward space.
inline std::pair<double, double> component_moments(const oracle::RandomLog& log, const MacroSequence& omega,
                                                   Component c) {
    const RewardConfig reward;
    std::vector<double> xs;
    for (const auto& t : log.traces)
        if (t.macros == omega && t.components[c]) xs.push_back(reward.weight(c) * *t.components[c]);
    double mean = 0.0;
    for (double x : xs) mean += x / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
    return {mean, var};
}

// CPD normalization, chain-rule factorization, deterministic R^b and O,
// and the law of total probability.
inline std::string structural(const oracle::RandomLog& log) {
    const BnModel model = oracle::model_of(log);
    const oracle::Oracle o(log);

    for (const auto& p : model.priors()) {
        double zg = 0.0;
        for (std::size_t g = 0; g < p.goal.size(); ++g) {
            zg += p.goal[g];
            double zt = 0.0;
            for (double x : p.trajectory[g]) zt += x;
            if (std::abs(zt - 1.0) > kTol) return fail("trajectory prior sum", zt, 1.0);
        }
        if (std::abs(zg - 1.0) > kTol) return fail("goal prior sum", zg, 1.0);
    }
    for (const auto& [key, ac] : model.action_cpds()) {
        double z = model.action_probability(key.first, key.second, std::nullopt);
        for (const auto& [a, c] : ac.selections) z += model.action_probability(key.first, key.second, a);
        if (std::abs(z - 1.0) > kTol) return fail("action CPD sum", z, 1.0);
    }
    for (const auto& [omega, rs] : model.reward_cpds()) {
        double z = 0.0;
        for (Outcome x : kOutcomes) z += rs.outcome_probability(x);
        if (std::abs(z - 1.0) > kTol) return fail("outcome CPD sum", z, 1.0);
    }
    double total = 0.0;
    for (const auto& w : model.worlds()) total += w.p;
    if (std::abs(total - 1.0) > kTol) return fail("joint mass", total, 1.0);

    // chain rule: every complete assignment factorizes into prior, action
    // and reward factors recomputed from the traces
    for (const auto& w : model.worlds()) {
        FullAssignment a;
        for (const auto& s : w.agents) {
            a.goals[s.vehicle] = s.goal;
            a.trajectories[s.vehicle] = s.trajectory;
        }
        double want = o.prior(w.agents);
        for (int d = 0; d < model.max_depth(); ++d) {
            std::optional<MacroAction> act;
            if (d < static_cast<int>(w.omega.size())) act = w.omega[static_cast<std::size_t>(d)];
            want *= o.action_factor(a.actions, w.agents, act);
            a.actions.push_back(act);
        }
        want *= o.outcome_factor(w.omega, w.outcome);
        if (std::abs(want - w.p) > kTol) return fail("world mass vs factor product", w.p, want);
        a.outcome = w.outcome;
        double density = 1.0;
        for (Component c : outcome_components(w.outcome)) {
            const auto [mean, var] = component_moments(log, w.omega, c);
            const double x = mean + (var > 0.0 ? 0.5 * std::sqrt(var) : 0.0);
            a.rewards[static_cast<std::size_t>(c)] = x;
            a.exists[static_cast<std::size_t>(c)] = true;
            if (var > 0.0) density *= std::exp(-0.125) / std::sqrt(2.0 * M_PI * var);
        }
        const double got = joint_probability(model, a);
        if (std::abs(got - want * density) > kTol * std::max(1.0, want * density))
            return fail("joint probability with rewards", got, want * density);

        // R^b must agree with the reward values, and O with R^b
        FullAssignment broken = a;
        broken.exists[static_cast<std::size_t>(Component::Collision)] =
            !broken.exists[static_cast<std::size_t>(Component::Collision)];
        if (joint_probability(model, broken) != 0.0) return "reward-exists not determined by rewards";
        broken = a;
        broken.outcome = w.outcome == Outcome::Dead ? Outcome::Done : Outcome::Dead;
        if (joint_probability(model, broken) != 0.0) return "outcome not determined by reward-exists";
    }

    // p(R^b_c | O) is a point mass at the membership of c in O's pattern
    for (Outcome x : kOutcomes) {
        if (evidence_probability(model, {{outcome_var(), x}}) <= 0.0) continue;
        for (Component c : kComponents) {
            const auto d = query(model, {exists_var(c)}, {{outcome_var(), x}});
            const bool member = oracle::has_component(x, c);
            auto it = d.find({Value{member}});
            const double p = it == d.end() ? 0.0 : it->second;
            if (std::abs(p - 1.0) > kTol) return fail("deterministic reward-exists", p, 1.0);
        }
    }

    // sum_y p(X = x | Y = y) p(Y = y) = p(X = x)
    const auto doms = oracle::domains(log, o);
    for (const auto& [xv, xdom] : doms) {
        const auto px = query(model, {xv}, {});
        for (const auto& [yv, ydom] : doms) {
            if (xv == yv) continue;
            Distribution mixed;
            for (const auto& y : ydom) {
                const double py = evidence_probability(model, {{yv, y}});
                if (py <= 0.0) continue;
                for (const auto& [k, p] : query(model, {xv}, {{yv, y}})) mixed[k] += p * py;
            }
            const double diff = oracle::max_difference(px, mixed);
            if (diff > kTol) return fail("total probability " + to_string(xv) + " over " + to_string(yv), diff, 0.0);
        }
    }
    return "";
}

// Raw KL terms are non-negative for every positive-prior (g, s).
inline std::string kl_nonnegative(const oracle::RandomLog& log) {
    const BnModel model = oracle::model_of(log);
    for (const auto& inf : all_influences(model)) {
        if (inf.divergence < 0.0) return fail("divergence", inf.divergence, 0.0);
        if (inf.unsupported == 0.0 && inf.supported < -kTol) return fail("supported KL sum", inf.supported, 0.0);
    }
    return "";
}

// Delta properties over every pair of complete sequences in the log.
inline std::string delta_properties(const oracle::RandomLog& log) {
    const BnModel model = oracle::model_of(log);
    std::vector<MacroSequence> seqs;
    for (const auto& t : log.traces)
        if (std::find(seqs.begin(), seqs.end(), t.macros) == seqs.end()) seqs.push_back(t.macros);
    auto evidence = [&](const MacroSequence& s) {
        Assignment a = evidence_of(s);
        if (static_cast<int>(s.size()) < model.max_depth())
            a[action_var(static_cast<int>(s.size()) + 1)] = std::optional<MacroAction>{};
        return a;
    };
    for (const auto& f : seqs) {
        const Assignment ef = evidence(f);
        for (const auto& e : reward_deltas(model, ef, ef, 6))
            if (e.delta != 0.0) return fail("self delta", e.delta, 0.0);
        for (const auto& cf : seqs) {
            const Assignment ecf = evidence(cf);
            const auto fwd = reward_deltas(model, ef, ecf, 6);
            const auto back = reward_deltas(model, ecf, ef, 6);
            if (fwd.size() != back.size()) return "antisymmetry: different component sets";
            for (const auto& a : fwd) {
                auto it = std::find_if(back.begin(), back.end(),
                                       [&](const Effect& b) { return b.component == a.component; });
                if (it == back.end()) return "antisymmetry: component missing";
                if (a.delta != -it->delta) return fail("antisymmetry", a.delta, -it->delta);
            }
            for (std::size_t i = 1; i < fwd.size(); ++i)
                if (std::abs(fwd[i].delta) > std::abs(fwd[i - 1].delta)) return "deltas not in |delta| order";
            for (int n = 0; n <= 6; ++n) {
                const auto part = reward_deltas(model, ef, ecf, n);
                if (part.size() != std::min<std::size_t>(static_cast<std::size_t>(n), fwd.size()))
                    return "truncation length";
                for (std::size_t i = 0; i < part.size(); ++i)
                    if (part[i].component != fwd[i].component || part[i].delta != fwd[i].delta)
                        return "truncation is not a prefix";
            }
        }
    }
    return "";
}

}  // namespace properties
