#pragma once

// Random trace logs and a brute-force reference for the Bayesian network:
// every variable is enumerated over its full domain and each factor is
// recomputed from the raw traces, independently of BnModel.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "xplan/bayes_net.hpp"
#include "xplan/errors.hpp"

namespace oracle {

using namespace xplan;

struct RandomLog {
    TraceLog traces;
    std::vector<AgentPrior> priors;
    int max_depth = 1;
};

inline std::vector<double> random_simplex(std::mt19937_64& rng, int n, bool allow_zero) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = u(rng);
    if (allow_zero && n > 1 && std::bernoulli_distribution(0.2)(rng))
        w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng)] = 0.0;
    double z = 0.0;
    for (double x : w) z += x;
    for (auto& x : w) x /= z;
    return w;
}

// K <= 20 traces, d_max <= 3, <= 2 non-ego vehicles with <= 2 goals each.
inline RandomLog random_log(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    RandomLog out;
    out.max_depth = uniform_int(1, 3);
    const int agents = uniform_int(0, 2);
    for (int i = 0; i < agents; ++i) {
        AgentPrior p;
        p.vehicle = i + 1;
        const int goals = uniform_int(1, 2);
        p.goal = random_simplex(rng, goals, true);
        for (int g = 0; g < goals; ++g) p.trajectory.push_back(random_simplex(rng, uniform_int(1, 2), false));
        out.priors.push_back(std::move(p));
    }
    // joint samples with positive prior mass
    std::vector<JointSample> samples{{}};
    for (const auto& p : out.priors) {
        std::vector<JointSample> next;
        for (const auto& base : samples)
            for (std::size_t g = 0; g < p.goal.size(); ++g)
                for (std::size_t t = 0; t < p.trajectory[g].size(); ++t) {
                    if (p.goal[g] <= 0.0) continue;
                    JointSample s = base;
                    s.push_back({p.vehicle, static_cast<int>(g), static_cast<int>(t)});
                    next.push_back(s);
                }
        samples = next;
    }
    const std::vector<MacroAction> actions{continue_macro(), change_left(), change_right()};
    const int k = uniform_int(1, 20);
    std::uniform_real_distribution<double> q(0.0, 10.0);
    for (int n = 0; n < k; ++n) {
        TraceRecord t;
        t.agents = samples[static_cast<std::size_t>(uniform_int(0, static_cast<int>(samples.size()) - 1))];
        const int len = uniform_int(1, out.max_depth);
        // small action alphabet so that prefixes are shared
        for (int d = 0; d < len; ++d) t.macros.push_back(actions[static_cast<std::size_t>(uniform_int(0, 2))]);
        const Outcome o = kOutcomes[static_cast<std::size_t>(uniform_int(0, 3))];
        for (Component c : outcome_components(o)) t.components[c] = std::round(q(rng) * 4.0) / 4.0;
        t.outcome = o;
        out.traces.push_back(std::move(t));
    }
    return out;
}

// One point of the full discrete joint domain.
struct Point {
    std::map<VehicleId, int> goal;
    std::map<VehicleId, int> trajectory;
    std::vector<std::optional<MacroAction>> actions;
    Outcome outcome = Outcome::Dead;
    double p = 0.0;
};

inline bool has_component(Outcome o, Component c) {
    switch (o) {
        case Outcome::Done:
            return c == Component::Time || c == Component::Jerk || c == Component::AngularAcceleration ||
                   c == Component::Curvature;
        case Outcome::Collision: return c == Component::Collision;
        case Outcome::Termination: return c == Component::Termination;
        case Outcome::Dead: return false;
    }
    return false;
}

inline Outcome pattern_of(const RewardComponents& r) {
    auto has = [&](Component c) { return r[c].has_value(); };
    if (has(Component::Collision)) return Outcome::Collision;
    if (has(Component::Termination)) return Outcome::Termination;
    if (has(Component::Time) && has(Component::Jerk) && has(Component::AngularAcceleration) &&
        has(Component::Curvature))
        return Outcome::Done;
    return Outcome::Dead;
}

class Oracle {
public:
    explicit Oracle(const RandomLog& log) : log_(log) {
        std::vector<MacroAction> seen;
        for (const auto& t : log.traces) seen.insert(seen.end(), t.macros.begin(), t.macros.end());
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (const auto& a : seen) domain_.push_back(a);
        domain_.push_back(std::nullopt);
        enumerate();
    }

    const std::vector<Point>& points() const { return points_; }

    static Value value(const Point& pt, const Variable& v) {
        switch (v.kind) {
            case VarKind::Goal: return pt.goal.at(v.index);
            case VarKind::Trajectory: return pt.trajectory.at(v.index);
            case VarKind::Action: return pt.actions[static_cast<std::size_t>(v.index - 1)];
            case VarKind::RewardExists: return has_component(pt.outcome, static_cast<Component>(v.index));
            case VarKind::Outcome: return pt.outcome;
        }
        return 0;
    }

    double marginal(const Assignment& evidence) const {
        double total = 0.0;
        for (const auto& pt : points_)
            if (matches(pt, evidence)) total += pt.p;
        return total;
    }

    // Empty map when the evidence has zero mass.
    Distribution conditional(const std::vector<Variable>& targets, const Assignment& evidence) const {
        Distribution out;
        const double z = marginal(evidence);
        if (z <= 0.0) return out;
        for (const auto& pt : points_) {
            if (!matches(pt, evidence) || pt.p == 0.0) continue;
            std::vector<Value> key;
            for (const auto& v : targets) key.push_back(value(pt, v));
            out[key] += pt.p / z;
        }
        return out;
    }

    // Factor p(Omega_d = a | Omega_<d, S) straight from the trace counts.
    double action_factor(const std::vector<std::optional<MacroAction>>& prev, const JointSample& s,
                         const std::optional<MacroAction>& a) const {
        if (std::find(prev.begin(), prev.end(), std::nullopt) != prev.end()) return a ? 0.0 : 1.0;
        MacroSequence prefix;
        for (const auto& x : prev) prefix.push_back(*x);
        int arrivals = 0, hits = 0;
        for (const auto& t : log_.traces) {
            if (t.agents != s || t.macros.size() < prefix.size()) continue;
            if (!std::equal(prefix.begin(), prefix.end(), t.macros.begin())) continue;
            ++arrivals;
            const bool ends = t.macros.size() == prefix.size();
            if (a ? (!ends && t.macros[prefix.size()] == *a) : ends) ++hits;
        }
        if (arrivals == 0) return a ? 0.0 : 1.0;
        return static_cast<double>(hits) / arrivals;
    }

    double outcome_factor(const MacroSequence& omega, Outcome o) const {
        int n = 0, hits = 0;
        for (const auto& t : log_.traces) {
            if (t.macros != omega) continue;
            ++n;
            if (pattern_of(t.components) == o) ++hits;
        }
        if (n == 0) return o == Outcome::Dead ? 1.0 : 0.0;
        return static_cast<double>(hits) / n;
    }

    double prior(const JointSample& s) const {
        double p = 1.0;
        for (std::size_t i = 0; i < log_.priors.size(); ++i) {
            const auto& pr = log_.priors[i];
            const auto& a = s[i];
            const auto& ts = pr.trajectory[static_cast<std::size_t>(a.goal)];
            if (a.trajectory >= static_cast<int>(ts.size())) return 0.0;
            p *= pr.goal[static_cast<std::size_t>(a.goal)] * ts[static_cast<std::size_t>(a.trajectory)];
        }
        return p;
    }

    const std::vector<std::optional<MacroAction>>& action_domain() const { return domain_; }

private:
    static bool matches(const Point& pt, const Assignment& evidence) {
        for (const auto& [v, val] : evidence)
            if (!(value(pt, v) == val)) return false;
        return true;
    }

    void enumerate() {
        std::vector<JointSample> samples{{}};
        for (const auto& pr : log_.priors) {
            std::size_t width = 0;
            for (const auto& ts : pr.trajectory) width = std::max(width, ts.size());
            std::vector<JointSample> next;
            for (const auto& base : samples)
                for (std::size_t g = 0; g < pr.goal.size(); ++g)
                    for (std::size_t t = 0; t < width; ++t) {
                        JointSample s = base;
                        s.push_back({pr.vehicle, static_cast<int>(g), static_cast<int>(t)});
                        next.push_back(s);
                    }
            samples = next;
        }
        const int d_max = log_.max_depth;
        for (const auto& s : samples) {
            const double ps = prior(s);
            std::vector<std::optional<MacroAction>> actions;
            std::function<void(double)> walk = [&](double p) {
                if (static_cast<int>(actions.size()) == d_max) {
                    MacroSequence omega;
                    for (const auto& a : actions)
                        if (a) omega.push_back(*a);
                    for (Outcome o : kOutcomes) {
                        Point pt;
                        for (const auto& a : s) {
                            pt.goal[a.vehicle] = a.goal;
                            pt.trajectory[a.vehicle] = a.trajectory;
                        }
                        pt.actions = actions;
                        pt.outcome = o;
                        pt.p = p * outcome_factor(omega, o);
                        points_.push_back(pt);
                    }
                    return;
                }
                for (const auto& a : domain_) {
                    const double f = action_factor(actions, s, a);
                    actions.push_back(a);
                    walk(p * f);
                    actions.pop_back();
                }
            };
            walk(ps);
        }
    }

    const RandomLog& log_;
    std::vector<std::optional<MacroAction>> domain_;
    std::vector<Point> points_;
};

inline double max_difference(const Distribution& a, const Distribution& b) {
    double worst = 0.0;
    for (const auto& [k, p] : a) {
        auto it = b.find(k);
        worst = std::max(worst, std::abs(p - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [k, p] : b)
        if (!a.count(k)) worst = std::max(worst, std::abs(p));
    return worst;
}

inline BnModel model_of(const RandomLog& log) { return build_bn(log.traces, log.priors, log.max_depth, RewardConfig{}); }

// Every variable's domain as the oracle sees it.
inline std::vector<std::pair<Variable, std::vector<Value>>> domains(const RandomLog& log, const Oracle& o) {
    std::vector<std::pair<Variable, std::vector<Value>>> out;
    for (const auto& p : log.priors) {
        std::vector<Value> gs, ts;
        std::size_t width = 0;
        for (std::size_t g = 0; g < p.goal.size(); ++g) {
            gs.push_back(static_cast<int>(g));
            width = std::max(width, p.trajectory[g].size());
        }
        for (std::size_t t = 0; t < width; ++t) ts.push_back(static_cast<int>(t));
        out.push_back({goal_var(p.vehicle), gs});
        out.push_back({trajectory_var(p.vehicle), ts});
    }
    std::vector<Value> acts;
    for (const auto& a : o.action_domain()) acts.push_back(a);
    for (int d = 1; d <= log.max_depth; ++d) out.push_back({action_var(d), acts});
    for (Component c : kComponents) out.push_back({exists_var(c), {false, true}});
    std::vector<Value> outs;
    for (Outcome x : kOutcomes) outs.push_back(x);
    out.push_back({outcome_var(), outs});
    return out;
}

struct Agreement {
    int queries = 0;
    double worst = 0.0;
    int zero_mismatch = 0;  // evidence judged impossible by only one side
};

// Marginals of every variable, every single-variable conditional and a
// sample of two-variable evidence sets, against the oracle.
inline Agreement compare_with_oracle(const RandomLog& log) {
    const BnModel model = model_of(log);
    const Oracle o(log);
    const auto doms = domains(log, o);
    Agreement out;
    auto check = [&](const std::vector<Variable>& targets, const Assignment& evidence) {
        ++out.queries;
        const double want_mass = o.marginal(evidence);
        const double got_mass = evidence_probability(model, evidence);
        out.worst = std::max(out.worst, std::abs(want_mass - got_mass));
        Distribution got;
        bool impossible = false;
        try {
            got = query(model, targets, evidence);
        } catch (const ZeroProbabilityEvidence&) {
            impossible = true;
        }
        if (impossible != (want_mass <= 0.0)) {
            ++out.zero_mismatch;
            return;
        }
        if (!impossible) out.worst = std::max(out.worst, max_difference(got, o.conditional(targets, evidence)));
    };
    for (const auto& [v, dom] : doms) check({v}, {});
    for (const auto& [t, tdom] : doms)
        for (const auto& [e, edom] : doms) {
            if (t == e) continue;
            for (const auto& val : edom) check({t}, {{e, val}});
        }
    for (std::size_t i = 0; i < doms.size(); ++i)
        for (std::size_t j = i + 1; j < doms.size(); ++j)
            for (std::size_t k = 0; k < doms.size(); ++k) {
                if (k == i || k == j) continue;
                check({doms[k].first}, {{doms[i].first, doms[i].second.front()}, {doms[j].first, doms[j].second.back()}});
            }
    return out;
}

}  // namespace oracle
