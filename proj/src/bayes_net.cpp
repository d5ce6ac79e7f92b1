#include "xplan/bayes_net.hpp"

#include <algorithm>
#include <cmath>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::vector<Component> present(const RewardComponents& r) {
    std::vector<Component> out;
    for (Component c : kComponents)
        if (r[c]) out.push_back(c);
    return out;
}

bool pattern_has(Outcome o, Component c) {
    auto cs = outcome_components(o);
    return std::find(cs.begin(), cs.end(), c) != cs.end();
}

std::optional<MacroAction> action_at(const MacroSequence& omega, int depth) {
    if (depth >= 1 && depth <= static_cast<int>(omega.size())) return omega[static_cast<std::size_t>(depth - 1)];
    return std::nullopt;
}

void check_variable(const BnModel& model, const Variable& v, const Value& value) {
    switch (v.kind) {
        case VarKind::Goal:
        case VarKind::Trajectory: {
            bool known = std::any_of(model.priors().begin(), model.priors().end(),
                                     [&](const AgentPrior& p) { return p.vehicle == v.index; });
            if (!known) throw QueryError("unknown vehicle " + std::to_string(v.index) + " in " + to_string(v));
            if (!std::holds_alternative<int>(value)) throw QueryError(to_string(v) + " takes an index value");
            return;
        }
        case VarKind::Action:
            if (v.index < 1 || v.index > model.max_depth())
                throw QueryError("depth " + std::to_string(v.index) + " outside 1.." +
                                 std::to_string(model.max_depth()));
            if (!std::holds_alternative<std::optional<MacroAction>>(value))
                throw QueryError(to_string(v) + " takes a macro action value");
            return;
        case VarKind::RewardExists:
            if (v.index < 0 || v.index >= static_cast<int>(kComponentCount)) throw QueryError("unknown component");
            if (!std::holds_alternative<bool>(value)) throw QueryError(to_string(v) + " takes a boolean value");
            return;
        case VarKind::Outcome:
            if (!std::holds_alternative<Outcome>(value)) throw QueryError("O takes an outcome value");
            return;
    }
}

void check_target(const BnModel& model, const Variable& v) {
    switch (v.kind) {
        case VarKind::Goal: check_variable(model, v, Value{0}); break;
        case VarKind::Trajectory: check_variable(model, v, Value{0}); break;
        case VarKind::Action: check_variable(model, v, Value{std::optional<MacroAction>{}}); break;
        case VarKind::RewardExists: check_variable(model, v, Value{false}); break;
        case VarKind::Outcome: check_variable(model, v, Value{Outcome::Done}); break;
    }
}

bool matches(const BnModel& model, const World& w, const Assignment& evidence) {
    for (const auto& [var, val] : evidence)
        if (!(model.value_in(w, var) == val)) return false;
    return true;
}

nlohmann::json value_json(const Value& v) { return to_string(v); }

nlohmann::json sequence_json(const MacroSequence& seq) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : seq) out.push_back(m.name());
    return out;
}

nlohmann::json agents_json(const JointSample& agents) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : agents) out.push_back({{"vehicle", a.vehicle}, {"goal", a.goal}, {"trajectory", a.trajectory}});
    return out;
}

}  // namespace

std::vector<AgentPrior> priors_from(const std::vector<VehiclePrediction>& predictions) {
    std::vector<AgentPrior> out;
    for (const auto& vp : predictions) {
        AgentPrior p;
        p.vehicle = vp.vehicle;
        for (const auto& g : vp.goals) {
            p.goal.push_back(g.trajectories.empty() ? 0.0 : g.probability);
            std::vector<double> ts;
            std::vector<MacroSequence> plans;
            for (const auto& c : g.trajectories) {
                ts.push_back(c.probability);
                plans.push_back(c.macros);
            }
            p.trajectory.push_back(std::move(ts));
            p.goal_labels.push_back(g.goal.label);
            p.plans.push_back(std::move(plans));
        }
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const AgentPrior& a, const AgentPrior& b) { return a.vehicle < b.vehicle; });
    return out;
}

std::string to_string(const Variable& v) {
    switch (v.kind) {
        case VarKind::Goal: return "G" + std::to_string(v.index);
        case VarKind::Trajectory: return "S" + std::to_string(v.index);
        case VarKind::Action: return "omega" + std::to_string(v.index);
        case VarKind::RewardExists: return "Rb_" + std::string(to_string(static_cast<Component>(v.index)));
        case VarKind::Outcome: return "O";
    }
    return "?";
}

std::string to_string(const Value& v) {
    if (const int* i = std::get_if<int>(&v)) return std::to_string(*i);
    if (const auto* a = std::get_if<std::optional<MacroAction>>(&v)) return *a ? (*a)->name() : "none";
    if (const Outcome* o = std::get_if<Outcome>(&v)) return std::string(to_string(*o));
    return std::get<bool>(v) ? "1" : "0";
}

int ActionCounts::arrivals() const {
    int n = terminal;
    for (const auto& [a, c] : selections) n += c;
    return n;
}

double RewardStats::outcome_probability(Outcome o) const {
    auto it = outcomes.find(o);
    if (count == 0) return o == Outcome::Dead ? 1.0 : 0.0;
    return it == outcomes.end() ? 0.0 : static_cast<double>(it->second) / count;
}

BnModel::BnModel(TraceLog traces, std::vector<AgentPrior> priors, int max_depth, RewardConfig reward)
    : traces_(std::move(traces)), priors_(std::move(priors)), max_depth_(max_depth), reward_(reward) {
    if (traces_.empty()) throw InferenceError("empty trace log");
    if (max_depth_ < 1) throw InferenceError("max depth must be at least 1");
    std::sort(priors_.begin(), priors_.end(),
              [](const AgentPrior& a, const AgentPrior& b) { return a.vehicle < b.vehicle; });

    // per-component Welford accumulators
    std::map<MacroSequence, std::array<double, kComponentCount>> m2;
    for (std::size_t i = 0; i < traces_.size(); ++i) {
        const TraceRecord& t = traces_[i];
        if (static_cast<int>(t.macros.size()) > max_depth_) throw InferenceError("trace deeper than max depth");
        const int idx = static_cast<int>(i);
        MacroSequence prefix;
        for (const auto& m : t.macros) {
            ActionCounts& ac = actions_[{prefix, t.agents}];
            ac.selections[m] += 1;
            ac.traces.push_back(idx);
            prefix.push_back(m);
        }
        if (static_cast<int>(prefix.size()) < max_depth_) {
            ActionCounts& ac = actions_[{prefix, t.agents}];
            ac.terminal += 1;
            ac.traces.push_back(idx);
        }

        RewardStats& rs = rewards_[t.macros];
        auto& acc = m2[t.macros];
        if (rs.count == 0) acc.fill(0.0);
        rs.count += 1;
        rs.outcomes[outcome_of(t.components)] += 1;
        rs.traces.push_back(idx);
        for (Component c : present(t.components)) {
            auto& cs = rs.components[static_cast<std::size_t>(c)];
            const double q = *t.components[c];
            const double x = reward_.weight(c) * q;
            cs.count += 1;
            const double delta = x - cs.mean;
            cs.mean += delta / cs.count;
            acc[static_cast<std::size_t>(c)] += delta * (x - cs.mean);
            cs.quantity_mean += (q - cs.quantity_mean) / cs.count;
        }
    }
    for (auto& [key, rs] : rewards_) {
        const auto& acc = m2[key];
        for (std::size_t c = 0; c < kComponentCount; ++c) {
            auto& cs = rs.components[c];
            cs.variance = cs.count > 1 ? std::max(0.0, acc[c] / (cs.count - 1)) : 0.0;
        }
    }
    enumerate();
}

double BnModel::agents_probability(const JointSample& agents) const {
    double p = 1.0;
    for (const auto& prior : priors_) {
        auto it = std::find_if(agents.begin(), agents.end(), [&](const AgentSample& a) { return a.vehicle == prior.vehicle; });
        if (it == agents.end()) return 0.0;
        if (it->goal < 0 || it->goal >= static_cast<int>(prior.goal.size())) return 0.0;
        const auto& ts = prior.trajectory[static_cast<std::size_t>(it->goal)];
        if (it->trajectory < 0 || it->trajectory >= static_cast<int>(ts.size())) return 0.0;
        p *= prior.goal[static_cast<std::size_t>(it->goal)] * ts[static_cast<std::size_t>(it->trajectory)];
    }
    return p;
}

double BnModel::action_probability(const MacroSequence& prefix, const JointSample& agents,
                                   const std::optional<MacroAction>& action) const {
    auto it = actions_.find({prefix, agents});
    if (it == actions_.end()) return action ? 0.0 : 1.0;
    const ActionCounts& ac = it->second;
    const int n = ac.arrivals();
    if (n == 0) return action ? 0.0 : 1.0;
    if (!action) return static_cast<double>(ac.terminal) / n;
    auto s = ac.selections.find(*action);
    return s == ac.selections.end() ? 0.0 : static_cast<double>(s->second) / n;
}

double BnModel::sequence_probability(const MacroSequence& omega, const JointSample& agents) const {
    if (static_cast<int>(omega.size()) > max_depth_) return 0.0;
    double p = 1.0;
    MacroSequence prefix;
    for (const auto& m : omega) {
        p *= action_probability(prefix, agents, m);
        if (p == 0.0) return 0.0;
        prefix.push_back(m);
    }
    if (static_cast<int>(omega.size()) < max_depth_) p *= action_probability(omega, agents, std::nullopt);
    return p;
}

const RewardStats* BnModel::reward_stats(const MacroSequence& omega) const {
    auto it = rewards_.find(omega);
    return it == rewards_.end() ? nullptr : &it->second;
}

double BnModel::pattern_probability(const MacroSequence& omega, Outcome outcome) const {
    const RewardStats* rs = reward_stats(omega);
    if (!rs) return outcome == Outcome::Dead ? 1.0 : 0.0;
    return rs->outcome_probability(outcome);
}

Value BnModel::value_in(const World& w, const Variable& v) const {
    switch (v.kind) {
        case VarKind::Goal:
        case VarKind::Trajectory:
            for (const auto& a : w.agents)
                if (a.vehicle == v.index) return v.kind == VarKind::Goal ? a.goal : a.trajectory;
            throw QueryError("unknown vehicle " + std::to_string(v.index));
        case VarKind::Action: return action_at(w.omega, v.index);
        case VarKind::RewardExists: return pattern_has(w.outcome, static_cast<Component>(v.index));
        case VarKind::Outcome: return w.outcome;
    }
    throw QueryError("unknown variable");
}

void BnModel::enumerate() {
    // joint samples with positive prior mass
    std::vector<JointSample> samples{{}};
    for (const auto& prior : priors_) {
        std::vector<JointSample> next;
        for (const auto& base : samples) {
            for (std::size_t g = 0; g < prior.goal.size(); ++g) {
                if (prior.goal[g] <= 0.0) continue;
                for (std::size_t t = 0; t < prior.trajectory[g].size(); ++t) {
                    if (prior.trajectory[g][t] <= 0.0) continue;
                    JointSample s = base;
                    s.push_back({prior.vehicle, static_cast<int>(g), static_cast<int>(t)});
                    next.push_back(std::move(s));
                }
            }
        }
        samples = std::move(next);
    }

    for (const auto& s : samples) {
        const double ps = agents_probability(s);
        if (ps <= 0.0) continue;
        // macro sequences reachable under s
        std::vector<std::pair<MacroSequence, double>> stack{{{}, 1.0}};
        while (!stack.empty()) {
            auto [prefix, p] = stack.back();
            stack.pop_back();
            std::vector<std::pair<MacroSequence, double>> children;
            double p_end = 1.0;
            if (static_cast<int>(prefix.size()) < max_depth_) {
                p_end = action_probability(prefix, s, std::nullopt);
                auto it = actions_.find({prefix, s});
                if (it != actions_.end()) {
                    for (const auto& [a, c] : it->second.selections) {
                        MacroSequence child = prefix;
                        child.push_back(a);
                        children.emplace_back(std::move(child), p * action_probability(prefix, s, a));
                    }
                }
            }
            if (p_end > 0.0) {
                for (Outcome o : kOutcomes) {
                    double po = pattern_probability(prefix, o);
                    if (po > 0.0) worlds_.push_back({s, prefix, o, ps * p * p_end * po});
                }
            }
            // depth-first in canonical order
            for (auto it = children.rbegin(); it != children.rend(); ++it)
                if (it->second > 0.0) stack.push_back(*it);
        }
    }
}

std::vector<Variable> BnModel::variables() const {
    std::vector<Variable> out;
    for (const auto& p : priors_) out.push_back(goal_var(p.vehicle));
    for (const auto& p : priors_) out.push_back(trajectory_var(p.vehicle));
    for (int d = 1; d <= max_depth_; ++d) out.push_back(action_var(d));
    for (Component c : kComponents) out.push_back(exists_var(c));
    out.push_back(outcome_var());
    return out;
}

std::vector<Value> BnModel::support(const Variable& v) const {
    std::vector<Value> out;
    switch (v.kind) {
        case VarKind::Goal:
        case VarKind::Trajectory:
            for (const auto& p : priors_) {
                if (p.vehicle != v.index) continue;
                if (v.kind == VarKind::Goal) {
                    for (std::size_t g = 0; g < p.goal.size(); ++g) out.push_back(static_cast<int>(g));
                } else {
                    std::size_t n = 0;
                    for (const auto& ts : p.trajectory) n = std::max(n, ts.size());
                    for (std::size_t t = 0; t < n; ++t) out.push_back(static_cast<int>(t));
                }
            }
            break;
        case VarKind::Action: {
            std::vector<MacroAction> seen;
            for (const auto& [key, ac] : actions_)
                if (static_cast<int>(key.first.size()) == v.index - 1)
                    for (const auto& [a, c] : ac.selections) seen.push_back(a);
            std::sort(seen.begin(), seen.end());
            seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
            for (const auto& a : seen) out.push_back(std::optional<MacroAction>(a));
            out.push_back(std::optional<MacroAction>());
            break;
        }
        case VarKind::RewardExists:
            out.push_back(false);
            out.push_back(true);
            break;
        case VarKind::Outcome:
            for (Outcome o : kOutcomes) out.push_back(o);
            break;
    }
    return out;
}

BnModel build_bn(const TraceLog& traces, const std::vector<AgentPrior>& priors, int max_depth,
                 const RewardConfig& reward) {
    return BnModel(traces, priors, max_depth, reward);
}

double joint_probability(const BnModel& model, const FullAssignment& a) {
    if (static_cast<int>(a.actions.size()) != model.max_depth()) throw InferenceError("incomplete assignment");
    JointSample agents;
    for (const auto& prior : model.priors()) {
        auto g = a.goals.find(prior.vehicle);
        auto t = a.trajectories.find(prior.vehicle);
        if (g == a.goals.end() || t == a.trajectories.end()) throw InferenceError("incomplete assignment");
        agents.push_back({prior.vehicle, g->second, t->second});
    }
    std::sort(agents.begin(), agents.end());
    double p = model.agents_probability(agents);
    if (p == 0.0) return 0.0;

    MacroSequence omega;
    bool ended = false;
    for (const auto& act : a.actions) {
        if (!act) {
            ended = true;
            continue;
        }
        if (ended) return 0.0;  // an action after the empty value
        omega.push_back(*act);
    }
    p *= model.sequence_probability(omega, agents);
    if (p == 0.0) return 0.0;

    // existence pattern of the reward values
    std::optional<Outcome> pattern;
    for (Outcome o : kOutcomes) {
        bool same = true;
        for (Component c : kComponents) same = same && (a.rewards[static_cast<std::size_t>(c)].has_value() == pattern_has(o, c));
        if (same) pattern = o;
    }
    if (!pattern) return 0.0;
    p *= model.pattern_probability(omega, *pattern);
    if (p == 0.0) return 0.0;
    if (const RewardStats* rs = model.reward_stats(omega)) {
        for (Component c : kComponents) {
            const auto& r = a.rewards[static_cast<std::size_t>(c)];
            if (!r) continue;
            const ComponentStats& cs = rs->components[static_cast<std::size_t>(c)];
            if (cs.variance <= 0.0) {
                if (*r != cs.mean) return 0.0;
            } else {
                const double z = (*r - cs.mean) / std::sqrt(cs.variance);
                p *= kInvSqrt2Pi / std::sqrt(cs.variance) * std::exp(-0.5 * z * z);
            }
        }
    }
    // R^b is the indicator of a set component; O follows from R^b
    for (Component c : kComponents)
        if (a.exists[static_cast<std::size_t>(c)] != a.rewards[static_cast<std::size_t>(c)].has_value()) return 0.0;
    RewardComponents presence;
    for (Component c : kComponents)
        if (a.exists[static_cast<std::size_t>(c)]) presence[c] = 1.0;
    if (outcome_of(presence) != a.outcome) return 0.0;
    return p;
}

double evidence_probability(const BnModel& model, const Assignment& evidence) {
    for (const auto& [v, val] : evidence) check_variable(model, v, val);
    double total = 0.0;
    for (const auto& w : model.worlds())
        if (matches(model, w, evidence)) total += w.p;
    return total;
}

Distribution query(const BnModel& model, const std::vector<Variable>& targets, const Assignment& evidence) {
    for (const auto& [v, val] : evidence) check_variable(model, v, val);
    for (const auto& v : targets) check_target(model, v);
    Distribution out;
    double z = 0.0;
    for (const auto& w : model.worlds()) {
        if (!matches(model, w, evidence)) continue;
        std::vector<Value> key;
        key.reserve(targets.size());
        for (const auto& v : targets) key.push_back(model.value_in(w, v));
        out[key] += w.p;
        z += w.p;
    }
    if (z <= 0.0) throw ZeroProbabilityEvidence("zero-probability evidence");
    for (auto& [k, p] : out) p /= z;
    return out;
}

ExpectedReward expected_reward(const BnModel& model, const Assignment& evidence) {
    for (const auto& [v, val] : evidence) check_variable(model, v, val);
    std::array<double, kComponentCount> num{}, qnum{}, den{};
    double z = 0.0;
    for (const auto& w : model.worlds()) {
        if (!matches(model, w, evidence)) continue;
        z += w.p;
        const RewardStats* rs = model.reward_stats(w.omega);
        if (!rs) continue;
        for (Component c : outcome_components(w.outcome)) {
            const auto i = static_cast<std::size_t>(c);
            num[i] += w.p * rs->components[i].mean;
            qnum[i] += w.p * rs->components[i].quantity_mean;
            den[i] += w.p;
        }
    }
    if (z <= 0.0) throw ZeroProbabilityEvidence("zero-probability evidence");
    ExpectedReward out;
    for (std::size_t i = 0; i < kComponentCount; ++i) {
        if (den[i] <= 0.0) continue;
        out.reward[i] = num[i] / den[i];
        out.quantity[i] = qnum[i] / den[i];
    }
    return out;
}

nlohmann::json to_json(const BnModel& model) {
    using nlohmann::json;
    json out;
    out["max_depth"] = model.max_depth();
    out["trace_count"] = model.traces().size();
    json vars = json::array();
    for (const auto& v : model.variables()) {
        json sup = json::array();
        for (const auto& val : model.support(v)) sup.push_back(value_json(val));
        vars.push_back({{"name", to_string(v)}, {"support", sup}});
    }
    out["variables"] = vars;

    json priors = json::array();
    for (const auto& p : model.priors())
        priors.push_back({{"vehicle", p.vehicle}, {"goal", p.goal}, {"trajectory", p.trajectory}});
    out["agent_priors"] = priors;

    json actions = json::array();
    for (const auto& [key, ac] : model.action_cpds()) {
        json probs = json::object();
        const double n = ac.arrivals();
        for (const auto& [a, c] : ac.selections) probs[a.name()] = c / n;
        if (ac.terminal > 0) probs["none"] = ac.terminal / n;
        json counts = json::object();
        for (const auto& [a, c] : ac.selections) counts[a.name()] = c;
        counts["none"] = ac.terminal;
        actions.push_back({{"depth", key.first.size() + 1},
                           {"prefix", sequence_json(key.first)},
                           {"agents", agents_json(key.second)},
                           {"probabilities", probs},
                           {"counts", counts},
                           {"traces", ac.traces}});
    }
    out["action_cpds"] = actions;

    json rewards = json::array();
    for (const auto& [omega, rs] : model.reward_cpds()) {
        json outcomes = json::object();
        for (const auto& [o, c] : rs.outcomes) outcomes[std::string(to_string(o))] = static_cast<double>(c) / rs.count;
        json comps = json::object();
        for (Component c : kComponents) {
            const auto& cs = rs.components[static_cast<std::size_t>(c)];
            if (cs.count == 0) continue;
            comps[std::string(to_string(c))] = {{"count", cs.count},
                                                {"mean", cs.mean},
                                                {"variance", cs.variance},
                                                {"quantity_mean", cs.quantity_mean},
                                                {"p_empty", 1.0 - static_cast<double>(cs.count) / rs.count}};
        }
        rewards.push_back({{"state", sequence_json(omega)},
                           {"count", rs.count},
                           {"outcomes", outcomes},
                           {"components", comps},
                           {"traces", rs.traces}});
    }
    out["reward_cpds"] = rewards;
    out["support_size"] = model.worlds().size();
    return out;
}

}  // namespace xplan
