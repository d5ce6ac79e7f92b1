#include "xplan/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "xplan/errors.hpp"

namespace xplan {

namespace {

std::string with_id(std::string text, VehicleId id) {
    const std::string key = "{id}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos))
        text.replace(pos, key.size(), std::to_string(id));
    return text;
}

std::string lookup(const std::map<std::string, std::string>& table, const std::string& key, const char* what) {
    auto it = table.find(key);
    if (it == table.end()) throw ValidationError(std::string("no phrase for ") + what + " '" + key + "'");
    return it->second;
}

// Joins non-empty terminals with single spaces.
std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

std::string rel(double delta) {
    if (delta < 0.0) return "lower";
    if (delta > 0.0) return "higher";
    return "equal";
}

std::string action(const std::string& subject, std::optional<double> p, const MacroSequence& omega, Tense tense,
                   const PhraseTable& t) {
    return join({subject, adverb(p), realize_macros(omega, tense, t)});
}

std::string outcome_phrase(const SummaryScenario& s, const PhraseTable& t) {
    std::string phrase = lookup(t.outcomes, std::string(to_string(s.outcome)), "outcome");
    if (s.collided_with) return with_id(phrase, *s.collided_with);
    // no partner known: drop the id placeholder and what precedes it
    auto pos = phrase.find(" vehicle {id}");
    if (pos != std::string::npos) phrase.erase(pos);
    const std::string dangling = " with";
    if (phrase.size() > dangling.size() && phrase.ends_with(dangling)) phrase.erase(phrase.size() - dangling.size());
    return with_id(phrase, 0);
}

std::string comps(const std::vector<Effect>& e, const PhraseTable& t) {
    std::vector<std::string> parts;
    for (const auto& x : e) {
        double d = x.quantity_delta ? *x.quantity_delta : x.delta;
        parts.push_back(join({"with", rel(d), lookup(t.components, std::string(to_string(x.component)), "component")}));
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " and " : "") + parts[i];
    return out;
}

std::string causes(const std::vector<Cause>& c, const PhraseTable& t) {
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        std::string subject = with_id(t.other_subject, c[i].vehicle);
        std::string phrase = c[i].macros.empty() ? join({subject, adverb(c[i].probability)})
                                                 : action(subject, c[i].probability, c[i].macros, t.other_tense, t);
        out += (i ? " and " : "") + phrase;
    }
    return out;
}

void put_macros(PhraseTable& t) {
    t.participle = {
        {"Continue", "continued ahead"},
        {"Change-left", "changed left"},
        {"Change-right", "changed right"},
        {"Exit-left", "turned left"},
        {"Exit-right", "turned right"},
        {"Exit-straight", "gone straight"},
        {"Continue-next-exit-left", "continued to the next exit and turned left"},
        {"Continue-next-exit-right", "continued to the next exit and turned right"},
        {"Continue-next-exit-straight", "continued straight through the next junction"},
        {"Stop", "stopped"},
    };
    t.present = {
        {"Continue", "continues ahead"},
        {"Change-left", "changes left"},
        {"Change-right", "changes right"},
        {"Exit-left", "exits left"},
        {"Exit-right", "exits right"},
        {"Exit-straight", "goes straight"},
        {"Continue-next-exit-left", "continues to the next exit and turns left"},
        {"Continue-next-exit-right", "continues to the next exit and turns right"},
        {"Continue-next-exit-straight", "continues straight through the next junction"},
        {"Stop", "stops"},
    };
}

}  // namespace

void PhraseTable::check_total() const {
    for (const auto& m : all_macros()) {
        lookup(participle, m.name(), "macro");
        lookup(present, m.name(), "macro");
    }
    for (Outcome o : kOutcomes) lookup(outcomes, std::string(to_string(o)), "outcome");
    for (Component c : kComponents) lookup(components, std::string(to_string(c)), "component");
}

PhraseTable default_phrases() {
    PhraseTable t;
    put_macros(t);
    t.outcomes = {
        {"done", "reached its goal"},
        {"collision", "collided with vehicle {id}"},
        {"termination", "not reached the goal"},
        {"dead", "not reached the goal"},
    };
    t.components = {
        {"time", "time to goal"},
        {"jerk", "jerk"},
        {"angular-acceleration", "angular acceleration"},
        {"curvature", "curvature"},
        {"collision", "collision"},
        {"termination", "termination"},
    };
    t.substitutions = {
        {"with higher time to goal", "slower"},
        {"with lower time to goal", "faster"},
        {"with higher", "with more"},
        {"with lower", "with less"},
    };
    return t;
}

PhraseTable table_phrases() {
    PhraseTable t = default_phrases();
    t.other_subject = "vehicle {id}";
    t.other_tense = Tense::NonEgoPresent;
    t.participle["Continue"] = "gone straight";
    t.present["Exit-left"] = "turns left";
    t.outcomes["done"] = "reached the goal";
    return t;
}

std::string adverb(std::optional<double> p) {
    if (!p) return "";
    const double v = *p;
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("probability outside [0, 1]");
    if (v == 0.0) return "never";
    if (v <= 0.33) return "unlikely";
    if (v <= 0.67) return "probably";
    if (v < 1.0) return "likely";
    return "certainly";
}

std::string realize_macros(const MacroSequence& omega, Tense tense, const PhraseTable& table) {
    const auto& forms = tense == Tense::EgoConditional ? table.participle : table.present;
    std::string out;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (i) out += " then ";
        out += lookup(forms, omega[i].name(), "macro");
    }
    return out;
}

std::string generate_raw(const CausalSummary& input, const PhraseTable& table) {
    std::string action_part = action(table.ego_subject, std::nullopt, input.s.omega, Tense::EgoConditional, table);
    std::string effects = join({"it would have", adverb(input.s.p), outcome_phrase(input.s, table), comps(input.e, table)});
    std::string because = causes(input.c, table);
    std::string sentence = join({"if", action_part, "then", effects, because.empty() ? "" : "because", because});
    sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
    return sentence + ".";
}

std::string post_process(const std::string& raw, const PhraseTable& table) {
    auto subs = table.substitutions;
    std::stable_sort(subs.begin(), subs.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    std::string out;
    std::size_t i = 0;
    while (i < raw.size()) {
        bool hit = false;
        for (const auto& [from, to] : subs) {
            if (!from.empty() && raw.compare(i, from.size(), from) == 0) {
                out += to;
                i += from.size();
                hit = true;
                break;
            }
        }
        if (!hit) out += raw[i++];
    }
    return out;
}

}  // namespace xplan
