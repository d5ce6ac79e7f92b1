#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xplan/causal.hpp"

namespace xplan {

enum class Tense { EgoConditional, NonEgoPresent };

// Textual forms used by the grammar. `{id}` in subjects and outcome phrases
// is replaced by a vehicle id.
struct PhraseTable {
    std::string ego_subject = "ego had";
    std::string other_subject = "vehicle {id} would have";
    // Verb form used for non-ego causes; the ego always uses `participle`.
    Tense other_tense = Tense::EgoConditional;
    std::map<std::string, std::string> participle;  // macro name -> phrase
    std::map<std::string, std::string> present;
    std::map<std::string, std::string> outcomes;    // outcome name -> phrase
    std::map<std::string, std::string> components;  // component name -> phrase
    std::vector<std::pair<std::string, std::string>> substitutions;

    // Throws ValidationError if a macro, outcome or component has no phrase.
    void check_total() const;
};

PhraseTable default_phrases();
// Present-tense causes and "gone straight", as in the batch tables.
PhraseTable table_phrases();

// never / unlikely / probably / likely / certainly; empty for nullopt.
// Throws ValidationError for p outside [0, 1].
std::string adverb(std::optional<double> p);

std::string realize_macros(const MacroSequence& omega, Tense tense, const PhraseTable& table);

std::string generate_raw(const CausalSummary& input, const PhraseTable& table);

std::string post_process(const std::string& raw, const PhraseTable& table);

inline std::string explain_text(const CausalSummary& input, const PhraseTable& table) {
    return post_process(generate_raw(input, table), table);
}

}  // namespace xplan
