#pragma once

#include <string>

#include "errors.hpp"
#include "llm_gateway.hpp"
#include "population.hpp"

namespace kevo {

struct SelectionDecision {
    std::string basis_code;      // Base: source to be modified next
    std::string basis_reference; // Reference: shown for contrast/analysis
    std::string rationale;
};

// Prompt carrying the full population table; empty summaries are rejected.
std::string build_selector_prompt(const PopulationSummary& summary);

// Extracts basis_code / basis_reference / rationale from a key-value document
// embedded anywhere in the response, tolerating surrounding prose, code
// fences, quoted values and folded (">") multi-line scalars.
Parsed<SelectionDecision> parse_selection(const std::string& text);

// Canonical decision document, the same shape the selector model is asked
// to emit; used for the per-generation selection artifact.
std::string render_selection(const SelectionDecision& decision);

// Full stage: prompt -> structured completion -> id validation against the
// population. Invalid ids (unknown, failed, base==reference with >= 2
// eligible) count as parse failures and trigger a repair re-prompt.
SelectionDecision select_parents(const PopulationStore& population, Gateway& gateway,
                                 const CallSink* sink = nullptr);

} // namespace kevo
