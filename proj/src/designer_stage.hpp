#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "knowledge_base.hpp"
#include "llm_gateway.hpp"
#include "population.hpp"

namespace kevo {

inline constexpr std::size_t kAvenueCount = 10;
inline constexpr std::size_t kPlanCount = 5;
inline constexpr std::size_t kChosenPlanCount = 3;

struct DesignOutput {
    std::vector<std::string> avenues;    // exactly 10
    std::vector<ExperimentPlan> plans;   // exactly 5, ordinals 1..5
};

// Prompt carrying the Base listing, every knowledge document, and the
// two-task instruction (10 avenues, then 5 structured plans).
std::string build_designer_prompt(const KernelRecord& base,
                                  const std::vector<KnowledgeDoc>& knowledge);

// Extracts the avenue bullets and the `experiment:` plan list from the
// response, tolerating surrounding prose and code fences. Wrong counts,
// missing fields, inverted performance ranges and out-of-range innovation
// scores are parse errors (and so trigger repair re-prompts).
Parsed<DesignOutput> parse_design(const std::string& text);

// Canonical two-task document (Task 1 bullets + fenced yaml plan list).
std::string render_design(const DesignOutput& design);

// Deterministic 3-of-5 pick, without replacement, in order:
//   1. highest innovation
//   2. highest performance.hi among the rest
//   3. highest performance.lo among the rest
// Ties break toward the smallest ordinal.
std::vector<ExperimentPlan> pick_experiments(const std::vector<ExperimentPlan>& plans);

struct DesignResult {
    DesignOutput all;
    std::vector<ExperimentPlan> chosen;
};

// Full stage; persists the complete design document (avenues and unchosen
// plans included) to `artifact_path` for audit before picking.
DesignResult design_experiments(const KernelRecord& base,
                                const std::vector<KnowledgeDoc>& knowledge, Gateway& gateway,
                                const std::filesystem::path& artifact_path,
                                const CallSink* sink = nullptr);

} // namespace kevo
