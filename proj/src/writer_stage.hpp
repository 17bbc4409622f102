#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "knowledge_base.hpp"
#include "llm_gateway.hpp"
#include "population.hpp"
#include "selector_stage.hpp"

namespace kevo {

// Everything one kernel-writer invocation sees. Three of these run
// concurrently per generation, sharing no mutable state.
struct WriterContext {
    std::string task_description;
    std::vector<KnowledgeDoc> findings;
    std::string base_id;
    std::string reference_id;
    std::string base_listing;
    std::string reference_listing;
    std::string base_analysis;
    std::string reference_analysis;
    ExperimentPlan plan;
};

struct KernelCandidate {
    std::string source;           // complete file, never a fragment or diff
    std::string technique_report; // what the model says it actually did
};

WriterContext assemble_writer_context(const SelectionDecision& decision,
                                      const ExperimentPlan& plan,
                                      const PopulationStore& population,
                                      const std::vector<KnowledgeDoc>& knowledge,
                                      const std::string& task_description);

std::string build_writer_prompt(const WriterContext& context);

// The largest fenced code block becomes the source; everything outside it is
// the technique report. No block, an empty block, or an empty report is a
// parse error.
Parsed<KernelCandidate> parse_kernel_output(const std::string& text);

KernelCandidate write_kernel(const WriterContext& context, Gateway& gateway,
                             const CallSink* sink = nullptr);

} // namespace kevo
