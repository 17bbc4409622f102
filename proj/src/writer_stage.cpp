#include "writer_stage.hpp"

#include <algorithm>
#include <sstream>

#include "text_util.hpp"

namespace kevo {

WriterContext assemble_writer_context(const SelectionDecision& decision,
                                      const ExperimentPlan& plan,
                                      const PopulationStore& population,
                                      const std::vector<KnowledgeDoc>& knowledge,
                                      const std::string& task_description) {
    const KernelRecord& base = population.record(decision.basis_code);
    const KernelRecord& reference = population.record(decision.basis_reference);

    WriterContext context;
    context.task_description = task_description;
    context.findings = knowledge;
    context.base_id = base.id;
    context.reference_id = reference.id;
    context.base_listing = base.source;
    context.reference_listing = reference.source;
    context.base_analysis = population.one_step_analysis(base.id);
    context.reference_analysis = population.one_step_analysis(reference.id);
    context.plan = plan;
    return context;
}

std::string build_writer_prompt(const WriterContext& context) {
    auto listing = [](const std::string& source) {
        std::string out = "```\n" + source;
        if (out.empty() || out.back() != '\n') out.push_back('\n');
        return out + "```\n";
    };

    std::ostringstream out;
    out << "You are the kernel writer in an autonomous GPU kernel optimization loop.\n"
        << "Implement the experiment below by modifying the Base kernel. The Reference\n"
        << "kernel is included for contrast; do not modify it.\n\n";
    out << "### Task description\n" << context.task_description << "\n\n";
    out << "### Findings\n";
    if (context.findings.empty()) {
        out << "No external notes are available.\n";
    } else {
        for (const auto& doc : context.findings) out << "#### " << doc.title << "\n" << doc.body << "\n\n";
    }
    out << "\n### Reference code (id " << context.reference_id << ")\n"
        << listing(context.reference_listing) << "\n"
        << "### Reference analysis\n"
        << context.reference_analysis << "\n"
        << "### Base code (id " << context.base_id << ")\n"
        << listing(context.base_listing) << "\n"
        << "### Base analysis\n"
        << context.base_analysis << "\n"
        << "### Experiment description\n"
        << context.plan.description << "\n\n"
        << "### Experiment rubric\n"
        << context.plan.rubric << "\n\n"
        << "### Output format\n"
        << "Respond with the complete new kernel source (a full file ready for the\n"
        << "evaluation harness, not a diff or a snippet) in a single fenced code block,\n"
        << "followed by a short technique report in plain prose describing the techniques\n"
        << "you actually applied.\n";
    return out.str();
}

Parsed<KernelCandidate> parse_kernel_output(const std::string& text) {
    auto blocks = fenced_blocks(text);
    if (blocks.empty())
        return Parsed<KernelCandidate>::failure(
            "no fenced code block found; the kernel source must be inside ``` fences");

    const FencedBlock* largest = &blocks.front();
    for (const auto& b : blocks)
        if (b.content.size() > largest->content.size()) largest = &b;
    if (trim(largest->content).empty())
        return Parsed<KernelCandidate>::failure("the fenced source block is empty");

    // technique report = all prose outside fenced blocks
    std::string report;
    auto lines = split_lines(text);
    bool inside = false;
    for (auto line : lines) {
        std::string_view t = trim(line);
        if (t.substr(0, 3) == "```") {
            if (!inside) inside = true;
            else if (trim(t.substr(3)).empty()) inside = false;
            continue;
        }
        if (!inside) {
            report.append(line);
            report.push_back('\n');
        }
    }
    std::string trimmed_report(trim(report));
    if (trimmed_report.empty())
        return Parsed<KernelCandidate>::failure(
            "no technique report found; add a short prose report outside the code block");

    KernelCandidate candidate;
    candidate.source = largest->content;
    if (!candidate.source.empty() && candidate.source.back() != '\n') candidate.source.push_back('\n');
    candidate.technique_report = trimmed_report;
    return Parsed<KernelCandidate>::success(std::move(candidate));
}

KernelCandidate write_kernel(const WriterContext& context, Gateway& gateway,
                             const CallSink* sink) {
    for (const auto& [field, value] :
         std::initializer_list<std::pair<const char*, const std::string*>>{
             {"task_description", &context.task_description},
             {"base_listing", &context.base_listing},
             {"reference_listing", &context.reference_listing},
             {"base_analysis", &context.base_analysis},
             {"reference_analysis", &context.reference_analysis},
             {"plan description", &context.plan.description},
             {"plan rubric", &context.plan.rubric}}) {
        if (trim(*value).empty())
            fail(ErrorKind::precondition, std::string("writer context field is empty: ") + field);
    }
    return gateway.complete_structured<KernelCandidate>(
        "writer", build_writer_prompt(context), parse_kernel_output, sink);
}

} // namespace kevo
