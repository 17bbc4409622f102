#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "designer_stage.hpp"
#include "evaluation.hpp"
#include "knowledge_base.hpp"
#include "llm_gateway.hpp"
#include "population.hpp"
#include "run_config.hpp"
#include "selector_stage.hpp"
#include "writer_stage.hpp"

namespace kevo {

struct GenerationOutcome {
    int plan_ordinal = 0;
    std::string record_id; // empty when the experiment was abandoned
    std::string note;      // status string or abandon reason
    bool abandoned() const { return record_id.empty(); }
};

struct GenerationLog {
    long long seq = 0;
    bool aborted = false;
    std::string abort_reason;
    SelectionDecision decision;
    DesignOutput plans_all;
    std::vector<int> chosen_ordinals;
    std::vector<GenerationOutcome> outcomes;
    double wall_time_s = 0.0;
};

// The generation loop: select parents, design experiments, write three
// kernels concurrently, evaluate them strictly sequentially, record children.
// All state lives in the workspace, so a run can stop after any generation
// and resume later; generation numbering continues from what is on disk.
//
// Workspace layout:
//   population/           the kernel store (see PopulationStore)
//   knowledge/            findings documents (see KnowledgeBase)
//   generations/<seq>/    selection, design, log, writer-<1..3>/ transcripts
class Engine {
public:
    // backend_override replaces the config-selected backend (tests inject
    // scripted ones).
    explicit Engine(RunConfig config, std::shared_ptr<ChatBackend> backend_override = nullptr);

    std::vector<std::string> seed(const std::vector<std::string>& sources);
    std::vector<std::string> seed_files(const std::vector<std::filesystem::path>& paths);

    GenerationLog run_generation();

    struct RunSummary {
        int generations_run = 0;
        int generations_aborted = 0;
        std::string text; // per-generation progress lines
    };
    RunSummary run(int n_generations);

    std::string status_text() const; // empty-population error when fresh
    void export_artifacts(const std::filesystem::path& out_dir) const;

    KnowledgeDoc add_doc(const std::filesystem::path& path, const std::string& title = {});
    KnowledgeDoc digest_doc(const std::filesystem::path& path);

    PopulationStore& population() { return population_; }
    const PopulationStore& population() const { return population_; }
    KnowledgeBase& knowledge() { return knowledge_; }
    Gateway& gateway() { return gateway_; }
    const RunConfig& config() const { return config_; }
    long long next_generation_seq() const { return next_seq_; }

private:
    KernelRecord make_child(const SelectionDecision& decision, const ExperimentPlan& plan,
                            const KernelCandidate& candidate, const EvalOutcome& outcome) const;
    void persist_generation_log(const GenerationLog& log) const;
    std::filesystem::path generation_dir(long long seq) const;
    static std::shared_ptr<ChatBackend> make_backend(const RunConfig& config);

    RunConfig config_;
    PopulationStore population_;
    KnowledgeBase knowledge_;
    Gateway gateway_;
    long long next_seq_ = 1;
};

std::string render_generation_log(const GenerationLog& log);

} // namespace kevo
