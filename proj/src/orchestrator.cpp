#include "orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

#include "demo_backend.hpp"
#include "http_backend.hpp"
#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

long long max_existing_seq(const std::filesystem::path& generations_dir) {
    long long max_seq = 0;
    if (!std::filesystem::exists(generations_dir)) return max_seq;
    for (const auto& entry : std::filesystem::directory_iterator(generations_dir)) {
        if (!entry.is_directory()) continue;
        try {
            max_seq = std::max(max_seq, std::stoll(entry.path().filename().string()));
        } catch (...) {
            // ignore foreign directories
        }
    }
    return max_seq;
}

std::string best_line(const PopulationStore& population) {
    std::string best = population.best_record();
    auto score = aggregate_score(population.record(best));
    return "best: " + best + " (aggregate " + format_double(score.value_or(0.0), 1) + " us)";
}

} // namespace

std::shared_ptr<ChatBackend> Engine::make_backend(const RunConfig& config) {
    if (config.backend == "http") return std::make_shared<HttpBackend>(config.http);
    return std::make_shared<DemoBackend>();
}

Engine::Engine(RunConfig config, std::shared_ptr<ChatBackend> backend_override)
    : config_(std::move(config)),
      population_(config_.workspace / "population", config_.evaluator.shapes),
      knowledge_(config_.workspace / "knowledge"),
      gateway_(backend_override ? std::move(backend_override) : make_backend(config_),
               config_.roles, config_.retry_backoff_ms) {
    ensure_dir(config_.workspace / "generations");
    next_seq_ = max_existing_seq(config_.workspace / "generations") + 1;
}

std::filesystem::path Engine::generation_dir(long long seq) const {
    return config_.workspace / "generations" / std::to_string(seq);
}

std::vector<std::string> Engine::seed(const std::vector<std::string>& sources) {
    if (sources.empty()) fail(ErrorKind::usage, "seeding needs at least one kernel source");
    std::vector<std::string> ids;
    for (const auto& source : sources) {
        EvalOutcome outcome = evaluate(source, config_.evaluator);
        KernelRecord record;
        record.source = source;
        if (outcome.kind == EvalOutcome::Kind::report) {
            record.status = RecordStatus::seed;
            record.benchmark = outcome.report;
        } else {
            record.status = outcome.record_status();
            record.eval_note = outcome.detail;
        }
        ids.push_back(population_.add_record(std::move(record)));
    }
    return ids;
}

std::vector<std::string> Engine::seed_files(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) fail(ErrorKind::usage, "seeding needs at least one kernel source file");
    std::vector<std::string> sources;
    for (const auto& p : paths) sources.push_back(read_file(p));
    return seed(sources);
}

KernelRecord Engine::make_child(const SelectionDecision& decision, const ExperimentPlan& plan,
                                const KernelCandidate& candidate,
                                const EvalOutcome& outcome) const {
    KernelRecord record;
    record.base_parent_id = decision.basis_code;
    record.reference_parent_id = decision.basis_reference;
    record.source = candidate.source;
    record.experiment = plan;
    record.technique_report = candidate.technique_report;
    record.status = outcome.record_status();
    if (outcome.kind == EvalOutcome::Kind::report) record.benchmark = outcome.report;
    else record.eval_note = outcome.detail;
    return record;
}

GenerationLog Engine::run_generation() {
    const auto started = std::chrono::steady_clock::now();
    GenerationLog log;
    log.seq = next_seq_;
    std::filesystem::path gen_dir = generation_dir(log.seq);
    ensure_dir(gen_dir);

    auto finish = [&]() -> GenerationLog& {
        log.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        persist_generation_log(log);
        ++next_seq_;
        return log;
    };

    // stage 1: selection
    CallSink selector_sink{gen_dir, "selector"};
    try {
        log.decision = select_parents(population_, gateway_, &selector_sink);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::parse_exhausted && e.kind() != ErrorKind::transport_failure)
            throw;
        log.aborted = true;
        log.abort_reason = std::string("selector: ") + e.what();
        return finish();
    }
    write_file(gen_dir / "selection", render_selection(log.decision));

    // stage 2: experiment design
    const std::vector<KnowledgeDoc> docs = knowledge_.snapshot(config_.context_byte_budget);
    DesignResult design;
    CallSink designer_sink{gen_dir, "designer"};
    try {
        design = design_experiments(population_.record(log.decision.basis_code), docs, gateway_,
                                    gen_dir / "design", &designer_sink);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::parse_exhausted && e.kind() != ErrorKind::transport_failure)
            throw;
        log.aborted = true;
        log.abort_reason = std::string("designer: ") + e.what();
        return finish();
    }
    log.plans_all = design.all;
    for (const auto& plan : design.chosen) log.chosen_ordinals.push_back(plan.ordinal);

    // stage 3: three independent kernel writers, concurrently
    struct WriterResult {
        std::optional<KernelCandidate> candidate;
        std::string error;
    };
    std::vector<CallSink> writer_sinks;
    writer_sinks.reserve(design.chosen.size());
    for (std::size_t w = 0; w < design.chosen.size(); ++w)
        writer_sinks.push_back(CallSink{gen_dir / ("writer-" + std::to_string(w + 1)), "writer"});

    std::vector<std::future<WriterResult>> futures;
    for (std::size_t w = 0; w < design.chosen.size(); ++w) {
        futures.push_back(std::async(std::launch::async, [&, w]() -> WriterResult {
            try {
                WriterContext context =
                    assemble_writer_context(log.decision, design.chosen[w], population_, docs,
                                            config_.task_description);
                return WriterResult{write_kernel(context, gateway_, &writer_sinks[w]), {}};
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::parse_exhausted &&
                    e.kind() != ErrorKind::transport_failure)
                    throw;
                return WriterResult{std::nullopt, e.what()};
            }
        }));
    }
    std::vector<WriterResult> results;
    results.reserve(futures.size());
    for (auto& f : futures) results.push_back(f.get());

    // stage 4: sequential evaluation and population writes, on this thread
    for (std::size_t w = 0; w < design.chosen.size(); ++w) {
        const ExperimentPlan& plan = design.chosen[w];
        GenerationOutcome outcome;
        outcome.plan_ordinal = plan.ordinal;
        if (!results[w].candidate) {
            outcome.note = "abandoned: " + results[w].error;
            log.outcomes.push_back(std::move(outcome));
            continue;
        }
        EvalOutcome eval = evaluate(results[w].candidate->source, config_.evaluator);
        KernelRecord child = make_child(log.decision, plan, *results[w].candidate, eval);
        std::string id = population_.add_record(std::move(child));

        std::vector<std::filesystem::path> transcripts;
        if (std::filesystem::exists(writer_sinks[w].dir))
            for (const auto& entry : std::filesystem::directory_iterator(writer_sinks[w].dir))
                if (entry.is_regular_file()) transcripts.push_back(entry.path());
        std::sort(transcripts.begin(), transcripts.end());
        population_.attach_transcripts(id, transcripts);

        outcome.record_id = id;
        outcome.note = eval.summary();
        log.outcomes.push_back(std::move(outcome));
    }
    return finish();
}

Engine::RunSummary Engine::run(int n_generations) {
    if (n_generations < 0) fail(ErrorKind::usage, "generation count must be >= 0");
    RunSummary summary;
    std::ostringstream text;
    if (n_generations == 0) {
        text << "no generations requested; population size " << population_.size() << "\n";
        try {
            if (!population_.empty()) text << best_line(population_) << "\n";
        } catch (const Error&) {
            text << "no successfully evaluated record yet\n";
        }
        summary.text = text.str();
        return summary;
    }
    if (population_.empty())
        fail(ErrorKind::empty_population, "seed the population before running generations");

    for (int i = 0; i < n_generations; ++i) {
        GenerationLog log = run_generation();
        ++summary.generations_run;
        text << "generation " << log.seq << ": ";
        if (log.aborted) {
            ++summary.generations_aborted;
            text << "aborted (" << log.abort_reason << ")\n";
            continue;
        }
        int added = 0;
        for (const auto& o : log.outcomes)
            if (!o.abandoned()) ++added;
        text << "+" << added << " records, population " << population_.size();
        try {
            text << ", " << best_line(population_);
        } catch (const Error&) {
            text << ", no scored records yet";
        }
        text << "\n";
    }
    summary.text = text.str();
    return summary;
}

std::string Engine::status_text() const {
    if (population_.empty())
        fail(ErrorKind::empty_population, "the population is empty; seed it first");
    std::ostringstream out;
    out << render_summary_table(population_.summarize());
    try {
        out << "\n" << best_line(population_) << "\n";
    } catch (const Error&) {
        out << "\nno successfully evaluated record yet\n";
    }
    out << "knowledge docs: " << knowledge_.size() << ", next generation: " << next_seq_ << "\n";
    return out.str();
}

void Engine::export_artifacts(const std::filesystem::path& out_dir) const {
    if (population_.empty())
        fail(ErrorKind::empty_population, "nothing to export; the population is empty");
    ensure_dir(out_dir);

    std::string best = population_.best_record();
    write_file(out_dir / ("best-" + best + ".kernel"), population_.record(best).source);

    // base-parent chain from the best record back to its seed
    std::ostringstream lineage;
    std::string cursor = best;
    while (true) {
        const KernelRecord& r = population_.record(cursor);
        lineage << r.id << " status=" << to_string(r.status);
        if (auto score = aggregate_score(r)) lineage << " aggregate=" << format_double(*score, 1);
        if (r.experiment) lineage << "\n  experiment: " << r.experiment->description;
        lineage << "\n";
        if (!r.base_parent_id) break;
        cursor = *r.base_parent_id;
    }
    write_file(out_dir / ("lineage-" + best + ".txt"), lineage.str());

    std::filesystem::path generations_dir = config_.workspace / "generations";
    if (std::filesystem::exists(generations_dir)) {
        ensure_dir(out_dir / "generations");
        for (const auto& entry : std::filesystem::directory_iterator(generations_dir)) {
            std::filesystem::path log_file = entry.path() / "log";
            if (std::filesystem::exists(log_file)) {
                write_file(out_dir / "generations" / (entry.path().filename().string() + ".log"),
                           read_file(log_file));
            }
        }
    }
}

KnowledgeDoc Engine::add_doc(const std::filesystem::path& path, const std::string& title) {
    std::string body = read_file(path);
    return knowledge_.add_manual_doc(title.empty() ? path.stem().string() : title, body,
                                     "added from " + path.string());
}

KnowledgeDoc Engine::digest_doc(const std::filesystem::path& path) {
    std::string raw = read_file(path);
    CallSink sink{config_.workspace / "knowledge" / "transcripts", "digester"};
    return knowledge_.digest_document(raw, config_.task_description, path.stem().string(),
                                      gateway_, &sink);
}

std::string render_generation_log(const GenerationLog& log) {
    std::string out;
    kvdoc::append_entry(out, "seq", std::to_string(log.seq));
    kvdoc::append_entry(out, "aborted", log.aborted ? "true" : "false");
    if (log.aborted) {
        kvdoc::append_entry(out, "abort_reason", log.abort_reason);
        kvdoc::append_entry(out, "wall_time_s", format_double(log.wall_time_s, 3));
        return out;
    }
    kvdoc::append_entry(out, "basis_code", log.decision.basis_code);
    kvdoc::append_entry(out, "basis_reference", log.decision.basis_reference);
    if (log.decision.basis_code == log.decision.basis_reference)
        kvdoc::append_entry(out, "degenerate_selection", "true");
    std::string ordinals;
    for (int o : log.chosen_ordinals) {
        if (!ordinals.empty()) ordinals.push_back(' ');
        ordinals += std::to_string(o);
    }
    kvdoc::append_entry(out, "chosen_ordinals", ordinals);
    for (const auto& o : log.outcomes) {
        kvdoc::append_entry(out, "outcome",
                            "plan " + std::to_string(o.plan_ordinal) + " -> " +
                                (o.abandoned() ? "-" : o.record_id) + " " + o.note);
    }
    kvdoc::append_entry(out, "wall_time_s", format_double(log.wall_time_s, 3));
    return out;
}

void Engine::persist_generation_log(const GenerationLog& log) const {
    write_file(generation_dir(log.seq) / "log", render_generation_log(log));
}

} // namespace kevo
