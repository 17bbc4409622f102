#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kevo {

struct BenchmarkShape {
    long long m = 0;
    long long k = 0;
    long long n = 0;

    bool valid() const { return m >= 1 && k >= 1 && n >= 1; }
    std::string label() const; // "6144x512x4096"
    bool operator==(const BenchmarkShape&) const = default;
};

struct BenchmarkEntry {
    BenchmarkShape shape;
    double mean_time_us = 0.0;
    bool correct = true;
};

struct BenchmarkReport {
    std::vector<BenchmarkEntry> entries;
    std::string evaluated_at; // ISO-8601, stored verbatim
};

enum class RecordStatus { seed, pending, evaluated, build_failed, incorrect, eval_error };

std::string_view to_string(RecordStatus status);
std::optional<RecordStatus> status_from_string(std::string_view s);

struct ExperimentPlan {
    std::string description;
    std::string rubric;
    double performance_lo = 0.0; // estimated percent improvement range
    double performance_hi = 0.0;
    double innovation = 0.0;     // 0..100
    int ordinal = 0;             // 1..5, position in the designer's output
};

// One population individual. A seed that benchmarked successfully keeps
// status `seed` with its report attached; `scored()` is the eligibility
// predicate used by the selector and best_record.
struct KernelRecord {
    std::string id; // zero-padded 5-digit decimal, assigned by the store
    std::optional<std::string> base_parent_id;
    std::optional<std::string> reference_parent_id;
    std::string source;
    std::optional<ExperimentPlan> experiment;
    std::optional<std::string> technique_report;
    std::optional<BenchmarkReport> benchmark;
    RecordStatus status = RecordStatus::pending;
    long long created_seq = 0;
    std::string eval_note; // failure log / diagnostic, empty when scored

    bool scored() const {
        return benchmark.has_value() &&
               (status == RecordStatus::seed || status == RecordStatus::evaluated);
    }
    bool is_seed() const { return status == RecordStatus::seed; }
};

// Geometric mean of per-shape timings; absent unless the record is scored.
std::optional<double> aggregate_score(const KernelRecord& record);

struct SummaryRow {
    std::string id;
    std::string base_parent_id;      // "-" when absent
    std::string reference_parent_id; // "-" when absent
    std::string status;
    std::vector<std::optional<double>> timings; // one slot per configured shape
    std::optional<double> aggregate;
};

struct PopulationSummary {
    std::vector<BenchmarkShape> shapes;
    std::vector<SummaryRow> rows; // created_seq order
};

// Fixed-width table with one column per shape plus an aggregate column;
// failed rows carry '-' markers. This is what the selector prompt embeds.
std::string render_summary_table(const PopulationSummary& summary);

std::string render_benchmark_table(const BenchmarkReport& report);

// File-backed population store.
//
// Layout under dir():
//   index                      append-only: "id base ref status seq" per line
//   <id>/source.kernel         kernel source, exact bytes
//   <id>/meta                  kvdoc (id, parents, status, experiment, ...)
//   <id>/benchmark             kvdoc, present when a report exists
//   <id>/transcripts/          LLM transcripts that produced the record
//
// Single-writer: mutations come from the orchestrator control loop only.
class PopulationStore {
public:
    PopulationStore(std::filesystem::path dir, std::vector<BenchmarkShape> shapes);

    // Assigns id + created_seq, persists, returns the id. The record must
    // arrive without one; parents must already exist.
    std::string add_record(KernelRecord record);

    bool contains(const std::string& id) const;
    const KernelRecord& record(const std::string& id) const; // unknown-id
    const std::vector<KernelRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    PopulationSummary summarize() const;

    // Text block with the producing experiment's description, the base
    // parent's benchmark table and the record's own benchmarks. Seeds get a
    // stub analysis so generation-1 writer contexts stay constructible.
    std::string one_step_analysis(const std::string& id) const;

    // Scored record with the lowest aggregate score; ties break toward the
    // smallest created_seq.
    std::string best_record() const;

    // Copies transcript files produced by the writer stage into the record's
    // transcripts/ directory.
    void attach_transcripts(const std::string& id,
                            const std::vector<std::filesystem::path>& files);

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<BenchmarkShape>& shapes() const { return shapes_; }

private:
    void load();
    void persist(const KernelRecord& record);
    const KernelRecord* find(const std::string& id) const;

    std::filesystem::path dir_;
    std::vector<BenchmarkShape> shapes_;
    std::vector<KernelRecord> records_;
};

} // namespace kevo
