#include "population.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

constexpr std::string_view kAbsent = "-";
constexpr int kTimingDecimals = 3;

std::string format_id(long long seq) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%05lld", seq);
    return buf;
}

std::string parent_or_dash(const std::optional<std::string>& parent) {
    return parent ? *parent : std::string(kAbsent);
}

std::string index_line(const KernelRecord& r) {
    std::ostringstream line;
    line << r.id << ' ' << parent_or_dash(r.base_parent_id) << ' '
         << parent_or_dash(r.reference_parent_id) << ' ' << to_string(r.status) << ' '
         << r.created_seq << '\n';
    return line.str();
}

std::string render_meta(const KernelRecord& r) {
    std::string out;
    kvdoc::append_entry(out, "id", r.id);
    if (r.base_parent_id) kvdoc::append_entry(out, "base_parent_id", *r.base_parent_id);
    if (r.reference_parent_id)
        kvdoc::append_entry(out, "reference_parent_id", *r.reference_parent_id);
    kvdoc::append_entry(out, "status", to_string(r.status));
    kvdoc::append_entry(out, "created_seq", std::to_string(r.created_seq));
    if (r.experiment) {
        kvdoc::append_entry(out, "experiment.description", r.experiment->description);
        kvdoc::append_entry(out, "experiment.rubric", r.experiment->rubric);
        kvdoc::append_entry(out, "experiment.performance_lo",
                            format_double(r.experiment->performance_lo, 6));
        kvdoc::append_entry(out, "experiment.performance_hi",
                            format_double(r.experiment->performance_hi, 6));
        kvdoc::append_entry(out, "experiment.innovation",
                            format_double(r.experiment->innovation, 6));
        kvdoc::append_entry(out, "experiment.ordinal", std::to_string(r.experiment->ordinal));
    }
    if (r.technique_report) kvdoc::append_entry(out, "technique_report", *r.technique_report);
    if (!r.eval_note.empty()) kvdoc::append_entry(out, "eval_note", r.eval_note);
    return out;
}

std::string render_benchmark_file(const BenchmarkReport& report) {
    std::string out;
    kvdoc::append_entry(out, "evaluated_at", report.evaluated_at);
    for (const auto& e : report.entries) {
        std::ostringstream row;
        row << e.shape.m << ' ' << e.shape.k << ' ' << e.shape.n << ' '
            << format_double(e.mean_time_us, kTimingDecimals) << ' ' << (e.correct ? 1 : 0);
        kvdoc::append_entry(out, "entry", row.str());
    }
    return out;
}

BenchmarkReport parse_benchmark_file(const std::string& text, const std::string& id) {
    kvdoc::Doc doc = kvdoc::parse(text);
    BenchmarkReport report;
    report.evaluated_at = doc.get_or("evaluated_at", "");
    for (const auto& row : doc.get_all("entry")) {
        auto tok = split_ws(row);
        if (tok.size() != 5) fail(ErrorKind::storage, "malformed benchmark entry for " + id);
        BenchmarkEntry e;
        e.shape.m = std::stoll(std::string(tok[0]));
        e.shape.k = std::stoll(std::string(tok[1]));
        e.shape.n = std::stoll(std::string(tok[2]));
        e.mean_time_us = std::stod(std::string(tok[3]));
        e.correct = tok[4] == "1" || tok[4] == "true" || tok[4] == "ok";
        report.entries.push_back(e);
    }
    return report;
}

} // namespace

std::string BenchmarkShape::label() const {
    std::ostringstream out;
    out << m << 'x' << k << 'x' << n;
    return out.str();
}

std::string_view to_string(RecordStatus status) {
    switch (status) {
    case RecordStatus::seed: return "seed";
    case RecordStatus::pending: return "pending";
    case RecordStatus::evaluated: return "evaluated";
    case RecordStatus::build_failed: return "build_failed";
    case RecordStatus::incorrect: return "incorrect";
    case RecordStatus::eval_error: return "eval_error";
    }
    return "pending";
}

std::optional<RecordStatus> status_from_string(std::string_view s) {
    for (RecordStatus st : {RecordStatus::seed, RecordStatus::pending, RecordStatus::evaluated,
                            RecordStatus::build_failed, RecordStatus::incorrect,
                            RecordStatus::eval_error}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

std::optional<double> aggregate_score(const KernelRecord& record) {
    if (!record.scored() || record.benchmark->entries.empty()) return std::nullopt;
    double log_sum = 0.0;
    for (const auto& e : record.benchmark->entries) log_sum += std::log(e.mean_time_us);
    return std::exp(log_sum / static_cast<double>(record.benchmark->entries.size()));
}

std::string render_summary_table(const PopulationSummary& summary) {
    std::vector<std::string> header{"id", "base", "ref", "status"};
    for (const auto& s : summary.shapes) header.push_back(s.label());
    header.push_back("aggregate");

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : summary.rows) {
        std::vector<std::string> c{row.id, row.base_parent_id, row.reference_parent_id,
                                   row.status};
        for (const auto& t : row.timings)
            c.push_back(t ? format_double(*t, 1) : std::string(kAbsent));
        c.push_back(row.aggregate ? format_double(*row.aggregate, 1) : std::string(kAbsent));
        cells.push_back(std::move(c));
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            out << row[i];
            if (i + 1 < row.size())
                out << std::string(width[i] - row[i].size(), ' ');
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : cells) emit(row);
    return out.str();
}

std::string render_benchmark_table(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "shape            mean_time_us   correct\n";
    for (const auto& e : report.entries) {
        std::string label = e.shape.label();
        out << label << std::string(label.size() < 16 ? 16 - label.size() : 1, ' ')
            << format_double(e.mean_time_us, kTimingDecimals) << "   "
            << (e.correct ? "yes" : "no") << '\n';
    }
    return out.str();
}

PopulationStore::PopulationStore(std::filesystem::path dir, std::vector<BenchmarkShape> shapes)
    : dir_(std::move(dir)), shapes_(std::move(shapes)) {
    for (const auto& s : shapes_) {
        if (!s.valid()) fail(ErrorKind::config, "benchmark shape dimensions must be >= 1");
    }
    ensure_dir(dir_);
    load();
}

const KernelRecord* PopulationStore::find(const std::string& id) const {
    for (const auto& r : records_)
        if (r.id == id) return &r;
    return nullptr;
}

bool PopulationStore::contains(const std::string& id) const {
    return find(id) != nullptr;
}

const KernelRecord& PopulationStore::record(const std::string& id) const {
    const KernelRecord* r = find(id);
    if (!r) fail(ErrorKind::unknown_id, "no record with id " + id);
    return *r;
}

std::string PopulationStore::add_record(KernelRecord record) {
    if (!record.id.empty())
        fail(ErrorKind::precondition, "record id must be unset; the store assigns ids");
    for (const auto& parent : {record.base_parent_id, record.reference_parent_id}) {
        if (parent && !contains(*parent))
            fail(ErrorKind::unknown_parent, "parent id " + *parent + " not in store");
    }
    if (record.is_seed() && (record.base_parent_id || record.reference_parent_id ||
                             record.experiment))
        fail(ErrorKind::precondition, "seed records carry no parents and no experiment");
    if (record.status == RecordStatus::evaluated && !record.benchmark)
        fail(ErrorKind::precondition, "evaluated records need a benchmark report");
    if (record.benchmark) {
        const auto& entries = record.benchmark->entries;
        if (entries.size() != shapes_.size())
            fail(ErrorKind::precondition, "benchmark must cover the configured shape list");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!(entries[i].shape == shapes_[i]))
                fail(ErrorKind::precondition, "benchmark entries out of configured shape order");
            if (entries[i].mean_time_us <= 0.0)
                fail(ErrorKind::precondition, "benchmark timings must be positive");
        }
    }

    record.created_seq = static_cast<long long>(records_.size()) + 1;
    record.id = format_id(record.created_seq);
    if (record.technique_report)
        record.technique_report = kvdoc::canonical_value(*record.technique_report);
    if (record.experiment) {
        record.experiment->description = kvdoc::canonical_value(record.experiment->description);
        record.experiment->rubric = kvdoc::canonical_value(record.experiment->rubric);
    }
    record.eval_note = kvdoc::canonical_value(record.eval_note);

    persist(record);
    records_.push_back(std::move(record));
    return records_.back().id;
}

void PopulationStore::persist(const KernelRecord& record) {
    std::filesystem::path rec_dir = dir_ / record.id;
    ensure_dir(rec_dir / "transcripts");
    write_file(rec_dir / "source.kernel", record.source);
    write_file(rec_dir / "meta", render_meta(record));
    if (record.benchmark) write_file(rec_dir / "benchmark", render_benchmark_file(*record.benchmark));

    std::ofstream index(dir_ / "index", std::ios::app | std::ios::binary);
    if (!index) fail(ErrorKind::storage, "cannot append to population index");
    index << index_line(record);
    index.flush();
    if (!index) fail(ErrorKind::storage, "population index append failed");
}

void PopulationStore::load() {
    std::filesystem::path index_path = dir_ / "index";
    if (!std::filesystem::exists(index_path)) return;
    std::string index_text = read_file(index_path);
    for (auto line : split_lines(index_text)) {
        if (trim(line).empty()) continue;
        auto tok = split_ws(line);
        if (tok.size() != 5) fail(ErrorKind::storage, "malformed index line: " + std::string(line));
        KernelRecord r;
        r.id = std::string(tok[0]);
        if (tok[1] != kAbsent) r.base_parent_id = std::string(tok[1]);
        if (tok[2] != kAbsent) r.reference_parent_id = std::string(tok[2]);
        auto status = status_from_string(tok[3]);
        if (!status) fail(ErrorKind::storage, "unknown status in index: " + std::string(tok[3]));
        r.status = *status;
        r.created_seq = std::stoll(std::string(tok[4]));
        if (r.created_seq != static_cast<long long>(records_.size()) + 1)
            fail(ErrorKind::storage, "index created_seq out of order at " + r.id);

        std::filesystem::path rec_dir = dir_ / r.id;
        r.source = read_file(rec_dir / "source.kernel");
        kvdoc::Doc meta = kvdoc::parse(read_file(rec_dir / "meta"));
        if (meta.has("experiment.description")) {
            ExperimentPlan plan;
            plan.description = meta.get_or("experiment.description", "");
            plan.rubric = meta.get_or("experiment.rubric", "");
            plan.performance_lo = std::stod(meta.get_or("experiment.performance_lo", "0"));
            plan.performance_hi = std::stod(meta.get_or("experiment.performance_hi", "0"));
            plan.innovation = std::stod(meta.get_or("experiment.innovation", "0"));
            plan.ordinal = std::stoi(meta.get_or("experiment.ordinal", "0"));
            r.experiment = std::move(plan);
        }
        if (auto report = meta.get("technique_report")) r.technique_report = *report;
        r.eval_note = meta.get_or("eval_note", "");
        if (std::filesystem::exists(rec_dir / "benchmark")) {
            r.benchmark = parse_benchmark_file(read_file(rec_dir / "benchmark"), r.id);
            // a workspace created under one shape list cannot be reopened
            // under another; summaries index reports by shape position
            const auto& entries = r.benchmark->entries;
            bool matches = entries.size() == shapes_.size();
            for (std::size_t i = 0; matches && i < entries.size(); ++i)
                matches = entries[i].shape == shapes_[i];
            if (!matches)
                fail(ErrorKind::storage,
                     "benchmark for " + r.id +
                         " does not cover the configured shape list; the workspace was "
                         "created under a different benchmark configuration");
        }
        records_.push_back(std::move(r));
    }
}

PopulationSummary PopulationStore::summarize() const {
    PopulationSummary summary;
    summary.shapes = shapes_;
    for (const auto& r : records_) {
        SummaryRow row;
        row.id = r.id;
        row.base_parent_id = parent_or_dash(r.base_parent_id);
        row.reference_parent_id = parent_or_dash(r.reference_parent_id);
        row.status = std::string(to_string(r.status));
        row.timings.assign(shapes_.size(), std::nullopt);
        if (r.scored()) {
            for (std::size_t i = 0; i < shapes_.size(); ++i)
                row.timings[i] = r.benchmark->entries[i].mean_time_us;
            row.aggregate = aggregate_score(r);
        }
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

std::string PopulationStore::one_step_analysis(const std::string& id) const {
    const KernelRecord& r = record(id);
    std::ostringstream out;
    if (r.is_seed()) {
        out << "Record " << r.id << ": seed kernel, no prior experiment.\n";
        if (r.benchmark) {
            out << "Benchmarks for " << r.id << ":\n" << render_benchmark_table(*r.benchmark);
        }
        return out.str();
    }
    out << "Record " << r.id << " was produced by this experiment:\n";
    out << (r.experiment ? r.experiment->description : std::string("(no experiment recorded)"))
        << "\n";
    if (r.base_parent_id) {
        const KernelRecord& base = record(*r.base_parent_id);
        out << "\nBenchmarks for its base parent " << base.id << ":\n";
        if (base.benchmark) out << render_benchmark_table(*base.benchmark);
        else out << "(base parent " << base.id << " has no benchmark: " << to_string(base.status) << ")\n";
    }
    out << "\nBenchmarks for " << r.id << " itself:\n";
    if (r.benchmark) out << render_benchmark_table(*r.benchmark);
    else out << "(no benchmark: " << to_string(r.status) << ")\n";
    if (r.technique_report) {
        out << "\nTechnique report for " << r.id << ":\n" << *r.technique_report << "\n";
    }
    return out.str();
}

std::string PopulationStore::best_record() const {
    const KernelRecord* best = nullptr;
    double best_score = 0.0;
    for (const auto& r : records_) {
        auto score = aggregate_score(r);
        if (!score) continue;
        if (!best || *score < best_score) {
            best = &r;
            best_score = *score;
        }
    }
    if (!best) fail(ErrorKind::no_scored_records, "population holds no successfully evaluated record");
    return best->id;
}

void PopulationStore::attach_transcripts(const std::string& id,
                                         const std::vector<std::filesystem::path>& files) {
    const KernelRecord& r = record(id);
    std::filesystem::path target = dir_ / r.id / "transcripts";
    ensure_dir(target);
    for (const auto& f : files) {
        std::error_code ec;
        std::filesystem::copy_file(f, target / f.filename(),
                                   std::filesystem::copy_options::overwrite_existing, ec);
        if (ec) fail(ErrorKind::storage, "cannot copy transcript " + f.string() + ": " + ec.message());
    }
}

} // namespace kevo
