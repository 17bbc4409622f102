#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "population.hpp"

namespace kevo {

enum class EvaluatorKind { external_command, mock };

// Mock factor table: a token present in the source multiplies every shape's
// base timing by its factor (each token counted once, order-independent).
struct MarkerFactor {
    std::string token;
    double factor = 1.0;
};

// Test instrumentation: called inside the serialized section.
class EvalProbe {
public:
    virtual ~EvalProbe() = default;
    virtual void on_start() {}
    virtual void on_finish() {}
};

struct EvaluatorConfig {
    EvaluatorKind kind = EvaluatorKind::mock;

    // external_command only. Placeholders: {source_path}, {shapes_path} and
    // optionally {result_path}. The command runs with the per-evaluation temp
    // directory as its working directory and must leave `result.txt` there
    // (one `m k n mean_time_us correct` line per shape, exit code 0).
    std::string command_template;
    double timeout_s = 600.0;

    std::vector<BenchmarkShape> shapes; // nonempty; canonical setups carry 6

    // mock only
    std::vector<MarkerFactor> markers;
    double mock_latency_s = 0.0;
    EvalProbe* probe = nullptr; // borrowed, may be null

    // scratch root for external evaluations; empty = system temp dir
    std::filesystem::path scratch_dir;
};

struct EvalOutcome {
    enum class Kind { report, build_failed, incorrect, eval_error };

    Kind kind = Kind::eval_error;
    BenchmarkReport report; // populated iff kind == report
    std::string detail;     // build log / per-shape detail / diagnostic

    std::string summary() const;
    RecordStatus record_status() const;
};

// Runs one evaluation. At most one evaluation is in flight per process:
// callers queue in FIFO order on a module-level gate, which makes the
// sequential-submission constraint a guarantee rather than a convention.
EvalOutcome evaluate(const std::string& source, const EvaluatorConfig& config);

// Deterministic mock timing: sqrt(m*k*n) microseconds times the factor of
// every marker token present in the source.
double mock_timing(std::string_view source, const BenchmarkShape& shape,
                   const std::vector<MarkerFactor>& markers);

// Tokens the mock recognizes as scripted failures.
inline constexpr std::string_view kMockIncorrectToken = "BUG";
inline constexpr std::string_view kMockBuildFailToken = "BUILD_FAIL";
inline constexpr std::string_view kMockEvalErrorToken = "EVAL_ERROR";

} // namespace kevo
