#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "llm_gateway.hpp"
#include "population.hpp"
#include "text_util.hpp"

namespace kevo::test {

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "kevo-test-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string load_fixture(const std::string& name) {
    return read_file(std::filesystem::path(KEVO_TEST_DATA_DIR) / name);
}

inline std::vector<BenchmarkShape> two_shapes() {
    return {{64, 64, 64}, {128, 32, 64}};
}

inline std::vector<BenchmarkShape> six_shapes() {
    return {{1024, 1024, 1024}, {6144, 512, 4096}, {4096, 4096, 512},
            {2048, 2048, 2048}, {512, 8192, 1024}, {8192, 1024, 512}};
}

inline BenchmarkReport report_with_timings(const std::vector<BenchmarkShape>& shapes,
                                           const std::vector<double>& timings) {
    BenchmarkReport report;
    report.evaluated_at = "2026-01-01T00:00:00Z";
    for (std::size_t i = 0; i < shapes.size(); ++i)
        report.entries.push_back(BenchmarkEntry{shapes[i], timings[i], true});
    return report;
}

inline KernelRecord seed_record(const std::vector<BenchmarkShape>& shapes,
                                const std::vector<double>& timings,
                                const std::string& source = "// seed kernel\n") {
    KernelRecord r;
    r.source = source;
    r.status = RecordStatus::seed;
    r.benchmark = report_with_timings(shapes, timings);
    return r;
}

inline ExperimentPlan plan_with(double lo, double hi, double innovation, int ordinal = 0) {
    ExperimentPlan p;
    p.description = "experiment " + std::to_string(ordinal);
    p.rubric = "do the thing " + std::to_string(ordinal);
    p.performance_lo = lo;
    p.performance_hi = hi;
    p.innovation = innovation;
    p.ordinal = ordinal;
    return p;
}

inline KernelRecord child_record(const std::string& base, const std::string& reference,
                                 const std::vector<BenchmarkShape>& shapes,
                                 const std::vector<double>& timings,
                                 const std::string& source = "// child kernel\n") {
    KernelRecord r;
    r.source = source;
    r.base_parent_id = base;
    r.reference_parent_id = reference;
    r.experiment = plan_with(5, 20, 70, 1);
    r.technique_report = "applied the experiment";
    r.status = RecordStatus::evaluated;
    r.benchmark = report_with_timings(shapes, timings);
    return r;
}

inline std::map<std::string, RoleConfig> all_roles(int max_attempts = 3) {
    std::map<std::string, RoleConfig> roles;
    for (const char* name : {"selector", "designer", "writer", "digester"})
        roles[name] = RoleConfig{std::string("test-model-") + name, 0.7, max_attempts};
    return roles;
}

struct ScriptedGateway {
    std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
    Gateway gateway;

    explicit ScriptedGateway(int max_attempts = 3)
        : gateway(backend, all_roles(max_attempts), /*retry_backoff_ms=*/0) {}
};

// Wraps another backend; the interceptor may hijack selected requests
// (poisoning one writer, failing a stage) while the rest flow through.
class FilterBackend : public ChatBackend {
public:
    using Interceptor = std::function<std::optional<std::string>(const ChatRequest&)>;

    FilterBackend(std::shared_ptr<ChatBackend> inner, Interceptor interceptor)
        : inner_(std::move(inner)), interceptor_(std::move(interceptor)) {}

    std::string complete(const ChatRequest& request) override {
        if (auto hijacked = interceptor_(request)) return *hijacked;
        return inner_->complete(request);
    }

private:
    std::shared_ptr<ChatBackend> inner_;
    Interceptor interceptor_;
};

} // namespace kevo::test
