#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "evaluation.hpp"
#include "helpers.hpp"

using namespace kevo;
using namespace kevo::test;

namespace {

EvaluatorConfig mock_config(std::vector<BenchmarkShape> shapes = six_shapes()) {
    EvaluatorConfig config;
    config.kind = EvaluatorKind::mock;
    config.shapes = std::move(shapes);
    return config;
}

// harness stand-in: a shell script the external evaluator invokes
void write_shim(const std::filesystem::path& path, const std::string& body) {
    write_file(path, "#!/bin/sh\n" + body);
    std::filesystem::permissions(path, std::filesystem::perms::owner_all);
}

} // namespace

TEST_CASE("mock base timing is sqrt(m*k*n) microseconds") {
    // hand-computed: 6144 * 512 * 4096 = 12884901888, sqrt = 113511.68172...
    BenchmarkShape shape{6144, 512, 4096};
    double t = mock_timing("// no markers here\n", shape, {});
    CHECK(t == doctest::Approx(113511.68172483394).epsilon(1e-9));
}

TEST_CASE("marker factors multiply, each counted once, order-independent") {
    std::vector<MarkerFactor> markers{{"OPT_A", 0.5}, {"OPT_B", 0.5}, {"OPT_UNUSED", 0.1}};
    BenchmarkShape shape{100, 100, 100};
    double base = mock_timing("plain", shape, markers);
    CHECK(base == doctest::Approx(1000.0));
    CHECK(mock_timing("has OPT_A only... OPT_A OPT_A", shape, markers) == doctest::Approx(500.0));
    CHECK(mock_timing("OPT_B then OPT_A", shape, markers) == doctest::Approx(250.0));
    CHECK(mock_timing("OPT_A then OPT_B", shape, markers) == doctest::Approx(250.0));
}

TEST_CASE("identical source evaluates to identical timings") {
    auto config = mock_config();
    config.markers = {{"OPT_L2", 0.8}};
    std::string source = "// kernel with OPT_L2\n";
    auto first = evaluate(source, config);
    auto second = evaluate(source, config);
    REQUIRE(first.kind == EvalOutcome::Kind::report);
    REQUIRE(second.kind == EvalOutcome::Kind::report);
    for (std::size_t i = 0; i < first.report.entries.size(); ++i)
        CHECK(first.report.entries[i].mean_time_us == second.report.entries[i].mean_time_us);
}

TEST_CASE("mock: OPT_L2 marker scales every shape by its factor") {
    auto config = mock_config();
    config.markers = {{"OPT_L2", 0.8}};
    auto outcome = evaluate("// uses OPT_L2 tiling\n", config);
    REQUIRE(outcome.kind == EvalOutcome::Kind::report);
    REQUIRE(outcome.report.entries.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& e = outcome.report.entries[i];
        // recompute via the published formula
        double expected = std::sqrt(static_cast<double>(e.shape.m) * e.shape.k * e.shape.n) * 0.8;
        CHECK(e.mean_time_us == doctest::Approx(expected).epsilon(1e-12));
        CHECK(e.correct);
    }
}

TEST_CASE("mock monotonicity: adding a sub-1 factor strictly lowers all timings") {
    auto config = mock_config();
    config.markers = {{"OPT_1", 0.9}, {"OPT_2", 0.95}};
    auto before = evaluate("// OPT_1\n", config);
    auto after = evaluate("// OPT_1 OPT_2\n", config);
    REQUIRE(before.kind == EvalOutcome::Kind::report);
    REQUIRE(after.kind == EvalOutcome::Kind::report);
    for (std::size_t i = 0; i < before.report.entries.size(); ++i)
        CHECK(after.report.entries[i].mean_time_us < before.report.entries[i].mean_time_us);
}

TEST_CASE("mock failure tokens map to the failure variants") {
    auto config = mock_config(two_shapes());
    CHECK(evaluate("// has a BUG inside\n", config).kind == EvalOutcome::Kind::incorrect);
    CHECK(evaluate("// BUILD_FAIL\n", config).kind == EvalOutcome::Kind::build_failed);
    CHECK(evaluate("// EVAL_ERROR\n", config).kind == EvalOutcome::Kind::eval_error);
    auto incorrect = evaluate("// BUG\n", config);
    CHECK(incorrect.detail.find("64x64x64") != std::string::npos);
}

TEST_CASE("empty source is a precondition violation") {
    CHECK_THROWS_AS((void)evaluate("  \n", mock_config(two_shapes())), Error);
}

TEST_CASE("config validation rejects empty shapes and bad timeouts") {
    EvaluatorConfig config;
    CHECK_THROWS_AS((void)evaluate("// x\n", config), Error);
    config.shapes = two_shapes();
    config.timeout_s = 0;
    CHECK_THROWS_AS((void)evaluate("// x\n", config), Error);
}

TEST_CASE("external command: happy path parses the result file") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh",
               "src=\"$1\"; shapes=\"$2\"\n"
               "while read m k n; do echo \"$m $k $n 123.5 1\"; done < \"$shapes\" > result.txt\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {source_path} {shapes_path}";
    config.shapes = six_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// external kernel\n", config);
    REQUIRE_MESSAGE(outcome.kind == EvalOutcome::Kind::report, outcome.detail);
    REQUIRE(outcome.report.entries.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(outcome.report.entries[i].shape == six_shapes()[i]);
        CHECK(outcome.report.entries[i].mean_time_us == doctest::Approx(123.5));
    }
}

TEST_CASE("external command: rows marked incorrect produce the incorrect variant") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh",
               "shapes=\"$2\"\n"
               "i=0\n"
               "while read m k n; do\n"
               "  if [ $i = 0 ]; then echo \"$m $k $n 10.0 0\"; else echo \"$m $k $n 10.0 1\"; fi\n"
               "  i=$((i+1))\n"
               "done < \"$shapes\" > result.txt\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {source_path} {shapes_path}";
    config.shapes = two_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// kernel\n", config);
    CHECK(outcome.kind == EvalOutcome::Kind::incorrect);
    CHECK(outcome.detail.find("64x64x64") != std::string::npos);
}

TEST_CASE("external command: nonzero exit without result file is build_failed") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh", "echo 'fatal: no such instruction'; exit 4\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {source_path} {shapes_path}";
    config.shapes = two_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// kernel\n", config);
    CHECK(outcome.kind == EvalOutcome::Kind::build_failed);
    CHECK(outcome.detail.find("code 4") != std::string::npos);
    CHECK(outcome.detail.find("no such instruction") != std::string::npos);
}

TEST_CASE("external command: malformed result files are eval errors") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh", "echo 'what even is this' > result.txt\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {source_path} {shapes_path}";
    config.shapes = two_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// kernel\n", config);
    CHECK(outcome.kind == EvalOutcome::Kind::eval_error);
    CHECK(outcome.detail.find("result line") != std::string::npos);
}

TEST_CASE("external command: wrong shape coverage is an eval error") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh", "echo '64 64 64 10.0 1' > result.txt\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {source_path} {shapes_path}";
    config.shapes = two_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// kernel\n", config);
    CHECK(outcome.kind == EvalOutcome::Kind::eval_error);
    CHECK(outcome.detail.find("expected 2") != std::string::npos);
}

TEST_CASE("external command: timeouts are eval errors") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh", "sleep 30\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string();
    config.shapes = two_shapes();
    config.timeout_s = 0.3;
    config.scratch_dir = tmp.path / "scratch";

    auto started = std::chrono::steady_clock::now();
    auto outcome = evaluate("// kernel\n", config);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    CHECK(outcome.kind == EvalOutcome::Kind::eval_error);
    CHECK(outcome.detail.find("timed out") != std::string::npos);
    CHECK(elapsed < 5.0);
}

TEST_CASE("external command: scratch directories are cleaned up") {
    TempDir tmp;
    write_shim(tmp.path / "harness.sh",
               "while read m k n; do echo \"$m $k $n 5.0 1\"; done < \"$1\" > result.txt\n");
    EvaluatorConfig config;
    config.kind = EvaluatorKind::external_command;
    config.command_template = (tmp.path / "harness.sh").string() + " {shapes_path}";
    config.shapes = two_shapes();
    config.timeout_s = 30;
    config.scratch_dir = tmp.path / "scratch";

    auto outcome = evaluate("// kernel\n", config);
    REQUIRE_MESSAGE(outcome.kind == EvalOutcome::Kind::report, outcome.detail);
    std::size_t leftover = 0;
    for (const auto& e : std::filesystem::directory_iterator(config.scratch_dir)) {
        (void)e;
        ++leftover;
    }
    CHECK(leftover == 0);
}

namespace {

// records (start, end) intervals observed inside the serialized section
struct IntervalProbe : EvalProbe {
    std::mutex mutex;
    std::vector<std::pair<std::chrono::steady_clock::time_point,
                          std::chrono::steady_clock::time_point>>
        intervals;
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
    std::chrono::steady_clock::time_point current_start;

    void on_start() override {
        int now = ++in_flight;
        int seen = max_in_flight.load();
        while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
        }
        current_start = std::chrono::steady_clock::now();
    }
    void on_finish() override {
        auto end = std::chrono::steady_clock::now();
        {
            std::lock_guard lock(mutex);
            intervals.emplace_back(current_start, end);
        }
        --in_flight;
    }
};

} // namespace

TEST_CASE("concurrent evaluations never overlap") {
    IntervalProbe probe;
    auto config = mock_config(two_shapes());
    config.mock_latency_s = 0.0002;
    config.probe = &probe;

    std::vector<std::thread> threads;
    for (int t = 0; t < 3; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 20; ++i) {
                auto outcome = evaluate("// kernel " + std::to_string(t) + "\n", config);
                CHECK(outcome.kind == EvalOutcome::Kind::report);
            }
        });
    }
    for (auto& th : threads) th.join();

    CHECK(probe.max_in_flight == 1);
    auto intervals = probe.intervals;
    REQUIRE(intervals.size() == 60);
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 1; i < intervals.size(); ++i)
        CHECK(intervals[i].first >= intervals[i - 1].second);
}
