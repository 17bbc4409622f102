#include <doctest.h>

#include "demo_backend.hpp"
#include "designer_stage.hpp"
#include "helpers.hpp"
#include "selector_stage.hpp"
#include "writer_stage.hpp"

using namespace kevo;
using namespace kevo::test;

namespace {

ChatRequest request_for(const std::string& role, std::string prompt) {
    return ChatRequest{role, "demo-model", 0.7, std::move(prompt)};
}

} // namespace

TEST_CASE("demo selector picks the best-scoring row and the runner-up") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {300, 300}));
    store.add_record(seed_record(two_shapes(), {100, 100}));
    store.add_record(seed_record(two_shapes(), {200, 200}));
    KernelRecord failed;
    failed.source = "// broken\n";
    failed.status = RecordStatus::build_failed;
    store.add_record(std::move(failed));

    DemoBackend demo;
    std::string response = demo.complete(
        request_for("selector", build_selector_prompt(store.summarize())));
    auto parsed = parse_selection(response);
    REQUIRE_MESSAGE(parsed.ok(), parsed.error);
    CHECK(parsed.value->basis_code == "00002");      // lowest aggregate
    CHECK(parsed.value->basis_reference == "00003"); // next lowest, never the failed row
}

TEST_CASE("demo designer proposes the next unused markers for the base") {
    KernelRecord base;
    base.id = "00007";
    base.source = "// kernel body\n// OPT_3\n// OPT_7\n";

    DemoBackend demo;
    std::string response = demo.complete(request_for("designer", build_designer_prompt(base, {})));
    auto parsed = parse_design(response);
    REQUIRE_MESSAGE(parsed.ok(), parsed.error);
    // highest existing marker is OPT_7, so plans introduce OPT_8..OPT_12
    for (int j = 0; j < 5; ++j) {
        CHECK(parsed.value->plans[j].rubric.find("OPT_" + std::to_string(8 + j)) !=
              std::string::npos);
    }
    // scored so the deterministic pick takes the first three plans
    auto picks = pick_experiments(parsed.value->plans);
    CHECK(picks[0].ordinal == 1);
    CHECK(picks[1].ordinal == 2);
    CHECK(picks[2].ordinal == 3);
}

TEST_CASE("demo writer appends exactly the marker named by the rubric") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}, "// base kernel body\n"));

    ExperimentPlan plan = plan_with(5, 10, 50, 1);
    plan.rubric = "Append the marker token OPT_9 to the kernel source as a standalone "
                  "comment line, keeping the rest of the file unchanged.";
    WriterContext context = assemble_writer_context(
        SelectionDecision{"00001", "00001", "bootstrap"}, plan, store, {}, "task");

    DemoBackend demo;
    std::string response = demo.complete(request_for("writer", build_writer_prompt(context)));
    auto parsed = parse_kernel_output(response);
    REQUIRE_MESSAGE(parsed.ok(), parsed.error);
    CHECK(parsed.value->source.find("// base kernel body") != std::string::npos);
    CHECK(parsed.value->source.find("OPT_9") != std::string::npos);
    CHECK(parsed.value->technique_report.find("OPT_9") != std::string::npos);
}

TEST_CASE("demo digester condenses the raw document deterministically") {
    DemoBackend demo;
    std::string prompt = build_digester_prompt("line one\n\nline two\n", "the task", "notes");
    std::string first = demo.complete(request_for("digester", prompt));
    std::string second = demo.complete(request_for("digester", prompt));
    CHECK(first == second);
    CHECK(first.find("line one") != std::string::npos);
    CHECK(first.find("line two") != std::string::npos);
}

TEST_CASE("demo backend rejects unknown roles") {
    DemoBackend demo;
    CHECK_THROWS_AS((void)demo.complete(request_for("oracle", "hm")), TransportError);
}
