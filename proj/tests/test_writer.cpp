#include <doctest.h>

#include <future>

#include "helpers.hpp"
#include "writer_stage.hpp"

using namespace kevo;
using namespace kevo::test;

namespace {

SelectionDecision decision_for(const std::string& base, const std::string& reference) {
    return SelectionDecision{base, reference, "contrast the two best variants"};
}

} // namespace

TEST_CASE("assemble_writer_context pulls listings and analyses for both parents") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}, "// seed one\n"));
    store.add_record(seed_record(two_shapes(), {120, 120}, "// seed two\n"));

    WriterContext context = assemble_writer_context(
        decision_for("00001", "00002"), plan_with(5, 10, 50, 1), store, {}, "optimize the gemm");
    CHECK(context.base_listing == "// seed one\n");
    CHECK(context.reference_listing == "// seed two\n");
    CHECK(context.base_analysis.find("seed kernel, no prior experiment") != std::string::npos);
    CHECK(context.reference_analysis.find("00002") != std::string::npos);
    CHECK(context.task_description == "optimize the gemm");
}

TEST_CASE("single-seed bootstrap duplicates the listing for base and reference") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}, "// only seed\n"));

    WriterContext context = assemble_writer_context(
        decision_for("00001", "00001"), plan_with(5, 10, 50, 1), store, {}, "task");
    CHECK(context.base_listing == context.reference_listing);
    CHECK(context.base_id == context.reference_id);
}

TEST_CASE("assemble_writer_context propagates unknown ids") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}));
    CHECK_THROWS_AS((void)assemble_writer_context(decision_for("00001", "00009"),
                                                  plan_with(5, 10, 50, 1), store, {}, "task"),
                    Error);
}

TEST_CASE("writer prompt contains all context sections") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}, "// base body\n"));
    store.add_record(seed_record(two_shapes(), {120, 120}, "// reference body\n"));
    std::vector<KnowledgeDoc> docs{{"notes", "Hardware notes", "watch the LDS banks",
                                    KnowledgeDoc::Origin::manual, ""}};

    ExperimentPlan plan = plan_with(5, 10, 50, 2);
    plan.description = "try the wider loads";
    plan.rubric = "switch loads to 128-bit vectors";
    WriterContext context =
        assemble_writer_context(decision_for("00001", "00002"), plan, store, docs, "the task text");
    std::string prompt = build_writer_prompt(context);

    for (const char* needle :
         {"the task text", "Hardware notes", "watch the LDS banks", "// base body",
          "// reference body", "try the wider loads", "switch loads to 128-bit vectors",
          "### Base code (id 00001)", "### Reference code (id 00002)", "### Output format"})
        CHECK_MESSAGE(prompt.find(needle) != std::string::npos, needle);
}

TEST_CASE("parse_kernel_output extracts the block and the prose report") {
    auto parsed = parse_kernel_output(
        "Here is the kernel.\n\n```cpp\n__global__ void k() {}\n```\n\nI applied tiling.\n");
    REQUIRE(parsed.ok());
    CHECK(parsed.value->source == "__global__ void k() {}\n");
    CHECK(parsed.value->technique_report.find("I applied tiling.") != std::string::npos);
    CHECK(parsed.value->technique_report.find("Here is the kernel.") != std::string::npos);
}

TEST_CASE("with several fenced blocks the largest becomes the source") {
    auto parsed = parse_kernel_output(
        "A snippet first:\n```\nshort\n```\nNow the full file:\n"
        "```\nline one\nline two\nline three\n```\nReport: done.\n");
    REQUIRE(parsed.ok());
    CHECK(parsed.value->source == "line one\nline two\nline three\n");
}

TEST_CASE("prose-only responses fail to parse") {
    auto parsed = parse_kernel_output("I would rather describe the change in words.");
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error.find("fenced") != std::string::npos);
}

TEST_CASE("an empty source block fails to parse") {
    auto parsed = parse_kernel_output("```\n\n```\nreport text\n");
    REQUIRE_FALSE(parsed.ok());
}

TEST_CASE("a missing technique report fails to parse") {
    auto parsed = parse_kernel_output("```\nint main() {}\n```\n");
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.error.find("report") != std::string::npos);
}

TEST_CASE("write_kernel returns the candidate and records a transcript") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}));

    WriterContext context = assemble_writer_context(decision_for("00001", "00001"),
                                                    plan_with(5, 10, 50, 1), store, {}, "task");
    ScriptedGateway sg;
    sg.backend->push_response("```\n// new kernel\n```\nUsed the rubric.\n");
    KernelCandidate candidate = write_kernel(context, sg.gateway);
    CHECK(candidate.source == "// new kernel\n");
    CHECK(candidate.technique_report == "Used the rubric.");
    CHECK(sg.gateway.transcript_count() == 1);
}

TEST_CASE("three concurrent writers get responses attributed to their own plans") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}));

    ScriptedGateway sg;
    // responder keys on the rubric embedded in each prompt, so attribution is
    // content-based and scheduling-independent
    sg.backend->set_responder([](const ChatRequest& request) {
        std::string tag = "unknown";
        for (const char* t : {"alpha", "beta", "gamma"})
            if (request.prompt.find(std::string("rubric-") + t) != std::string::npos) tag = t;
        return "```\n// kernel-" + tag + "\n```\nreport for " + tag + "\n";
    });

    std::vector<std::future<KernelCandidate>> futures;
    for (const char* tag : {"alpha", "beta", "gamma"}) {
        ExperimentPlan plan = plan_with(5, 10, 50, 1);
        plan.rubric = std::string("apply rubric-") + tag;
        WriterContext context = assemble_writer_context(decision_for("00001", "00001"), plan,
                                                        store, {}, "task");
        futures.push_back(std::async(std::launch::async, [&sg, context] {
            return write_kernel(context, sg.gateway);
        }));
    }
    std::vector<KernelCandidate> candidates;
    for (auto& f : futures) candidates.push_back(f.get());
    CHECK(candidates[0].source == "// kernel-alpha\n");
    CHECK(candidates[1].source == "// kernel-beta\n");
    CHECK(candidates[2].source == "// kernel-gamma\n");
    CHECK(sg.gateway.transcript_count() == 3);
}

TEST_CASE("one writer failing all attempts does not disturb the others") {
    TempDir tmp;
    PopulationStore store(tmp.path / "population", two_shapes());
    store.add_record(seed_record(two_shapes(), {100, 100}));

    ScriptedGateway sg(/*max_attempts=*/2);
    sg.backend->set_responder([](const ChatRequest& request) -> std::string {
        if (request.prompt.find("rubric-poison") != std::string::npos)
            return "no code from me today";
        std::string tag =
            request.prompt.find("rubric-good-one") != std::string::npos ? "one" : "two";
        return "```\n// kernel-" + tag + "\n```\nreport " + tag + "\n";
    });

    auto run_one = [&](const std::string& rubric) {
        ExperimentPlan plan = plan_with(5, 10, 50, 1);
        plan.rubric = "apply " + rubric;
        WriterContext context = assemble_writer_context(decision_for("00001", "00001"), plan,
                                                        store, {}, "task");
        return std::async(std::launch::async, [&sg, context]() -> std::string {
            try {
                return write_kernel(context, sg.gateway).source;
            } catch (const Error& e) {
                return std::string("failed: ") + to_string(e.kind()).data();
            }
        });
    };

    auto a = run_one("rubric-good-one");
    auto b = run_one("rubric-poison");
    auto c = run_one("rubric-good-two");
    CHECK(a.get() == "// kernel-one\n");
    CHECK(b.get().find("parse-exhausted") != std::string::npos);
    CHECK(c.get() == "// kernel-two\n");
}

TEST_CASE("write_kernel refuses incomplete contexts") {
    WriterContext context;
    context.task_description = "task";
    context.base_listing = "// base\n";
    context.reference_listing = "// ref\n";
    context.base_analysis = "analysis";
    context.reference_analysis = ""; // missing
    context.plan = plan_with(1, 2, 3, 1);
    ScriptedGateway sg;
    CHECK_THROWS_AS((void)write_kernel(context, sg.gateway), Error);
}
