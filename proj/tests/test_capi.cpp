// Exercises the shared library the way an external consumer would: through
// include/kernelevo.h only, no internal headers.

#include <doctest.h>

#include <kernelevo.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path root;

    Workspace() {
        std::string tmpl = (fs::temp_directory_path() / "kevo-capi-XXXXXX").string();
        std::string buf = tmpl;
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        root = buf;
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
};

void put(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

fs::path write_demo_config(const fs::path& root) {
    put(root / "task.md", "Optimize the benchmark kernel.\n");
    put(root / "seeds" / "one.kernel", "// seed kernel one\n");
    put(root / "seeds" / "two.kernel", "// seed kernel two\n");

    std::string cfg =
        "workspace: workspace\n"
        "task_description_path: task.md\n"
        "seed_source: seeds/one.kernel\n"
        "seed_source: seeds/two.kernel\n"
        "max_generations: 2\n"
        "llm.backend: demo\n"
        "role.selector.model: demo-fast\n"
        "role.designer.model: demo-strong\n"
        "role.writer.model: demo-strong\n"
        "role.digester.model: demo-fast\n"
        "evaluator.kind: mock\n"
        "shape: 256 256 256\n"
        "shape: 512 256 128\n";
    for (int i = 1; i <= 12; ++i)
        cfg += "evaluator.marker.OPT_" + std::to_string(i) + ": 0.93\n";
    put(root / "kernelevo.cfg", cfg);
    return root / "kernelevo.cfg";
}

struct Owned {
    char* s = nullptr;
    ~Owned() { kevo_string_free(s); }
};

} // namespace

TEST_CASE("version is a nonempty string") {
    REQUIRE(kevo_version() != nullptr);
    CHECK(std::string(kevo_version()).size() > 0);
}

TEST_CASE("opening a missing config reports KEVO_ERR_CONFIG with a message") {
    kevo_engine* engine = nullptr;
    Owned error;
    kevo_status status = kevo_engine_open("/nonexistent/kernelevo.cfg", nullptr, &engine, &error.s);
    CHECK(status == KEVO_ERR_CONFIG);
    CHECK(engine == nullptr);
    REQUIRE(error.s != nullptr);
    CHECK(std::string(error.s).find("config") != std::string::npos);
}

TEST_CASE("null arguments are usage errors") {
    CHECK(kevo_engine_open(nullptr, nullptr, nullptr, nullptr) == KEVO_ERR_USAGE);
    CHECK(kevo_engine_seed(nullptr, nullptr, 0, nullptr) == KEVO_ERR_USAGE);
    kevo_engine_close(nullptr); // must be a safe no-op
}

TEST_CASE("full lifecycle: open, seed, run, status, export, docs") {
    Workspace ws;
    fs::path config = write_demo_config(ws.root);

    kevo_engine* engine = nullptr;
    Owned open_error;
    REQUIRE(kevo_engine_open(config.string().c_str(), nullptr, &engine, &open_error.s) == KEVO_OK);
    REQUIRE(engine != nullptr);

    // status before seeding: a state error with a useful message
    {
        Owned text;
        CHECK(kevo_engine_status_text(engine, &text.s) == KEVO_ERR_STATE);
        CHECK(std::string(kevo_engine_last_error(engine)).find("empty") != std::string::npos);
    }

    // seed from explicit paths
    {
        std::string one = (ws.root / "seeds" / "one.kernel").string();
        std::string two = (ws.root / "seeds" / "two.kernel").string();
        const char* paths[] = {one.c_str(), two.c_str()};
        Owned report;
        REQUIRE(kevo_engine_seed(engine, paths, 2, &report.s) == KEVO_OK);
        REQUIRE(report.s != nullptr);
        CHECK(std::string(report.s).find("00001 seed") != std::string::npos);
        CHECK(std::string(report.s).find("00002 seed") != std::string::npos);
    }

    // count == 0 falls back to the config's seed_source list
    {
        Owned report;
        REQUIRE(kevo_engine_seed(engine, nullptr, 0, &report.s) == KEVO_OK);
        CHECK(std::string(report.s).find("00004 seed") != std::string::npos);
    }

    // run two generations with the offline demo backend
    {
        Owned report;
        REQUIRE(kevo_engine_run(engine, 2, &report.s) == KEVO_OK);
        std::string text(report.s);
        CHECK(text.find("generation 1") != std::string::npos);
        CHECK(text.find("generation 2") != std::string::npos);
        CHECK(text.find("best:") != std::string::npos);
    }

    // negative count uses config max_generations (2 more here)
    {
        Owned report;
        REQUIRE(kevo_engine_run(engine, -1, &report.s) == KEVO_OK);
        CHECK(std::string(report.s).find("generation 4") != std::string::npos);
    }

    {
        Owned text;
        REQUIRE(kevo_engine_status_text(engine, &text.s) == KEVO_OK);
        std::string status(text.s);
        CHECK(status.find("00001") != std::string::npos);
        CHECK(status.find("aggregate") != std::string::npos);
        CHECK(status.find("best:") != std::string::npos);
    }

    {
        fs::path out = ws.root / "export";
        REQUIRE(kevo_engine_export(engine, out.string().c_str()) == KEVO_OK);
        CHECK(fs::exists(out));
        bool any_best = false;
        for (const auto& e : fs::directory_iterator(out))
            if (e.path().filename().string().rfind("best-", 0) == 0) any_best = true;
        CHECK(any_best);
    }

    {
        put(ws.root / "notes.md", "Always align LDS tiles to 128 bytes.\n");
        Owned doc_id;
        REQUIRE(kevo_engine_add_doc(engine, (ws.root / "notes.md").string().c_str(), "alignment",
                                    &doc_id.s) == KEVO_OK);
        CHECK(std::string(doc_id.s) == "alignment");

        Owned digest_id;
        REQUIRE(kevo_engine_digest_doc(engine, (ws.root / "notes.md").string().c_str(),
                                       &digest_id.s) == KEVO_OK);
        CHECK(std::string(digest_id.s) == "notes");
    }

    // unreadable seed path surfaces as a runtime error with last_error set
    {
        const char* paths[] = {"/does/not/exist.kernel"};
        Owned report;
        CHECK(kevo_engine_seed(engine, paths, 1, &report.s) == KEVO_ERR_RUNTIME);
        CHECK(std::string(kevo_engine_last_error(engine)).find("exist.kernel") !=
              std::string::npos);
    }

    kevo_engine_close(engine);
}

TEST_CASE("a reopened workspace resumes from persisted state") {
    Workspace ws;
    fs::path config = write_demo_config(ws.root);

    kevo_engine* first = nullptr;
    REQUIRE(kevo_engine_open(config.string().c_str(), nullptr, &first, nullptr) == KEVO_OK);
    REQUIRE(kevo_engine_seed(first, nullptr, 0, nullptr) == KEVO_OK);
    REQUIRE(kevo_engine_run(first, 1, nullptr) == KEVO_OK);
    kevo_engine_close(first);

    kevo_engine* second = nullptr;
    REQUIRE(kevo_engine_open(config.string().c_str(), nullptr, &second, nullptr) == KEVO_OK);
    Owned report;
    REQUIRE(kevo_engine_run(second, 1, &report.s) == KEVO_OK);
    CHECK(std::string(report.s).find("generation 2") != std::string::npos);
    kevo_engine_close(second);
}
