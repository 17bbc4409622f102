// kernelevo CLI: seed, run, inspect and export an optimization workspace.
// Deliberately a thin shell over the C API in include/kernelevo.h.

#include <kernelevo.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;   // usage or config error
constexpr int kExitRuntime = 3; // fatal runtime error

int exit_code_for(kevo_status status) {
    switch (status) {
    case KEVO_OK: return kExitOk;
    case KEVO_ERR_USAGE:
    case KEVO_ERR_CONFIG: return kExitUsage;
    default: return kExitRuntime;
    }
}

struct EngineHandle {
    kevo_engine* engine = nullptr;
    ~EngineHandle() { kevo_engine_close(engine); }
};

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { kevo_string_free(value); }
};

int open_engine(const std::string& config, const std::string& workspace, EngineHandle& handle) {
    OwnedString error;
    kevo_status status = kevo_engine_open(config.c_str(),
                                          workspace.empty() ? nullptr : workspace.c_str(),
                                          &handle.engine, &error.value);
    if (status != KEVO_OK) {
        std::fprintf(stderr, "kernelevo: %s\n", error.value ? error.value : "failed to open engine");
        return exit_code_for(status);
    }
    return kExitOk;
}

int report(kevo_engine* engine, kevo_status status, const OwnedString& text) {
    if (status != KEVO_OK) {
        std::fprintf(stderr, "kernelevo: %s\n", kevo_engine_last_error(engine));
        return exit_code_for(status);
    }
    if (text.value && *text.value) std::fputs(text.value, stdout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-driven evolutionary GPU kernel optimization loop"};
    app.require_subcommand(1);

    std::string config_path = "kernelevo.cfg";
    std::string workspace;
    app.add_option("-c,--config", config_path, "Run configuration file")
        ->capture_default_str();
    app.add_option("-w,--workspace", workspace, "Workspace directory (overrides the config)");

    auto* seed_cmd = app.add_subcommand("seed", "Benchmark and store seed kernels");
    std::vector<std::string> seed_paths;
    seed_cmd->add_option("sources", seed_paths,
                         "Seed kernel source files (default: the config's seed_source list)");

    auto* run_cmd = app.add_subcommand("run", "Run optimization generations");
    int generations = -1;
    run_cmd->add_option("-g,--generations", generations,
                        "How many more generations to run (default: config max_generations)");

    auto* status_cmd = app.add_subcommand("status", "Print the population summary table");

    auto* export_cmd = app.add_subcommand("export", "Export best kernel, lineage and logs");
    std::string export_dir;
    export_cmd->add_option("dir", export_dir, "Output directory")->required();

    auto* digest_cmd = app.add_subcommand("digest-doc", "Digest a raw reference document via the LLM");
    std::string digest_path;
    digest_cmd->add_option("path", digest_path, "Raw document to digest")->required();

    auto* add_cmd = app.add_subcommand("add-doc", "Store a curated findings document as-is");
    std::string add_path, add_title;
    add_cmd->add_option("path", add_path, "Document file")->required();
    add_cmd->add_option("--title", add_title, "Document title (default: file stem)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    EngineHandle handle;
    if (int rc = open_engine(config_path, workspace, handle); rc != kExitOk) return rc;

    if (seed_cmd->parsed()) {
        std::vector<const char*> paths;
        for (const auto& p : seed_paths) paths.push_back(p.c_str());
        OwnedString out;
        kevo_status status =
            kevo_engine_seed(handle.engine, paths.data(), paths.size(), &out.value);
        return report(handle.engine, status, out);
    }
    if (run_cmd->parsed()) {
        OwnedString out;
        kevo_status status = kevo_engine_run(handle.engine, generations, &out.value);
        return report(handle.engine, status, out);
    }
    if (status_cmd->parsed()) {
        OwnedString out;
        kevo_status status = kevo_engine_status_text(handle.engine, &out.value);
        return report(handle.engine, status, out);
    }
    if (export_cmd->parsed()) {
        OwnedString none;
        kevo_status status = kevo_engine_export(handle.engine, export_dir.c_str());
        if (status == KEVO_OK) std::printf("exported to %s\n", export_dir.c_str());
        return report(handle.engine, status, none);
    }
    if (digest_cmd->parsed()) {
        OwnedString doc_id;
        kevo_status status = kevo_engine_digest_doc(handle.engine, digest_path.c_str(), &doc_id.value);
        if (status == KEVO_OK) std::printf("stored digested doc %s\n", doc_id.value);
        OwnedString none;
        return report(handle.engine, status, none);
    }
    if (add_cmd->parsed()) {
        OwnedString doc_id;
        kevo_status status = kevo_engine_add_doc(handle.engine, add_path.c_str(),
                                                 add_title.empty() ? nullptr : add_title.c_str(),
                                                 &doc_id.value);
        if (status == KEVO_OK) std::printf("stored doc %s\n", doc_id.value);
        OwnedString none;
        return report(handle.engine, status, none);
    }
    return kExitUsage;
}
