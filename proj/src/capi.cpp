#include "kernelevo.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "orchestrator.hpp"
#include "run_config.hpp"
#include "text_util.hpp"

struct kevo_engine {
    std::unique_ptr<kevo::Engine> engine;
    std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

kevo_status status_from(kevo::ErrorKind kind) {
    using kevo::ErrorKind;
    switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::precondition:
    case ErrorKind::wrong_count:
        return KEVO_ERR_USAGE;
    case ErrorKind::config:
        return KEVO_ERR_CONFIG;
    case ErrorKind::empty_population:
    case ErrorKind::no_scored_records:
    case ErrorKind::duplicate_id:
    case ErrorKind::unknown_id:
    case ErrorKind::unknown_parent:
        return KEVO_ERR_STATE;
    default:
        return KEVO_ERR_RUNTIME;
    }
}

template <class Fn>
kevo_status guarded(kevo_engine* engine, Fn&& fn) {
    if (!engine) return KEVO_ERR_USAGE;
    engine->last_error.clear();
    try {
        fn();
        return KEVO_OK;
    } catch (const kevo::Error& e) {
        engine->last_error = e.what();
        return status_from(e.kind());
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        return KEVO_ERR_RUNTIME;
    }
}

void set_out(char** out, const std::string& value) {
    if (out) *out = dup_string(value);
}

} // namespace

extern "C" {

const char* kevo_version(void) {
    return "0.1.0";
}

kevo_status kevo_engine_open(const char* config_path, const char* workspace_override,
                             kevo_engine** out_engine, char** out_error) {
    if (out_error) *out_error = nullptr;
    if (!config_path || !out_engine) {
        if (out_error) *out_error = dup_string("config_path and out_engine are required");
        return KEVO_ERR_USAGE;
    }
    *out_engine = nullptr;
    try {
        kevo::RunConfig config = kevo::RunConfig::load(
            config_path, workspace_override ? std::filesystem::path(workspace_override)
                                            : std::filesystem::path{});
        auto handle = std::make_unique<kevo_engine>();
        handle->engine = std::make_unique<kevo::Engine>(std::move(config));
        *out_engine = handle.release();
        return KEVO_OK;
    } catch (const kevo::Error& e) {
        if (out_error) *out_error = dup_string(e.what());
        return status_from(e.kind());
    } catch (const std::exception& e) {
        if (out_error) *out_error = dup_string(e.what());
        return KEVO_ERR_RUNTIME;
    }
}

void kevo_engine_close(kevo_engine* engine) {
    delete engine;
}

const char* kevo_engine_last_error(const kevo_engine* engine) {
    return engine ? engine->last_error.c_str() : "null engine handle";
}

kevo_status kevo_engine_seed(kevo_engine* engine, const char* const* source_paths, size_t count,
                             char** out_report) {
    return guarded(engine, [&] {
        std::vector<std::filesystem::path> paths;
        for (size_t i = 0; i < count; ++i) {
            if (!source_paths || !source_paths[i])
                kevo::fail(kevo::ErrorKind::usage, "null source path");
            paths.emplace_back(source_paths[i]);
        }
        if (paths.empty()) paths = engine->engine->config().seed_sources;
        std::vector<std::string> ids = engine->engine->seed_files(paths);
        std::ostringstream report;
        for (const auto& id : ids) {
            const auto& record = engine->engine->population().record(id);
            report << id << " " << kevo::to_string(record.status) << "\n";
        }
        set_out(out_report, report.str());
    });
}

kevo_status kevo_engine_run(kevo_engine* engine, int generations, char** out_report) {
    return guarded(engine, [&] {
        int n = generations < 0 ? engine->engine->config().max_generations : generations;
        auto summary = engine->engine->run(n);
        set_out(out_report, summary.text);
    });
}

kevo_status kevo_engine_status_text(kevo_engine* engine, char** out_text) {
    return guarded(engine, [&] { set_out(out_text, engine->engine->status_text()); });
}

kevo_status kevo_engine_export(kevo_engine* engine, const char* out_dir) {
    return guarded(engine, [&] {
        if (!out_dir) kevo::fail(kevo::ErrorKind::usage, "out_dir is required");
        engine->engine->export_artifacts(out_dir);
    });
}

kevo_status kevo_engine_add_doc(kevo_engine* engine, const char* path, const char* title,
                                char** out_doc_id) {
    return guarded(engine, [&] {
        if (!path) kevo::fail(kevo::ErrorKind::usage, "path is required");
        auto doc = engine->engine->add_doc(path, title ? title : "");
        set_out(out_doc_id, doc.doc_id);
    });
}

kevo_status kevo_engine_digest_doc(kevo_engine* engine, const char* path, char** out_doc_id) {
    return guarded(engine, [&] {
        if (!path) kevo::fail(kevo::ErrorKind::usage, "path is required");
        auto doc = engine->engine->digest_doc(path);
        set_out(out_doc_id, doc.doc_id);
    });
}

void kevo_string_free(char* s) {
    std::free(s);
}

} // extern "C"
