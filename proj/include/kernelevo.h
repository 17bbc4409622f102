/* kernelevo: LLM-driven evolutionary GPU kernel optimization loop.
 *
 * C interface to the engine. All functions are synchronous; an engine handle
 * must only be used from one thread at a time. Strings returned through
 * `char**` out-parameters are heap-allocated and must be released with
 * kevo_string_free(). Error details for a failed call are available via
 * kevo_engine_last_error() until the next call on the same handle.
 */
#ifndef KERNELEVO_H
#define KERNELEVO_H

#include <stddef.h>

#if defined(_WIN32)
#define KEVO_API __declspec(dllexport)
#else
#define KEVO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct kevo_engine kevo_engine;

typedef enum kevo_status {
    KEVO_OK = 0,
    KEVO_ERR_USAGE = 1,   /* malformed arguments to an API call */
    KEVO_ERR_CONFIG = 2,  /* invalid or unreadable configuration */
    KEVO_ERR_STATE = 3,   /* operation not valid for the current workspace state */
    KEVO_ERR_RUNTIME = 4, /* stage, evaluator or storage failure */
} kevo_status;

KEVO_API const char* kevo_version(void);

/* Loads the config file, prepares the workspace (created if missing) and
 * returns a handle. `workspace_override` may be NULL to use the config's
 * workspace path. On failure *out_error (if non-NULL) receives a message to
 * free with kevo_string_free(). */
KEVO_API kevo_status kevo_engine_open(const char* config_path, const char* workspace_override,
                                      kevo_engine** out_engine, char** out_error);

KEVO_API void kevo_engine_close(kevo_engine* engine);

/* Message for the most recent failed call on this handle; owned by the
 * engine, valid until the next API call. */
KEVO_API const char* kevo_engine_last_error(const kevo_engine* engine);

/* Benchmarks each seed source file sequentially and adds it to the
 * population. Pass count == 0 to use the config's seed_source list. */
KEVO_API kevo_status kevo_engine_seed(kevo_engine* engine, const char* const* source_paths,
                                      size_t count, char** out_report);

/* Runs `generations` more generations. 0 reports the current state without
 * running anything; a negative value uses the config's max_generations. */
KEVO_API kevo_status kevo_engine_run(kevo_engine* engine, int generations, char** out_report);

KEVO_API kevo_status kevo_engine_status_text(kevo_engine* engine, char** out_text);

/* Writes the best kernel, its lineage chain, and all generation logs. */
KEVO_API kevo_status kevo_engine_export(kevo_engine* engine, const char* out_dir);

/* Stores a curated findings document as-is. `title` may be NULL (file stem). */
KEVO_API kevo_status kevo_engine_add_doc(kevo_engine* engine, const char* path,
                                         const char* title, char** out_doc_id);

/* Digests a raw reference document through the LLM before storing it. */
KEVO_API kevo_status kevo_engine_digest_doc(kevo_engine* engine, const char* path,
                                            char** out_doc_id);

KEVO_API void kevo_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* KERNELEVO_H */
