#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "http_backend.hpp"
#include "llm_gateway.hpp"

namespace kevo {

// Everything a run needs, loaded from one kvdoc-format config file and
// validated up front; a run refuses to start on any invalid field.
//
//   workspace: runs/demo
//   task_description_path: task.md
//   seed_source: seeds/a.kernel          (repeatable)
//   max_generations: 10
//   context_byte_budget: 65536
//   llm.backend: demo | http
//   llm.endpoint: http://host:port/v1/chat/completions
//   llm.api_key_env: KERNELEVO_API_KEY
//   llm.retry_backoff_ms: 250
//   role.selector.model: some-model-id   (selector, designer, writer, digester)
//   role.selector.temperature: 0.7
//   role.selector.max_attempts: 3
//   evaluator.kind: mock | external_command
//   evaluator.command: /opt/harness/submit {source_path} {shapes_path}
//   evaluator.timeout_s: 600
//   evaluator.marker.<TOKEN>: <factor>   (mock factor table, repeatable)
//   shape: 6144 512 4096                 (repeatable, ordered)
struct RunConfig {
    std::filesystem::path workspace;
    std::filesystem::path task_description_path;
    std::string task_description; // loaded file content
    std::vector<std::filesystem::path> seed_sources;
    int max_generations = 1;
    std::size_t context_byte_budget = 64 * 1024;

    std::string backend = "demo"; // "demo" | "http"
    HttpBackendConfig http;
    int retry_backoff_ms = 250;
    std::map<std::string, RoleConfig> roles;

    EvaluatorConfig evaluator;

    static RunConfig load(const std::filesystem::path& config_path,
                          const std::filesystem::path& workspace_override = {});
};

inline constexpr const char* kRoleNames[] = {"selector", "designer", "writer", "digester"};

} // namespace kevo
