#include "run_config.hpp"

#include "errors.hpp"
#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

double to_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (trim(value.substr(used)).empty() == false) throw std::invalid_argument(key);
        return v;
    } catch (...) {
        fail(ErrorKind::config, "config field " + key + " is not a number: '" + value + "'");
    }
}

long long to_int(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (trim(value.substr(used)).empty() == false) throw std::invalid_argument(key);
        return v;
    } catch (...) {
        fail(ErrorKind::config, "config field " + key + " is not an integer: '" + value + "'");
    }
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& config_path,
                          const std::filesystem::path& workspace_override) {
    if (!std::filesystem::exists(config_path))
        fail(ErrorKind::config, "config file not found: " + config_path.string());
    kvdoc::Doc doc = kvdoc::parse(read_file(config_path));
    std::filesystem::path base_dir = config_path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    RunConfig cfg;
    cfg.workspace = !workspace_override.empty()
                        ? workspace_override
                        : resolve(doc.get_or("workspace", "workspace"));

    std::string task_path = doc.get_or("task_description_path", "");
    if (task_path.empty()) fail(ErrorKind::config, "task_description_path is required");
    cfg.task_description_path = resolve(task_path);
    if (!std::filesystem::exists(cfg.task_description_path))
        fail(ErrorKind::config,
             "task description file not found: " + cfg.task_description_path.string());
    cfg.task_description = read_file(cfg.task_description_path);
    if (trim(cfg.task_description).empty())
        fail(ErrorKind::config, "task description file is empty");

    for (const auto& seed : doc.get_all("seed_source")) cfg.seed_sources.push_back(resolve(seed));

    cfg.max_generations = static_cast<int>(to_int(doc.get_or("max_generations", "1"), "max_generations"));
    if (cfg.max_generations < 0) fail(ErrorKind::config, "max_generations must be >= 0");
    long long budget = to_int(doc.get_or("context_byte_budget", "65536"), "context_byte_budget");
    if (budget <= 0) fail(ErrorKind::config, "context_byte_budget must be positive");
    cfg.context_byte_budget = static_cast<std::size_t>(budget);

    cfg.backend = doc.get_or("llm.backend", "demo");
    if (cfg.backend != "demo" && cfg.backend != "http")
        fail(ErrorKind::config, "llm.backend must be 'demo' or 'http', got '" + cfg.backend + "'");
    cfg.http.endpoint_url = doc.get_or("llm.endpoint", "");
    cfg.http.api_key_env = doc.get_or("llm.api_key_env", "KERNELEVO_API_KEY");
    cfg.http.timeout_s = static_cast<int>(to_int(doc.get_or("llm.timeout_s", "120"), "llm.timeout_s"));
    if (cfg.backend == "http" && cfg.http.endpoint_url.empty())
        fail(ErrorKind::config, "llm.endpoint is required for the http backend");
    cfg.retry_backoff_ms =
        static_cast<int>(to_int(doc.get_or("llm.retry_backoff_ms", "250"), "llm.retry_backoff_ms"));
    if (cfg.retry_backoff_ms < 0) fail(ErrorKind::config, "llm.retry_backoff_ms must be >= 0");

    for (const char* role : kRoleNames) {
        std::string prefix = std::string("role.") + role + ".";
        RoleConfig rc;
        rc.model_id = doc.get_or(prefix + "model", "");
        if (rc.model_id.empty())
            fail(ErrorKind::config, "missing model for role: " + prefix + "model");
        rc.temperature = to_double(doc.get_or(prefix + "temperature", "0.7"), prefix + "temperature");
        if (rc.temperature < 0.0 || rc.temperature > 2.0)
            fail(ErrorKind::config, prefix + "temperature must be in [0, 2]");
        rc.max_attempts =
            static_cast<int>(to_int(doc.get_or(prefix + "max_attempts", "3"), prefix + "max_attempts"));
        if (rc.max_attempts < 1) fail(ErrorKind::config, prefix + "max_attempts must be >= 1");
        cfg.roles[role] = rc;
    }

    std::string kind = doc.get_or("evaluator.kind", "mock");
    if (kind == "mock") cfg.evaluator.kind = EvaluatorKind::mock;
    else if (kind == "external_command") cfg.evaluator.kind = EvaluatorKind::external_command;
    else fail(ErrorKind::config, "evaluator.kind must be 'mock' or 'external_command'");
    cfg.evaluator.command_template = doc.get_or("evaluator.command", "");
    if (cfg.evaluator.kind == EvaluatorKind::external_command &&
        trim(cfg.evaluator.command_template).empty())
        fail(ErrorKind::config, "evaluator.command is required for external_command evaluators");
    cfg.evaluator.timeout_s = to_double(doc.get_or("evaluator.timeout_s", "600"), "evaluator.timeout_s");
    if (cfg.evaluator.timeout_s <= 0.0) fail(ErrorKind::config, "evaluator.timeout_s must be positive");
    cfg.evaluator.mock_latency_s =
        to_double(doc.get_or("evaluator.mock_latency_s", "0"), "evaluator.mock_latency_s");

    for (const auto& entry : doc.entries) {
        constexpr std::string_view marker_prefix = "evaluator.marker.";
        if (entry.key.size() > marker_prefix.size() &&
            entry.key.compare(0, marker_prefix.size(), marker_prefix) == 0) {
            MarkerFactor m;
            m.token = entry.key.substr(marker_prefix.size());
            m.factor = to_double(entry.value, entry.key);
            if (m.factor <= 0.0) fail(ErrorKind::config, "marker factor must be positive: " + entry.key);
            cfg.evaluator.markers.push_back(std::move(m));
        }
    }

    for (const auto& shape_line : doc.get_all("shape")) {
        auto tok = split_ws(shape_line);
        if (tok.size() != 3)
            fail(ErrorKind::config, "shape entries need exactly three dimensions: '" + shape_line + "'");
        BenchmarkShape s;
        s.m = to_int(std::string(tok[0]), "shape.m");
        s.k = to_int(std::string(tok[1]), "shape.k");
        s.n = to_int(std::string(tok[2]), "shape.n");
        if (!s.valid()) fail(ErrorKind::config, "shape dimensions must be >= 1: '" + shape_line + "'");
        cfg.evaluator.shapes.push_back(s);
    }
    if (cfg.evaluator.shapes.empty())
        fail(ErrorKind::config, "at least one 'shape: m k n' entry is required");

    return cfg;
}

} // namespace kevo
