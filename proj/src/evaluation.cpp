#include "evaluation.hpp"

#include <sys/types.h>
#include <sys/wait.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "errors.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

// Ticket lock: grants entry strictly in arrival order, unlike a bare mutex.
class FifoGate {
public:
    void lock() {
        std::unique_lock lock(mutex_);
        const std::uint64_t ticket = next_ticket_++;
        cv_.wait(lock, [&] { return ticket == now_serving_; });
    }
    void unlock() {
        std::lock_guard lock(mutex_);
        ++now_serving_;
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t now_serving_ = 0;
};

FifoGate& submission_gate() {
    static FifoGate gate;
    return gate;
}

void validate(const EvaluatorConfig& config) {
    if (config.shapes.empty()) fail(ErrorKind::config, "evaluator needs a nonempty shape list");
    for (const auto& s : config.shapes)
        if (!s.valid()) fail(ErrorKind::config, "benchmark shape dimensions must be >= 1");
    if (config.timeout_s <= 0.0) fail(ErrorKind::config, "evaluator timeout must be positive");
    if (config.kind == EvaluatorKind::external_command && trim(config.command_template).empty())
        fail(ErrorKind::config, "external evaluator needs a command template");
}

std::string substitute(std::string text, std::string_view placeholder, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string output; // combined stdout+stderr
};

CommandResult run_with_timeout(const std::string& command, const std::filesystem::path& cwd,
                               double timeout_s) {
    std::filesystem::path log_path = cwd / "command.log";
    pid_t pid = fork();
    if (pid < 0) fail(ErrorKind::eval_failure, std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        if (chdir(cwd.c_str()) != 0) _exit(127);
        setpgid(0, 0);
        FILE* log = std::fopen(log_path.c_str(), "w");
        if (log) {
            dup2(fileno(log), STDOUT_FILENO);
            dup2(fileno(log), STDERR_FILENO);
        }
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    CommandResult result;
    const auto deadline =
        std::chrono::steady_clock::now() +
        std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    int status = 0;
    for (;;) {
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0) fail(ErrorKind::eval_failure, std::string("waitpid failed: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
    if (std::filesystem::exists(log_path)) result.output = read_file(log_path);
    return result;
}

std::filesystem::path make_scratch(const std::filesystem::path& configured) {
    std::filesystem::path root =
        configured.empty() ? std::filesystem::temp_directory_path() : configured;
    ensure_dir(root);
    std::string tmpl = (root / "kevo-eval-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data()))
        fail(ErrorKind::eval_failure, std::string("mkdtemp failed: ") + std::strerror(errno));
    return std::filesystem::path(buf.data());
}

EvalOutcome parse_result_file(const std::string& text, const EvaluatorConfig& config) {
    std::vector<BenchmarkEntry> entries;
    for (auto line : split_lines(text)) {
        if (trim(line).empty()) continue;
        auto tok = split_ws(line);
        if (tok.size() != 5) {
            EvalOutcome out;
            out.kind = EvalOutcome::Kind::eval_error;
            out.detail = "unparseable result line: " + std::string(line);
            return out;
        }
        BenchmarkEntry e;
        try {
            e.shape.m = std::stoll(std::string(tok[0]));
            e.shape.k = std::stoll(std::string(tok[1]));
            e.shape.n = std::stoll(std::string(tok[2]));
            e.mean_time_us = std::stod(std::string(tok[3]));
        } catch (...) {
            EvalOutcome out;
            out.kind = EvalOutcome::Kind::eval_error;
            out.detail = "non-numeric result line: " + std::string(line);
            return out;
        }
        e.correct = tok[4] == "1" || tok[4] == "true" || tok[4] == "ok";
        entries.push_back(e);
    }

    if (entries.size() != config.shapes.size()) {
        EvalOutcome out;
        out.kind = EvalOutcome::Kind::eval_error;
        out.detail = "result file covers " + std::to_string(entries.size()) + " shapes, expected " +
                     std::to_string(config.shapes.size());
        return out;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].shape == config.shapes[i])) {
            EvalOutcome out;
            out.kind = EvalOutcome::Kind::eval_error;
            out.detail = "result row " + std::to_string(i + 1) + " is shape " +
                         entries[i].shape.label() + ", expected " + config.shapes[i].label();
            return out;
        }
        if (entries[i].mean_time_us <= 0.0) {
            EvalOutcome out;
            out.kind = EvalOutcome::Kind::eval_error;
            out.detail = "non-positive timing for shape " + entries[i].shape.label();
            return out;
        }
    }

    std::string incorrect_detail;
    for (const auto& e : entries) {
        if (!e.correct) incorrect_detail += e.shape.label() + ": incorrect result\n";
    }
    EvalOutcome out;
    if (!incorrect_detail.empty()) {
        out.kind = EvalOutcome::Kind::incorrect;
        out.detail = incorrect_detail;
        return out;
    }
    out.kind = EvalOutcome::Kind::report;
    out.report.entries = std::move(entries);
    out.report.evaluated_at = now_iso8601_utc();
    return out;
}

EvalOutcome evaluate_external(const std::string& source, const EvaluatorConfig& config) {
    std::filesystem::path scratch = make_scratch(config.scratch_dir);
    struct Cleanup {
        std::filesystem::path dir;
        ~Cleanup() {
            std::error_code ec;
            std::filesystem::remove_all(dir, ec);
        }
    } cleanup{scratch};

    std::filesystem::path source_path = scratch / "source.kernel";
    std::filesystem::path shapes_path = scratch / "shapes.txt";
    std::filesystem::path result_path = scratch / "result.txt";
    write_file(source_path, source);
    std::string shapes_text;
    for (const auto& s : config.shapes) {
        shapes_text += std::to_string(s.m) + " " + std::to_string(s.k) + " " +
                       std::to_string(s.n) + "\n";
    }
    write_file(shapes_path, shapes_text);

    std::string command = config.command_template;
    command = substitute(command, "{source_path}", source_path.string());
    command = substitute(command, "{shapes_path}", shapes_path.string());
    command = substitute(command, "{result_path}", result_path.string());

    CommandResult run = run_with_timeout(command, scratch, config.timeout_s);

    EvalOutcome out;
    if (run.timed_out) {
        out.kind = EvalOutcome::Kind::eval_error;
        out.detail = "evaluation timed out after " + format_double(config.timeout_s, 1) + " s";
        return out;
    }
    if (run.exit_code != 0) {
        out.kind = EvalOutcome::Kind::build_failed;
        out.detail = "command exited with code " + std::to_string(run.exit_code) + "\n" + run.output;
        return out;
    }
    if (!std::filesystem::exists(result_path)) {
        out.kind = EvalOutcome::Kind::eval_error;
        out.detail = "command exited 0 but left no result.txt\n" + run.output;
        return out;
    }
    return parse_result_file(read_file(result_path), config);
}

EvalOutcome evaluate_mock(const std::string& source, const EvaluatorConfig& config) {
    if (config.mock_latency_s > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double>(config.mock_latency_s));

    EvalOutcome out;
    if (source.find(kMockBuildFailToken) != std::string::npos) {
        out.kind = EvalOutcome::Kind::build_failed;
        out.detail = "mock: source contains the BUILD_FAIL token";
        return out;
    }
    if (source.find(kMockEvalErrorToken) != std::string::npos) {
        out.kind = EvalOutcome::Kind::eval_error;
        out.detail = "mock: source contains the EVAL_ERROR token";
        return out;
    }
    if (source.find(kMockIncorrectToken) != std::string::npos) {
        out.kind = EvalOutcome::Kind::incorrect;
        for (const auto& s : config.shapes) out.detail += s.label() + ": incorrect result\n";
        return out;
    }
    out.kind = EvalOutcome::Kind::report;
    for (const auto& s : config.shapes) {
        BenchmarkEntry e;
        e.shape = s;
        e.mean_time_us = mock_timing(source, s, config.markers);
        e.correct = true;
        out.report.entries.push_back(e);
    }
    out.report.evaluated_at = now_iso8601_utc();
    return out;
}

} // namespace

double mock_timing(std::string_view source, const BenchmarkShape& shape,
                   const std::vector<MarkerFactor>& markers) {
    double base = std::sqrt(static_cast<double>(shape.m) * static_cast<double>(shape.k) *
                            static_cast<double>(shape.n));
    double factor = 1.0;
    for (const auto& m : markers) {
        if (!m.token.empty() && source.find(m.token) != std::string_view::npos)
            factor *= m.factor;
    }
    return base * factor;
}

std::string EvalOutcome::summary() const {
    switch (kind) {
    case Kind::report: {
        std::ostringstream out;
        out << "report";
        for (const auto& e : report.entries) out << ' ' << format_double(e.mean_time_us, 1);
        return out.str();
    }
    case Kind::build_failed: return "build_failed";
    case Kind::incorrect: return "incorrect";
    case Kind::eval_error: return "eval_error";
    }
    return "eval_error";
}

RecordStatus EvalOutcome::record_status() const {
    switch (kind) {
    case Kind::report: return RecordStatus::evaluated;
    case Kind::build_failed: return RecordStatus::build_failed;
    case Kind::incorrect: return RecordStatus::incorrect;
    case Kind::eval_error: return RecordStatus::eval_error;
    }
    return RecordStatus::eval_error;
}

EvalOutcome evaluate(const std::string& source, const EvaluatorConfig& config) {
    validate(config);
    if (trim(source).empty()) fail(ErrorKind::precondition, "source must be nonempty");

    std::lock_guard gate(submission_gate());
    if (config.probe) config.probe->on_start();
    EvalOutcome out;
    try {
        out = config.kind == EvaluatorKind::mock ? evaluate_mock(source, config)
                                                 : evaluate_external(source, config);
    } catch (...) {
        if (config.probe) config.probe->on_finish();
        throw;
    }
    if (config.probe) config.probe->on_finish();
    return out;
}

} // namespace kevo
