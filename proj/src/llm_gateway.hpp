#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "errors.hpp"

namespace kevo {

struct ChatRequest {
    std::string role; // selector | designer | writer | digester
    std::string model_id;
    double temperature = 0.0;
    std::string prompt;
};

// Thrown by backends for failures worth retrying (network, 5xx, bad payload).
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& message) : std::runtime_error(message) {}
};

// Single-shot chat completion. Implementations must be safe for concurrent
// calls; the writer stage runs up to three at once.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Deterministic backend for tests and offline runs: a FIFO of canned
// responses consumed first, then an optional responder function. Observable
// behavior is a pure function of the script.
class ScriptedBackend : public ChatBackend {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    void push_response(std::string text);
    void push_transport_error(std::string message);
    void set_responder(Responder responder);

    std::string complete(const ChatRequest& request) override;

    std::vector<ChatRequest> requests() const;
    std::size_t remaining() const;

private:
    struct Step {
        bool transport_error = false;
        std::string text;
    };
    mutable std::mutex mutex_;
    std::deque<Step> script_;
    Responder responder_;
    std::vector<ChatRequest> requests_;
};

struct RoleConfig {
    std::string model_id;
    double temperature = 0.7; // [0, 2]
    int max_attempts = 3;     // bound for both transport retries and parse repairs
};

struct Transcript {
    std::string role;
    std::string request;
    std::string response; // transport failures carry the error text
    int attempt = 1;
    std::string timestamp;
    bool transport_ok = true;
};

// Optional per-call persistence target for transcripts.
struct CallSink {
    std::filesystem::path dir;
    std::string label;
};

// Role-routing chat client with transcript logging, transport retry with
// exponential backoff, and parse-repair re-prompting for structured outputs.
class Gateway {
public:
    Gateway(std::shared_ptr<ChatBackend> backend, std::map<std::string, RoleConfig> roles,
            int retry_backoff_ms = 250);

    // Raw completion. Retries transport failures up to the role's
    // max_attempts with exponential backoff; every attempt (including failed
    // ones) lands in the transcript log.
    std::string complete(const std::string& role, const std::string& prompt,
                         const CallSink* sink = nullptr);

    // Completion plus parsing. On a parse failure the model is re-prompted
    // with the parse-error description appended, up to max_attempts total
    // attempts; never returns an unparsed value.
    template <class T>
    T complete_structured(const std::string& role, const std::string& prompt,
                          const std::function<Parsed<T>(const std::string&)>& parser,
                          const CallSink* sink = nullptr) {
        const RoleConfig& cfg = role_config(role);
        std::string current_prompt = prompt;
        std::string last_error;
        for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
            std::string text = complete(role, current_prompt, sink);
            Parsed<T> parsed = parser(text);
            if (parsed.ok()) return std::move(*parsed.value);
            last_error = parsed.error;
            current_prompt = repair_prompt(prompt, parsed.error);
        }
        fail(ErrorKind::parse_exhausted,
             role + " output failed to parse after " + std::to_string(cfg.max_attempts) +
                 " attempts; last error: " + last_error);
    }

    const RoleConfig& role_config(const std::string& role) const;
    bool has_role(const std::string& role) const;

    std::vector<Transcript> transcripts() const;
    std::size_t transcript_count() const;

    static std::string repair_prompt(const std::string& original_prompt,
                                     const std::string& parse_error);

private:
    std::string attempt_once(const std::string& role, const RoleConfig& cfg,
                             const std::string& prompt, int attempt, const CallSink* sink);
    void record(Transcript transcript, const CallSink* sink);

    std::shared_ptr<ChatBackend> backend_;
    std::map<std::string, RoleConfig> roles_;
    int retry_backoff_ms_;
    mutable std::mutex mutex_;
    std::vector<Transcript> transcripts_;
};

} // namespace kevo
