#include "llm_gateway.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

void ScriptedBackend::push_response(std::string text) {
    std::lock_guard lock(mutex_);
    script_.push_back(Step{false, std::move(text)});
}

void ScriptedBackend::push_transport_error(std::string message) {
    std::lock_guard lock(mutex_);
    script_.push_back(Step{true, std::move(message)});
}

void ScriptedBackend::set_responder(Responder responder) {
    std::lock_guard lock(mutex_);
    responder_ = std::move(responder);
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    Step step;
    Responder responder;
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        if (!script_.empty()) {
            step = script_.front();
            script_.pop_front();
        } else if (responder_) {
            responder = responder_;
        } else {
            throw TransportError("scripted backend has no response for role " + request.role);
        }
    }
    if (responder) return responder(request);
    if (step.transport_error) throw TransportError(step.text);
    return step.text;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size();
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, std::map<std::string, RoleConfig> roles,
                 int retry_backoff_ms)
    : backend_(std::move(backend)), roles_(std::move(roles)),
      retry_backoff_ms_(retry_backoff_ms) {}

bool Gateway::has_role(const std::string& role) const {
    return roles_.count(role) != 0;
}

const RoleConfig& Gateway::role_config(const std::string& role) const {
    auto it = roles_.find(role);
    if (it == roles_.end()) fail(ErrorKind::role_unconfigured, "no model configured for role " + role);
    return it->second;
}

std::string Gateway::repair_prompt(const std::string& original_prompt,
                                   const std::string& parse_error) {
    return original_prompt +
           "\n\nYour previous output failed to parse because: " + parse_error +
           "\nEmit the document again, following the required format exactly.";
}

std::string Gateway::attempt_once(const std::string& role, const RoleConfig& cfg,
                                  const std::string& prompt, int attempt, const CallSink* sink) {
    ChatRequest request{role, cfg.model_id, cfg.temperature, prompt};
    Transcript transcript;
    transcript.role = role;
    transcript.request = prompt;
    transcript.attempt = attempt;
    transcript.timestamp = now_iso8601_utc();
    std::string response;
    try {
        response = backend_->complete(request);
        transcript.response = response;
        transcript.transport_ok = true;
        record(std::move(transcript), sink);
    } catch (const TransportError& e) {
        transcript.response = std::string("<transport failure> ") + e.what();
        transcript.transport_ok = false;
        record(std::move(transcript), sink);
        throw;
    }
    return response;
}

void Gateway::record(Transcript transcript, const CallSink* sink) {
    std::string rendered;
    if (sink) {
        std::string head;
        kvdoc::append_entry(head, "role", transcript.role);
        kvdoc::append_entry(head, "attempt", std::to_string(transcript.attempt));
        kvdoc::append_entry(head, "timestamp", transcript.timestamp);
        kvdoc::append_entry(head, "transport_ok", transcript.transport_ok ? "true" : "false");
        rendered = head + "--- request ---\n" + transcript.request + "\n--- response ---\n" +
                   transcript.response + "\n";
    }
    std::lock_guard lock(mutex_);
    if (sink) {
        // the global sequence number keeps repeated repair attempts from
        // clobbering each other's files
        char seq[16];
        std::snprintf(seq, sizeof(seq), "%04zu", transcripts_.size() + 1);
        ensure_dir(sink->dir);
        write_file(sink->dir / (sink->label + "-" + seq + ".txt"), rendered);
    }
    transcripts_.push_back(std::move(transcript));
}

std::string Gateway::complete(const std::string& role, const std::string& prompt,
                              const CallSink* sink) {
    if (trim(prompt).empty()) fail(ErrorKind::precondition, "prompt must be nonempty");
    const RoleConfig& cfg = role_config(role);
    std::string last_error;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        try {
            return attempt_once(role, cfg, prompt, attempt, sink);
        } catch (const TransportError& e) {
            last_error = e.what();
            if (attempt < cfg.max_attempts && retry_backoff_ms_ > 0) {
                auto delay = std::chrono::milliseconds(retry_backoff_ms_ << (attempt - 1));
                std::this_thread::sleep_for(delay);
            }
        }
    }
    fail(ErrorKind::transport_failure,
         role + " backend failed after " + std::to_string(cfg.max_attempts) +
             " attempts: " + last_error);
}

std::vector<Transcript> Gateway::transcripts() const {
    std::lock_guard lock(mutex_);
    return transcripts_;
}

std::size_t Gateway::transcript_count() const {
    std::lock_guard lock(mutex_);
    return transcripts_.size();
}

} // namespace kevo
