#pragma once

#include <string>

#include "llm_gateway.hpp"

namespace kevo {

struct HttpBackendConfig {
    // Full chat-completions URL, e.g. http://localhost:8080/v1/chat/completions
    std::string endpoint_url;
    // Name of the environment variable holding the API key; empty disables
    // the Authorization header (local servers). The key itself never appears
    // in config files.
    std::string api_key_env = "KERNELEVO_API_KEY";
    int timeout_s = 120;
};

// OpenAI-compatible chat-completions adapter. Sends a single user message per
// call and returns choices[0].message.content; anything else (non-2xx,
// malformed body) surfaces as a TransportError so the gateway's retry policy
// applies.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string complete(const ChatRequest& request) override;

private:
    HttpBackendConfig config_;
    std::string scheme_;
    std::string host_;
    int port_ = 80;
    std::string path_;
    std::string api_key_;
};

} // namespace kevo
