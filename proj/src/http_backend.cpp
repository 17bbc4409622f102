#include <httplib.h>

#include "http_backend.hpp"

#include <cstdlib>

#include <json.hpp>

#include "errors.hpp"

namespace kevo {

namespace {

void parse_url(const std::string& url, std::string& scheme, std::string& host, int& port,
               std::string& path) {
    std::string rest = url;
    auto scheme_end = rest.find("://");
    if (scheme_end == std::string::npos)
        fail(ErrorKind::config, "endpoint URL needs a scheme: " + url);
    scheme = rest.substr(0, scheme_end);
    rest = rest.substr(scheme_end + 3);
    if (scheme != "http" && scheme != "https")
        fail(ErrorKind::config, "unsupported endpoint scheme: " + scheme);
    auto path_start = rest.find('/');
    std::string authority = path_start == std::string::npos ? rest : rest.substr(0, path_start);
    path = path_start == std::string::npos ? "/" : rest.substr(path_start);
    auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        host = authority.substr(0, colon);
        port = std::atoi(authority.substr(colon + 1).c_str());
        if (port <= 0) fail(ErrorKind::config, "bad endpoint port in " + url);
    } else {
        host = authority;
        port = scheme == "https" ? 443 : 80;
    }
    if (host.empty()) fail(ErrorKind::config, "endpoint URL has no host: " + url);
}

} // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    parse_url(config_.endpoint_url, scheme_, host_, port_, path_);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme_ == "https")
        fail(ErrorKind::config, "built without TLS support; use an http endpoint");
#endif
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            fail(ErrorKind::config,
                 "environment variable " + config_.api_key_env + " is not set");
        api_key_ = key;
    }
}

std::string HttpBackend::complete(const ChatRequest& request) {
    nlohmann::json body{
        {"model", request.model_id},
        {"temperature", request.temperature},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"},
                                                           {"content", request.prompt}}})},
    };

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto post = [&](auto& client) -> httplib::Result {
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
        client.set_write_timeout(config_.timeout_s, 0);
        return client.Post(path_, headers, body.dump(), "application/json");
    };

    httplib::Result result;
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme_ == "https") {
        httplib::SSLClient client(host_, port_);
        result = post(client);
    } else {
        httplib::Client client(host_, port_);
        result = post(client);
    }
#else
    httplib::Client client(host_, port_);
    result = post(client);
#endif

    if (!result)
        throw TransportError("request to " + host_ + " failed: " +
                             httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw TransportError("endpoint returned HTTP " + std::to_string(result->status) + ": " +
                             result->body.substr(0, 500));

    nlohmann::json parsed = nlohmann::json::parse(result->body, nullptr, false);
    if (parsed.is_discarded())
        throw TransportError("endpoint returned non-JSON body");
    try {
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what());
    }
}

} // namespace kevo
