#include "moa/backends/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "moa/error.hpp"

namespace moa {

using json = nlohmann::json;

HttpBackend::HttpBackend(std::string id, HttpBackendConfig config) : id_(std::move(id)), config_(std::move(config)) {}

CompletionResult HttpBackend::complete(const CompletionRequest& request, const CallContext& context) const {
    const auto start = std::chrono::steady_clock::now();

    httplib::Client client(config_.base_url);
    if (!client.is_valid()) throw Error(ErrorCode::kTransport, "invalid base_url '" + config_.base_url + "'");
    client.set_connection_timeout(context.timeout);
    client.set_read_timeout(context.timeout);
    client.set_write_timeout(context.timeout);
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            client.set_bearer_token_auth(key);
        }
    }

    json messages = json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_message}});
    const json body = {
        {"model", context.model_name.empty() ? config_.model_name : context.model_name},
        {"messages", messages},
        {"temperature", request.params.temperature},
        {"max_tokens", request.params.max_output_tokens},
        {"stream", false},
    };

    auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= context.timeout)) {
            throw Error(ErrorCode::kTimeout, "backend '" + id_ + "' timed out after " +
                                                 std::to_string(context.timeout.count()) + "ms");
        }
        throw Error(ErrorCode::kTransport, "backend '" + id_ + "': " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::kRemoteStatus,
                    "backend '" + id_ + "' returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    CompletionResult result;
    result.backend_id = id_;
    try {
        const json reply = json::parse(res->body);
        result.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage") && reply["usage"].is_object()) {
            const auto& usage = reply["usage"];
            result.prompt_tokens = usage.value("prompt_tokens", std::size_t{0});
            result.output_tokens = usage.value("completion_tokens", std::size_t{0});
        } else {
            result.prompt_tokens = estimate_tokens(request.system_prompt) + estimate_tokens(request.user_message);
            result.output_tokens = estimate_tokens(result.text);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kRemoteStatus, "backend '" + id_ + "' returned an unreadable body: " + e.what());
    }
    result.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return result;
}

}  // namespace moa
