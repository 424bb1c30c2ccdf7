#pragma once

#include <string>

#include "moa/backends/backend.hpp"

namespace moa {

struct HttpBackendConfig {
    std::string base_url;     // scheme://host[:port]
    std::string api_key_env;  // name of the env var holding the bearer token; may be empty
    std::string model_name;   // used when the agent's ModelRef names none
};

/// OpenAI-compatible chat-completion client (POST /v1/chat/completions).
class HttpBackend final : public Backend {
public:
    HttpBackend(std::string id, HttpBackendConfig config);

    const std::string& id() const noexcept override { return id_; }
    CompletionResult complete(const CompletionRequest& request, const CallContext& context) const override;

    const HttpBackendConfig& config() const noexcept { return config_; }

private:
    std::string id_;
    HttpBackendConfig config_;
};

}  // namespace moa
