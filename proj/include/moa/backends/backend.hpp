#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace moa {

struct GenerationParams {
    double temperature = 0.0;
    int max_output_tokens = 512;

    bool operator==(const GenerationParams&) const = default;
};

struct CompletionRequest {
    std::string system_prompt;
    std::string user_message;
    GenerationParams params;
};

struct CompletionResult {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t output_tokens = 0;
    std::chrono::microseconds latency{0};
    std::string backend_id;
};

/// Per-call metadata that is not part of the request content.
struct CallContext {
    std::string agent_id;
    std::string model_name;  // empty: backend default
    std::chrono::milliseconds timeout{30000};
};

/// Uniform model-invocation contract. Implementations must be safe for
/// concurrent complete() calls.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const std::string& id() const noexcept = 0;

    /// One attempt. Throws Error with kTimeout, kTransport, kRemoteStatus or
    /// kUnscripted.
    virtual CompletionResult complete(const CompletionRequest& request, const CallContext& context) const = 0;
};

using BackendMap = std::map<std::string, std::shared_ptr<Backend>, std::less<>>;

using Fingerprint = std::uint64_t;

/// Stable content hash of (system_prompt, user_message); params are excluded.
Fingerprint fingerprint(const CompletionRequest& request);
std::string fingerprint_hex(Fingerprint fp);

/// ceil(characters / 4), the fallback when a backend reports no usage.
std::size_t estimate_tokens(std::string_view text);

/// Validates the request, calls the backend, and retries up to `retries`
/// extra times on timeout or transport failure. Remote error statuses and
/// unscripted mock requests are not retried.
CompletionResult invoke(const Backend& backend, const CompletionRequest& request, const CallContext& context,
                        std::size_t retries);

/// Same, resolving `backend_id` in `backends` first (kUnresolvedBackend).
CompletionResult invoke(const BackendMap& backends, std::string_view backend_id, const CompletionRequest& request,
                        const CallContext& context, std::size_t retries);

}  // namespace moa
