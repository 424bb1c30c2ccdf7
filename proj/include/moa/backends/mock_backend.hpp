#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <string>
#include <string_view>

#include "moa/backends/backend.hpp"

namespace moa {

enum class MockMode { kEchoContext, kCanned };

/// Scripted behaviour of a MockBackend.
///
/// In canned mode responses are looked up by "<agent_id>:<fingerprint_hex>",
/// then by the wildcard "<agent_id>:*"; anything else is an unscripted call.
struct MockScript {
    MockMode mode = MockMode::kEchoContext;
    std::map<std::string, std::string> canned_responses;
    std::chrono::milliseconds fixed_latency{0};
};

/// Deterministic stand-in for a model endpoint. Sleeps `fixed_latency` per
/// call (or until the call timeout, whichever is shorter).
class MockBackend final : public Backend {
public:
    MockBackend(std::string id, MockScript script);

    const std::string& id() const noexcept override { return id_; }
    CompletionResult complete(const CompletionRequest& request, const CallContext& context) const override;

    const MockScript& script() const noexcept { return script_; }
    std::size_t call_count() const noexcept { return calls_.load(); }

    /// The echo_context response for a request: the first sentence of every
    /// "[doc#pos] text" passage line in the system prompt, in order. With no
    /// passages it echoes the "Agent <id>: answer" lines instead (what an
    /// aggregator sees), and "I don't know." when there is nothing to echo.
    /// Truncated to max_output_tokens * 4 characters.
    static std::string echo_context(const CompletionRequest& request);

    static std::string canned_key(std::string_view agent_id, Fingerprint fp);

private:
    std::string id_;
    MockScript script_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Text up to and including the first '.', '!' or '?' that is followed by
/// whitespace or the end of the text; the whole (trimmed) text otherwise.
std::string first_sentence(std::string_view text);

}  // namespace moa
