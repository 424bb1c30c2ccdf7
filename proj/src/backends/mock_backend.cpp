#include "moa/backends/mock_backend.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "moa/error.hpp"
#include "moa/util/text.hpp"

namespace moa {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// "[doc#pos] text" -> text
std::optional<std::string_view> passage_body(std::string_view line) {
    if (line.empty() || line.front() != '[') return std::nullopt;
    const auto close = line.find("] ");
    if (close == std::string_view::npos) return std::nullopt;
    if (line.substr(1, close - 1).find('#') == std::string_view::npos) return std::nullopt;
    return line.substr(close + 2);
}

// "Agent <id>: answer" -> answer, skipping abstained upstream markers
std::optional<std::string_view> upstream_body(std::string_view line) {
    constexpr std::string_view kPrefix = "Agent ";
    if (line.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
    const auto colon = line.find(": ", kPrefix.size());
    if (colon == std::string_view::npos) return std::nullopt;
    std::string_view body = line.substr(colon + 2);
    constexpr std::string_view kLow = "[LOW GROUNDING] ";
    if (body.substr(0, kLow.size()) == kLow) body.remove_prefix(kLow.size());
    if (body.substr(0, 10) == "[NO ANSWER") return std::nullopt;
    return body;
}

}  // namespace

std::string first_sentence(std::string_view text) {
    text = trim(text);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_ws(text[i + 1]))) {
            return std::string(text.substr(0, i + 1));
        }
    }
    return std::string(text);
}

MockBackend::MockBackend(std::string id, MockScript script) : id_(std::move(id)), script_(std::move(script)) {}

std::string MockBackend::canned_key(std::string_view agent_id, Fingerprint fp) {
    return std::string(agent_id) + ":" + fingerprint_hex(fp);
}

std::string MockBackend::echo_context(const CompletionRequest& request) {
    std::vector<std::string> passages;
    std::vector<std::string> upstream;
    std::istringstream in(request.system_prompt);
    std::string line;
    while (std::getline(in, line)) {
        if (auto body = passage_body(line)) {
            auto s = first_sentence(*body);
            if (!s.empty()) passages.push_back(std::move(s));
        } else if (auto answer = upstream_body(line)) {
            auto s = std::string(trim(*answer));
            if (!s.empty()) upstream.push_back(std::move(s));
        }
    }
    const auto& parts = passages.empty() ? upstream : passages;
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out.push_back(' ');
        out += p;
    }
    if (out.empty()) out = "I don't know.";
    const auto limit = static_cast<std::size_t>(std::max(0, request.params.max_output_tokens)) * 4;
    return std::string(trim(utf8_prefix(out, limit)));
}

CompletionResult MockBackend::complete(const CompletionRequest& request, const CallContext& context) const {
    const auto start = std::chrono::steady_clock::now();
    calls_.fetch_add(1);

    std::string text;
    if (script_.mode == MockMode::kEchoContext) {
        text = echo_context(request);
    } else {
        const Fingerprint fp = fingerprint(request);
        auto it = script_.canned_responses.find(canned_key(context.agent_id, fp));
        if (it == script_.canned_responses.end()) {
            it = script_.canned_responses.find(context.agent_id + ":*");
        }
        if (it == script_.canned_responses.end()) {
            throw Error(ErrorCode::kUnscripted, "mock '" + id_ + "' has no response for " +
                                                    canned_key(context.agent_id, fp));
        }
        text = it->second;
    }

    if (script_.fixed_latency > context.timeout) {
        std::this_thread::sleep_until(start + context.timeout);
        throw Error(ErrorCode::kTimeout, "mock '" + id_ + "' exceeded timeout of " +
                                             std::to_string(context.timeout.count()) + "ms");
    }
    std::this_thread::sleep_until(start + script_.fixed_latency);

    CompletionResult result;
    result.text = std::move(text);
    result.prompt_tokens = estimate_tokens(request.system_prompt) + estimate_tokens(request.user_message);
    result.output_tokens = estimate_tokens(result.text);
    result.backend_id = id_;
    result.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return result;
}

}  // namespace moa
