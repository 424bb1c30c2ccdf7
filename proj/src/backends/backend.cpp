#include "moa/backends/backend.hpp"

#include <cstdio>

#include "moa/error.hpp"
#include "moa/util/hash.hpp"
#include "moa/util/text.hpp"

namespace moa {

Fingerprint fingerprint(const CompletionRequest& request) {
    // Length-prefix each field so ("ab","c") and ("a","bc") differ.
    std::uint64_t h = kFnvOffsetBasis;
    for (std::string_view field : {std::string_view(request.system_prompt), std::string_view(request.user_message)}) {
        h = fnv1a64(std::to_string(field.size()), h);
        h = fnv1a64(":", h);
        h = fnv1a64(field, h);
    }
    return h;
}

std::string fingerprint_hex(Fingerprint fp) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

std::size_t estimate_tokens(std::string_view text) {
    const std::size_t chars = utf8_boundaries(text).size() - 1;
    return (chars + 3) / 4;
}

CompletionResult invoke(const Backend& backend, const CompletionRequest& request, const CallContext& context,
                        std::size_t retries) {
    if (request.user_message.empty()) {
        throw Error(ErrorCode::kPrecondition, "completion request has an empty user_message");
    }
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return backend.complete(request, context);
        } catch (const Error& e) {
            const bool retryable = e.code() == ErrorCode::kTimeout || e.code() == ErrorCode::kTransport;
            if (!retryable || attempt >= retries) throw;
        }
    }
}

CompletionResult invoke(const BackendMap& backends, std::string_view backend_id, const CompletionRequest& request,
                        const CallContext& context, std::size_t retries) {
    const auto it = backends.find(backend_id);
    if (it == backends.end() || !it->second) {
        throw Error(ErrorCode::kUnresolvedBackend, "unknown backend '" + std::string(backend_id) + "'");
    }
    return invoke(*it->second, request, context, retries);
}

}  // namespace moa
