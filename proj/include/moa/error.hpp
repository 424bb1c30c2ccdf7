#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moa {

/// Every failure the engine reports carries one of these codes. Structural
/// pipeline violations each get their own code so callers (and tests) can
/// tell them apart without string matching.
enum class ErrorCode {
    // configuration parsing
    kSyntax,
    kUnknownField,
    kMissingField,
    kInvalidValue,
    // pipeline structure
    kTooFewLayers,
    kEmptyLayer,
    kDuplicateAgent,
    kUnknownAgent,
    kUnreferencedAgent,
    kBadTerminal,
    kAggregatorMisplaced,
    kPlannerMisplaced,
    kInvalidAgent,
    kBadEdge,
    kUnresolvedBackend,
    kUnresolvedKb,
    kUnresolvedHandler,
    // model invocation
    kPrecondition,
    kTimeout,
    kTransport,
    kRemoteStatus,
    kUnscripted,
    // retrieval
    kEmptyText,
    kEmbedderMismatch,
    kUnknownKb,
    kEmptyDocumentList,
    kIo,
    // prompting / orchestration
    kMissingPlaceholder,
    kEmptyUpstream,
    kNodeFailure,
    kNotFound,
    // benchmarking
    kMissingBaseline,
    kEmptyTraceSet,
    kConfig,
};

std::string_view code_name(ErrorCode code);

/// True for codes that describe bad input/configuration rather than a
/// failure while running (the CLI maps these to exit status 1).
bool is_config_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace moa
