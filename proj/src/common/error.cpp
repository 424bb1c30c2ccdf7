#include "moa/error.hpp"

namespace moa {

std::string_view code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kSyntax: return "syntax_error";
        case ErrorCode::kUnknownField: return "unknown_field";
        case ErrorCode::kMissingField: return "missing_field";
        case ErrorCode::kInvalidValue: return "invalid_value";
        case ErrorCode::kTooFewLayers: return "too_few_layers";
        case ErrorCode::kEmptyLayer: return "empty_layer";
        case ErrorCode::kDuplicateAgent: return "duplicate_agent";
        case ErrorCode::kUnknownAgent: return "unknown_agent";
        case ErrorCode::kUnreferencedAgent: return "unreferenced_agent";
        case ErrorCode::kBadTerminal: return "bad_terminal";
        case ErrorCode::kAggregatorMisplaced: return "aggregator_misplaced";
        case ErrorCode::kPlannerMisplaced: return "planner_misplaced";
        case ErrorCode::kInvalidAgent: return "invalid_agent";
        case ErrorCode::kBadEdge: return "bad_edge";
        case ErrorCode::kUnresolvedBackend: return "unresolved_backend";
        case ErrorCode::kUnresolvedKb: return "unresolved_kb";
        case ErrorCode::kUnresolvedHandler: return "unresolved_handler";
        case ErrorCode::kPrecondition: return "precondition";
        case ErrorCode::kTimeout: return "timeout";
        case ErrorCode::kTransport: return "transport_error";
        case ErrorCode::kRemoteStatus: return "remote_error";
        case ErrorCode::kUnscripted: return "unscripted";
        case ErrorCode::kEmptyText: return "empty_text";
        case ErrorCode::kEmbedderMismatch: return "embedder_mismatch";
        case ErrorCode::kUnknownKb: return "unknown_kb";
        case ErrorCode::kEmptyDocumentList: return "empty_document_list";
        case ErrorCode::kIo: return "io_error";
        case ErrorCode::kMissingPlaceholder: return "missing_placeholder";
        case ErrorCode::kEmptyUpstream: return "empty_upstream";
        case ErrorCode::kNodeFailure: return "node_failure";
        case ErrorCode::kNotFound: return "not_found";
        case ErrorCode::kMissingBaseline: return "missing_baseline";
        case ErrorCode::kEmptyTraceSet: return "empty_trace_set";
        case ErrorCode::kConfig: return "config_error";
    }
    return "unknown";
}

bool is_config_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::kPrecondition:
        case ErrorCode::kTimeout:
        case ErrorCode::kTransport:
        case ErrorCode::kRemoteStatus:
        case ErrorCode::kUnscripted:
        case ErrorCode::kIo:
        case ErrorCode::kNodeFailure:
            return false;
        default:
            return true;
    }
}

}  // namespace moa
