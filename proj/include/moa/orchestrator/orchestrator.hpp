#pragma once

#include <string>

#include "moa/core/plan.hpp"
#include "moa/error.hpp"
#include "moa/orchestrator/trace.hpp"

namespace moa {

struct QueryRequest {
    std::string run_id;
    std::string question;
    std::string pipeline_id;
    Mode mode = Mode::kParallel;
};

/// A node failed after its retries. Carries the trace of every node that
/// completed before the failure, with status "failed".
class RunFailure : public Error {
public:
    RunFailure(RunTrace partial, ErrorCode cause, const std::string& message);

    const RunTrace& trace() const noexcept { return trace_; }
    const std::string& failing_node() const noexcept { return *trace_.failing_node; }
    /// The error the failing node raised (kTimeout, kTransport, ...).
    ErrorCode cause() const noexcept { return cause_; }

private:
    RunTrace trace_;
    ErrorCode cause_;
};

/// Runs the plan layer by layer. Within a layer, kParallel runs up to
/// parallelism_limit nodes at once and kSerial runs them one by one; the
/// next layer starts after the whole layer has finished. The returned trace
/// lists nodes in canonical order (layer, then position in the layer).
/// Throws kPrecondition for an empty question and RunFailure when a node
/// fails.
RunTrace run_pipeline(const QueryRequest& request, const ExecutionPlan& plan);

}  // namespace moa
