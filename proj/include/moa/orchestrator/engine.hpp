#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "moa/core/plan.hpp"
#include "moa/orchestrator/orchestrator.hpp"
#include "moa/orchestrator/trace.hpp"

namespace moa {

/// Validated plans plus the trace store. Queries are independent runs and
/// may be issued from many threads at once.
class Engine {
public:
    explicit Engine(Registry registry, std::optional<std::filesystem::path> trace_dir = std::nullopt);

    const Registry& registry() const noexcept { return registry_; }

    /// Validates and registers a pipeline; replaces one with the same id.
    std::shared_ptr<const ExecutionPlan> add_pipeline(const PipelineSpec& spec);

    /// Throws kNotFound for an unknown pipeline id.
    std::shared_ptr<const ExecutionPlan> plan(const std::string& pipeline_id) const;
    std::vector<std::shared_ptr<const ExecutionPlan>> plans() const;

    /// Runs a registered pipeline and persists its trace, also when the run
    /// fails (the RunFailure is rethrown after the partial trace is saved).
    RunTrace query(const std::string& pipeline_id, const std::string& question, Mode mode);

    /// Same for a plan that is not registered (the single-agent baseline).
    RunTrace run(const ExecutionPlan& plan, const std::string& question, Mode mode);

    /// Persisted trace text, byte-identical to what was written.
    std::optional<std::string> trace_text(const std::string& run_id) const { return traces_.load(run_id); }
    TraceStore& traces() noexcept { return traces_; }

    /// Unique within this engine and very likely across restarts.
    std::string next_run_id();

private:
    Registry registry_;
    TraceStore traces_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const ExecutionPlan>> plans_;
    std::atomic<std::uint64_t> counter_{0};
    std::uint64_t instance_tag_;
};

}  // namespace moa
