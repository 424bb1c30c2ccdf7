#include "moa/orchestrator/engine.hpp"

#include <cstdio>
#include <mutex>
#include <random>

namespace moa {

Engine::Engine(Registry registry, std::optional<std::filesystem::path> trace_dir)
    : registry_(std::move(registry)), traces_(std::move(trace_dir)), instance_tag_(std::random_device{}()) {
    instance_tag_ = (instance_tag_ << 32) ^ std::random_device{}();
}

std::shared_ptr<const ExecutionPlan> Engine::add_pipeline(const PipelineSpec& spec) {
    auto plan = std::make_shared<const ExecutionPlan>(validate_pipeline(spec, registry_));
    std::unique_lock lock(mu_);
    plans_[spec.pipeline_id] = plan;
    return plan;
}

std::shared_ptr<const ExecutionPlan> Engine::plan(const std::string& pipeline_id) const {
    std::shared_lock lock(mu_);
    const auto it = plans_.find(pipeline_id);
    if (it == plans_.end()) throw Error(ErrorCode::kNotFound, "unknown pipeline '" + pipeline_id + "'");
    return it->second;
}

std::vector<std::shared_ptr<const ExecutionPlan>> Engine::plans() const {
    std::shared_lock lock(mu_);
    std::vector<std::shared_ptr<const ExecutionPlan>> out;
    for (const auto& [id, p] : plans_) out.push_back(p);
    return out;
}

RunTrace Engine::query(const std::string& pipeline_id, const std::string& question, Mode mode) {
    const auto p = plan(pipeline_id);
    return run(*p, question, mode);
}

RunTrace Engine::run(const ExecutionPlan& plan, const std::string& question, Mode mode) {
    QueryRequest request{next_run_id(), question, plan.pipeline.pipeline_id, mode};
    try {
        RunTrace trace = run_pipeline(request, plan);
        traces_.save(trace);
        return trace;
    } catch (const RunFailure& failure) {
        traces_.save(failure.trace());
        throw;
    }
}

std::string Engine::next_run_id() {
    const std::uint64_t n = counter_.fetch_add(1) + 1;
    char buf[48];
    std::snprintf(buf, sizeof buf, "run-%012llx-%06llu",
                  static_cast<unsigned long long>(instance_tag_ & 0xffffffffffffULL),
                  static_cast<unsigned long long>(n));
    return buf;
}

}  // namespace moa
