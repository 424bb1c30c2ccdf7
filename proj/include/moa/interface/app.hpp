#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moa/core/types.hpp"
#include "moa/interface/service_config.hpp"
#include "moa/orchestrator/engine.hpp"
#include "moa/retrieval/kb_store.hpp"

namespace moa {

/// Subprocess handlers available to every pipeline by name:
///   passage_digest  first sentence of each of the top three passages
///   upstream_concat the upstream answers joined by newlines
std::map<std::string, SubprocessHandler> builtin_handlers();

/// One deployment built from a ServiceConfig: KB store (seeded on first
/// start), backends, and an engine with every configured pipeline
/// validated. Knowledge bases named by a pipeline are created empty when
/// they do not exist yet, so pipelines validate before their first ingest.
class App {
public:
    explicit App(ServiceConfig config);

    const ServiceConfig& config() const noexcept { return config_; }
    Engine& engine() noexcept { return *engine_; }
    KbStore& kb_store() noexcept { return *store_; }

    IngestionReport ingest(const std::string& kb_id, const std::vector<SourceDocument>& documents);

private:
    ServiceConfig config_;
    std::unique_ptr<KbStore> store_;
    std::unique_ptr<Engine> engine_;
};

/// {pipeline_id, layers, node_count, parallelism_limit, agents: [...]}.
nlohmann::json plan_summary(const ExecutionPlan& plan);

/// {run_id, final_answer, agent_answers: [{agent_id, answer, abstained,
/// grounding_score}]}, listing worker and subprocess nodes in layer order.
nlohmann::json query_response(const RunTrace& trace);

}  // namespace moa
