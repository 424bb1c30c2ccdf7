#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "moa/backends/backend.hpp"
#include "moa/core/types.hpp"
#include "moa/retrieval/knowledge_base.hpp"

namespace moa {

/// Everything a pipeline may refer to by name. Frozen once plans are built.
struct Registry {
    BackendMap backends;
    std::map<std::string, std::shared_ptr<KnowledgeBase>, std::less<>> knowledge_bases;
    std::map<std::string, SubprocessHandler, std::less<>> handlers;
};

/// A validated pipeline with every reference resolved. Immutable; share it
/// between concurrent runs through shared_ptr<const ExecutionPlan>.
struct ExecutionPlan {
    PipelineSpec pipeline;
    /// agent_id -> upstream agent ids (nodes of layer 0 have none).
    std::map<std::string, std::vector<std::string>> edge_map;
    std::map<std::string, std::shared_ptr<Backend>> resolved_backends;
    std::map<std::string, std::shared_ptr<KnowledgeBase>> resolved_kbs;
    std::map<std::string, SubprocessHandler> resolved_handlers;
    /// True for the single-agent baseline plans built by make_single_agent_plan.
    bool single_agent = false;

    std::size_t layer_of(const std::string& agent_id) const;
    const std::string& terminal_agent() const { return pipeline.layers.back().front(); }
    std::size_t node_count() const;
};

/// Checks every structural invariant and resolves backends, KBs and
/// subprocess handlers. The first violation found is thrown, one distinct
/// ErrorCode per kind of violation.
ExecutionPlan validate_pipeline(const PipelineSpec& spec, const Registry& registry);

/// A one-node plan for the single-model baseline: the agent retrieves and
/// answers directly, with no aggregation layer.
ExecutionPlan make_single_agent_plan(const AgentSpec& agent, const Registry& registry,
                                     std::chrono::milliseconds timeout_per_call = std::chrono::milliseconds(30000),
                                     std::size_t retries = 1);

}  // namespace moa
