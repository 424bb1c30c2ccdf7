#include "moa/core/plan.hpp"

#include <algorithm>
#include <set>

#include "moa/error.hpp"

namespace moa {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

bool is_unit(double x) { return x >= 0.0 && x <= 1.0; }

void check_agent(const AgentSpec& a) {
    const std::string who = "agent '" + a.agent_id + "'";
    if (a.role == Role::kSubprocess) {
        if (a.model) fail(ErrorCode::kInvalidAgent, who + ": subprocess nodes take no model");
        if (!a.handler || a.handler->empty()) fail(ErrorCode::kInvalidAgent, who + ": subprocess node needs a handler");
    } else {
        if (!a.model) fail(ErrorCode::kInvalidAgent, who + ": " + std::string(to_string(a.role)) + " needs a model");
        if (a.handler) fail(ErrorCode::kInvalidAgent, who + ": only subprocess nodes take a handler");
        if (a.model->params.temperature < 0.0) fail(ErrorCode::kInvalidAgent, who + ": temperature must be >= 0");
        if (a.model->params.max_output_tokens <= 0) {
            fail(ErrorCode::kInvalidAgent, who + ": max_output_tokens must be positive");
        }
    }
    if (a.role == Role::kAggregator && a.kb_binding) {
        fail(ErrorCode::kInvalidAgent, who + ": aggregators receive agent answers, not a knowledge base");
    }
    if (a.role == Role::kPlanner && a.kb_binding) fail(ErrorCode::kInvalidAgent, who + ": planners take no knowledge base");
    if (a.kb_binding && a.top_k < 1) fail(ErrorCode::kInvalidAgent, who + ": top_k must be >= 1 with a kb_binding");
    if (!is_unit(a.guard_policy.min_retrieval_score)) {
        fail(ErrorCode::kInvalidAgent, who + ": min_retrieval_score must be in [0, 1]");
    }
    if (!is_unit(a.guard_policy.grounding_threshold)) {
        fail(ErrorCode::kInvalidAgent, who + ": grounding_threshold must be in [0, 1]");
    }
}

void resolve(const AgentSpec& a, const Registry& registry, ExecutionPlan& plan) {
    if (a.model) {
        const auto it = registry.backends.find(a.model->backend_id);
        if (it == registry.backends.end() || !it->second) {
            fail(ErrorCode::kUnresolvedBackend,
                 "agent '" + a.agent_id + "': unknown backend '" + a.model->backend_id + "'");
        }
        plan.resolved_backends[a.agent_id] = it->second;
    }
    if (a.kb_binding) {
        const auto it = registry.knowledge_bases.find(*a.kb_binding);
        if (it == registry.knowledge_bases.end() || !it->second) {
            fail(ErrorCode::kUnresolvedKb, "agent '" + a.agent_id + "': unknown knowledge base '" + *a.kb_binding + "'");
        }
        plan.resolved_kbs[a.agent_id] = it->second;
    }
    if (a.handler) {
        const auto it = registry.handlers.find(*a.handler);
        if (it == registry.handlers.end() || !it->second) {
            fail(ErrorCode::kUnresolvedHandler,
                 "agent '" + a.agent_id + "': unknown subprocess handler '" + *a.handler + "'");
        }
        plan.resolved_handlers[a.agent_id] = it->second;
    }
}

}  // namespace

std::size_t ExecutionPlan::layer_of(const std::string& agent_id) const {
    for (std::size_t i = 0; i < pipeline.layers.size(); ++i) {
        const auto& layer = pipeline.layers[i];
        if (std::find(layer.begin(), layer.end(), agent_id) != layer.end()) return i;
    }
    throw Error(ErrorCode::kUnknownAgent, "agent '" + agent_id + "' is not in the plan");
}

std::size_t ExecutionPlan::node_count() const {
    std::size_t n = 0;
    for (const auto& layer : pipeline.layers) n += layer.size();
    return n;
}

ExecutionPlan validate_pipeline(const PipelineSpec& spec, const Registry& registry) {
    const auto& layers = spec.layers;
    if (layers.size() < 2) {
        fail(ErrorCode::kTooFewLayers, "≥ 2 layers required (pipeline '" + spec.pipeline_id + "' has " +
                                           std::to_string(layers.size()) + ")");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].empty()) fail(ErrorCode::kEmptyLayer, "layer " + std::to_string(i) + " is empty");
    }

    std::set<std::string> seen;
    for (const auto& layer : layers) {
        for (const auto& id : layer) {
            if (!seen.insert(id).second) fail(ErrorCode::kDuplicateAgent, "duplicate agent_id " + id);
        }
    }
    for (const auto& id : seen) {
        if (!spec.agents.contains(id)) fail(ErrorCode::kUnknownAgent, "layer references undefined agent '" + id + "'");
    }
    for (const auto& [id, agent] : spec.agents) {
        if (!seen.contains(id)) fail(ErrorCode::kUnreferencedAgent, "agent '" + id + "' is defined but not in any layer");
        if (agent.agent_id != id) {
            fail(ErrorCode::kInvalidAgent, "agent record '" + id + "' carries mismatched id '" + agent.agent_id + "'");
        }
    }

    const auto& last = layers.back();
    if (last.size() != 1 || spec.agents.at(last.front()).role != Role::kAggregator) {
        fail(ErrorCode::kBadTerminal, "final layer must be a single aggregator");
    }

    std::size_t planners = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        for (const auto& id : layers[i]) {
            const Role role = spec.agents.at(id).role;
            if (role == Role::kAggregator && i + 1 != layers.size()) {
                fail(ErrorCode::kAggregatorMisplaced, "aggregator '" + id + "' must be in the final layer");
            }
            if (role == Role::kPlanner) {
                ++planners;
                if (i != 0) fail(ErrorCode::kPlannerMisplaced, "planner '" + id + "' must be in layer 0");
                if (planners > 1) fail(ErrorCode::kPlannerMisplaced, "at most one planner is allowed");
            }
        }
    }
    if (planners == 1) {
        const auto& next = layers[1];
        const bool feeds_workers = std::any_of(next.begin(), next.end(), [&](const std::string& id) {
            return spec.agents.at(id).role != Role::kAggregator;
        });
        if (!feeds_workers) fail(ErrorCode::kPlannerMisplaced, "planner must be followed by a layer of workers");
    }

    if (spec.parallelism_limit < 1) fail(ErrorCode::kInvalidValue, "parallelism_limit must be >= 1");
    for (const auto& [id, agent] : spec.agents) check_agent(agent);

    ExecutionPlan plan;
    plan.pipeline = spec;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        for (const auto& id : layers[i]) {
            const AgentSpec& agent = spec.agents.at(id);
            if (i == 0) {
                if (agent.upstream && !agent.upstream->empty()) {
                    fail(ErrorCode::kBadEdge, "agent '" + id + "' is in layer 0 and cannot have upstream edges");
                }
                plan.edge_map[id] = {};
                continue;
            }
            const auto& previous = layers[i - 1];
            if (!agent.upstream) {
                plan.edge_map[id] = previous;
                continue;
            }
            if (agent.upstream->empty()) fail(ErrorCode::kBadEdge, "agent '" + id + "' has an empty upstream list");
            std::set<std::string> unique;
            for (const auto& up : *agent.upstream) {
                if (std::find(previous.begin(), previous.end(), up) == previous.end()) {
                    fail(ErrorCode::kBadEdge,
                         "agent '" + id + "': upstream '" + up + "' is not in the immediately preceding layer");
                }
                if (!unique.insert(up).second) fail(ErrorCode::kBadEdge, "agent '" + id + "' lists upstream '" + up + "' twice");
            }
            plan.edge_map[id] = *agent.upstream;
        }
    }

    for (const auto& [id, agent] : spec.agents) resolve(agent, registry, plan);
    return plan;
}

ExecutionPlan make_single_agent_plan(const AgentSpec& agent, const Registry& registry,
                                     std::chrono::milliseconds timeout_per_call, std::size_t retries) {
    if (agent.role != Role::kWorker && agent.role != Role::kSubprocess) {
        fail(ErrorCode::kInvalidAgent, "single-agent baseline '" + agent.agent_id + "' must be a worker");
    }
    check_agent(agent);
    ExecutionPlan plan;
    plan.single_agent = true;
    plan.pipeline.pipeline_id = agent.agent_id;
    plan.pipeline.layers = {{agent.agent_id}};
    plan.pipeline.agents.emplace(agent.agent_id, agent);
    plan.pipeline.parallelism_limit = 1;
    plan.pipeline.timeout_per_call = timeout_per_call;
    plan.pipeline.retries = retries;
    plan.edge_map[agent.agent_id] = {};
    resolve(agent, registry, plan);
    return plan;
}

}  // namespace moa
