#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moa/backends/backend.hpp"
#include "moa/retrieval/chunk.hpp"

namespace moa {

enum class Role { kPlanner, kWorker, kAggregator, kSubprocess };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);  // throws kInvalidValue

struct ModelRef {
    std::string backend_id;
    std::string model_name;
    GenerationParams params;

    bool operator==(const ModelRef&) const = default;
};

std::vector<std::string> default_abstention_phrases();

struct GuardPolicy {
    bool abstention_enabled = true;
    double min_retrieval_score = 0.2;  // below this the abstention instruction is injected
    double grounding_threshold = 0.3;  // sentences below this are flagged
    std::vector<std::string> abstention_phrases = default_abstention_phrases();

    bool operator==(const GuardPolicy&) const = default;
};

struct AgentSpec {
    std::string agent_id;
    Role role = Role::kWorker;
    std::optional<ModelRef> model;  // absent iff role == kSubprocess
    std::string system_prompt;      // template with {question}, {context}, {upstream}
    std::optional<std::string> kb_binding;
    std::size_t top_k = 30;
    GuardPolicy guard_policy;
    std::optional<std::string> handler;                 // subprocess handler id
    std::optional<std::vector<std::string>> upstream;  // explicit edges; default is the whole previous layer

    bool operator==(const AgentSpec&) const = default;
};

/// Built-in prompt template for a role.
std::string default_prompt(Role role);

struct PipelineSpec {
    std::string pipeline_id;
    std::vector<std::vector<std::string>> layers;
    std::map<std::string, AgentSpec> agents;
    std::size_t parallelism_limit = 8;
    std::chrono::milliseconds timeout_per_call{30000};
    std::size_t retries = 1;

    const AgentSpec& agent(const std::string& agent_id) const;  // throws kUnknownAgent

    bool operator==(const PipelineSpec&) const = default;
};

/// What a subprocess node receives: the same inputs an agent would see.
struct SubprocessCall {
    std::string agent_id;
    std::string question;
    std::span<const ScoredChunk> retrieved;
    std::vector<std::pair<std::string, std::string>> upstream_answers;  // (agent_id, answer)
};

/// A non-model node (heuristic, API call, ...). Returns the node's answer.
using SubprocessHandler = std::function<std::string(const SubprocessCall&)>;

}  // namespace moa
