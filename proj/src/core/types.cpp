#include "moa/core/types.hpp"

#include "moa/error.hpp"

namespace moa {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::kPlanner: return "planner";
        case Role::kWorker: return "worker";
        case Role::kAggregator: return "aggregator";
        case Role::kSubprocess: return "subprocess";
    }
    return "worker";
}

Role role_from_string(std::string_view name) {
    if (name == "planner") return Role::kPlanner;
    if (name == "worker") return Role::kWorker;
    if (name == "aggregator") return Role::kAggregator;
    if (name == "subprocess") return Role::kSubprocess;
    throw Error(ErrorCode::kInvalidValue, "unknown role '" + std::string(name) + "'");
}

std::vector<std::string> default_abstention_phrases() {
    return {"i don't know", "i do not know", "insufficient context"};
}

std::string default_prompt(Role role) {
    switch (role) {
        case Role::kPlanner:
            return "You route research questions to specialist agents.\n"
                   "Write one focused sub-question for each agent listed below. Reply with only a JSON array of "
                   "objects of the form {\"agent_id\": \"...\", \"question\": \"...\"}.\n\n"
                   "Question: {question}\n\nAgents:\n{context}";
        case Role::kWorker:
            return "You are a specialist research agent. Answer the question using only the context passages "
                   "below. Cite nothing that is not in the context.\n\n"
                   "Question: {question}\n\nContext:\n{context}";
        case Role::kAggregator:
            return "You combine the answers of specialist agents into one complete, accurate response. Discard "
                   "information that is irrelevant or contradicted by the other answers.\n\n"
                   "Question: {question}\n\nAgent answers:\n{upstream}";
        case Role::kSubprocess:
            return "";
    }
    return "";
}

const AgentSpec& PipelineSpec::agent(const std::string& agent_id) const {
    const auto it = agents.find(agent_id);
    if (it == agents.end()) {
        throw Error(ErrorCode::kUnknownAgent, "pipeline '" + pipeline_id + "' has no agent '" + agent_id + "'");
    }
    return it->second;
}

}  // namespace moa
