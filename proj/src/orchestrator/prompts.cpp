#include "moa/orchestrator/prompts.hpp"

#include <algorithm>
#include <map>

#include "moa/error.hpp"
#include "moa/util/text.hpp"

namespace moa {
namespace {

// Single pass, so substituted text is never expanded again.
std::string fill_template(std::string_view tmpl, const std::map<std::string_view, std::string_view>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const auto name = tmpl.substr(i, close - i + 1);
                if (const auto it = values.find(name); it != values.end()) {
                    out.append(it->second);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

void require_placeholders(const AgentSpec& agent, std::initializer_list<std::string_view> names) {
    for (auto name : names) {
        if (agent.system_prompt.find(name) == std::string::npos) {
            throw Error(ErrorCode::kMissingPlaceholder,
                        "prompt template of agent '" + agent.agent_id + "' lacks " + std::string(name));
        }
    }
}

std::vector<NodeOutput> without_planners(std::span<const NodeOutput> nodes) {
    std::vector<NodeOutput> out;
    for (const auto& n : nodes) {
        if (n.role != Role::kPlanner) out.push_back(n);
    }
    return out;
}

}  // namespace

std::string abstention_instruction(const GuardPolicy& policy) {
    std::string phrase = policy.abstention_phrases.empty() ? "I don't know" : policy.abstention_phrases.front();
    if (!phrase.empty() && phrase.front() >= 'a' && phrase.front() <= 'z') phrase.front() = static_cast<char>(phrase.front() - 'a' + 'A');
    return "IMPORTANT: the retrieved context may not contain the answer. If it does not, reply exactly \"" + phrase +
           "\" and nothing else. Do not guess.";
}

bool needs_abstention_instruction(const GuardPolicy& policy, std::span<const ScoredChunk> retrieved) {
    if (!policy.abstention_enabled) return false;
    if (retrieved.empty()) return true;
    double best = retrieved.front().score;
    for (const auto& sc : retrieved) best = std::max(best, sc.score);
    return best < policy.min_retrieval_score;
}

std::string render_context(std::span<const ScoredChunk> retrieved) {
    if (retrieved.empty()) return std::string(kNoContext);
    std::string out;
    for (const auto& sc : retrieved) {
        if (!out.empty()) out.push_back('\n');
        out += "[" + sc.chunk.doc_id + "#" + std::to_string(sc.chunk.position) + "] ";
        out += flatten_whitespace(sc.chunk.text);
    }
    return out;
}

std::string render_upstream(std::span<const NodeOutput> upstream) {
    std::vector<const NodeOutput*> ordered;
    for (const auto& n : upstream) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(), [](const NodeOutput* a, const NodeOutput* b) {
        if (a->layer != b->layer) return a->layer < b->layer;
        return a->agent_id < b->agent_id;
    });
    std::string out;
    for (const NodeOutput* n : ordered) {
        if (!out.empty()) out.push_back('\n');
        out += "Agent " + n->agent_id + ": ";
        if (n->guard.abstained) {
            out += kNoAnswerMarker;
        } else {
            if (!n->guard.passed) {
                out += kLowGroundingMarker;
                out.push_back(' ');
            }
            out += flatten_whitespace(n->answer);
        }
    }
    return out;
}

std::string render_worker_prompt(const AgentSpec& agent, std::string_view question,
                                 std::span<const ScoredChunk> retrieved, std::span<const NodeOutput> upstream) {
    require_placeholders(agent, {"{question}", "{context}"});
    const auto answers = without_planners(upstream);
    const std::string context = render_context(retrieved);
    const std::string upstream_block = answers.empty() ? std::string("(none)") : render_upstream(answers);
    std::string prompt = fill_template(agent.system_prompt, {{"{question}", question},
                                                              {"{context}", context},
                                                              {"{upstream}", upstream_block}});
    if (needs_abstention_instruction(agent.guard_policy, retrieved)) {
        prompt += "\n\n";
        prompt += abstention_instruction(agent.guard_policy);
    }
    return prompt;
}

std::string render_aggregator_prompt(const AgentSpec& agent, std::string_view question,
                                     std::span<const NodeOutput> upstream) {
    require_placeholders(agent, {"{question}", "{upstream}"});
    const auto answers = without_planners(upstream);
    if (answers.empty()) {
        throw Error(ErrorCode::kEmptyUpstream, "aggregator '" + agent.agent_id + "' has no upstream answers");
    }
    const std::string block = render_upstream(answers);
    return fill_template(agent.system_prompt,
                         {{"{question}", question}, {"{upstream}", block}, {"{context}", std::string_view()}});
}

std::string render_planner_prompt(const AgentSpec& agent, std::string_view question,
                                  std::span<const AgentSpec> workers) {
    require_placeholders(agent, {"{question}"});
    std::string roster;
    for (const auto& w : workers) {
        if (!roster.empty()) roster.push_back('\n');
        roster += "- " + w.agent_id + " (" + std::string(to_string(w.role));
        if (w.kb_binding) roster += ", knowledge base: " + *w.kb_binding;
        roster += ")";
    }
    return fill_template(agent.system_prompt,
                         {{"{question}", question}, {"{context}", roster}, {"{upstream}", std::string_view()}});
}

std::string rerender_prompt(const ExecutionPlan& plan, const RunTrace& trace, const NodeOutput& node) {
    const AgentSpec& agent = plan.pipeline.agent(node.agent_id);
    std::vector<NodeOutput> upstream;
    for (const auto& id : node.upstream_ids) {
        if (const NodeOutput* up = trace.find(id)) upstream.push_back(*up);
    }
    switch (agent.role) {
        case Role::kPlanner: {
            std::vector<AgentSpec> workers;
            for (const auto& id : plan.pipeline.layers.at(1)) {
                if (plan.pipeline.agent(id).role != Role::kAggregator) workers.push_back(plan.pipeline.agent(id));
            }
            return render_planner_prompt(agent, node.question, workers);
        }
        case Role::kWorker:
            return render_worker_prompt(agent, node.question, node.retrieved, upstream);
        case Role::kAggregator:
            return render_aggregator_prompt(agent, node.question, upstream);
        case Role::kSubprocess:
            return "";
    }
    return "";
}

}  // namespace moa
