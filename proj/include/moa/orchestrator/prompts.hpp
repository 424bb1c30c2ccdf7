#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moa/core/plan.hpp"
#include "moa/core/types.hpp"
#include "moa/orchestrator/trace.hpp"
#include "moa/retrieval/chunk.hpp"

namespace moa {

inline constexpr std::string_view kNoContext = "NO CONTEXT AVAILABLE";
inline constexpr std::string_view kNoAnswerMarker = "[NO ANSWER — INSUFFICIENT CONTEXT]";
inline constexpr std::string_view kLowGroundingMarker = "[LOW GROUNDING]";

/// The block appended to a worker prompt when retrieval support is weak.
std::string abstention_instruction(const GuardPolicy& policy);

/// True when the policy enables abstention and nothing was retrieved or the
/// best retrieval score is below min_retrieval_score.
bool needs_abstention_instruction(const GuardPolicy& policy, std::span<const ScoredChunk> retrieved);

/// One "[doc_id#position] text" line per passage in rank order (text with
/// whitespace runs collapsed), or NO CONTEXT AVAILABLE.
std::string render_context(std::span<const ScoredChunk> retrieved);

/// One "Agent <id>: <answer>" line per node, sorted by layer then agent_id.
/// Abstentions render the NO ANSWER marker; answers that failed grounding
/// are prefixed with [LOW GROUNDING].
std::string render_upstream(std::span<const NodeOutput> upstream);

/// Requires {question} and {context} in the template (kMissingPlaceholder).
/// {upstream}, when present, receives the answers of non-planner upstream
/// nodes.
std::string render_worker_prompt(const AgentSpec& agent, std::string_view question,
                                 std::span<const ScoredChunk> retrieved, std::span<const NodeOutput> upstream = {});

/// Requires {question} and {upstream}; throws kEmptyUpstream when there is
/// nothing to aggregate.
std::string render_aggregator_prompt(const AgentSpec& agent, std::string_view question,
                                     std::span<const NodeOutput> upstream);

/// Requires {question}; {context} receives the roster of agents the planner
/// assigns questions to.
std::string render_planner_prompt(const AgentSpec& agent, std::string_view question,
                                  std::span<const AgentSpec> workers);

/// Rebuilds a node's prompt from the inputs recorded in `trace`; equal to
/// node.rendered_prompt for every node the orchestrator produced.
std::string rerender_prompt(const ExecutionPlan& plan, const RunTrace& trace, const NodeOutput& node);

}  // namespace moa
