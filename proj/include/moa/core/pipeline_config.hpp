#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "moa/core/types.hpp"

namespace moa {

/// Parses a pipeline config document:
///
///   { "pipeline_id": "...", "layers": [["a","b"],["agg"]],
///     "agents": { "<id>": { "role": "worker", "model": {...}, ... } },
///     "parallelism_limit": 8, "timeout_per_call_ms": 30000, "retries": 1 }
///
/// Unknown keys anywhere are rejected. Omitted optional fields get their
/// defaults. Throws kSyntax (with line/column), kUnknownField, kMissingField,
/// kInvalidValue or kTooFewLayers.
PipelineSpec parse_pipeline(std::string_view config_text);
PipelineSpec load_pipeline_file(const std::filesystem::path& path);

PipelineSpec pipeline_from_json(const nlohmann::json& doc);
nlohmann::json pipeline_to_json(const PipelineSpec& spec);

/// Canonical text form; parse_pipeline(serialize_pipeline(s)) == s.
std::string serialize_pipeline(const PipelineSpec& spec);

/// One agent record (the values of the "agents" map). `where` prefixes
/// error messages.
AgentSpec agent_from_json(const std::string& agent_id, const nlohmann::json& record,
                          const std::string& where = "agents");
nlohmann::json agent_to_json(const AgentSpec& agent);

}  // namespace moa
