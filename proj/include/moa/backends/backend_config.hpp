#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "moa/backends/backend.hpp"
#include "moa/backends/mock_backend.hpp"

namespace moa {

/// Reads a mock script file: a JSON object mapping "agent_id:fingerprint_hex"
/// (or "agent_id:*") to response text.
std::map<std::string, std::string> load_mock_responses(const std::filesystem::path& path);

/// Builds backends from a registry object:
///
///   { "<backend_id>": { "type": "mock", "mode": "echo_context" | "canned",
///                       "fixed_latency_ms": 1000, "script": "file.json",
///                       "responses": { "agent:fp": "text" } },
///     "<backend_id>": { "type": "http", "base_url": "http://host:port",
///                       "api_key_env": "OPENAI_API_KEY", "model_name": "..." } }
///
/// Relative script paths resolve against `base_dir`. Throws kConfig.
BackendMap backends_from_json(const nlohmann::json& registry, const std::filesystem::path& base_dir = {});

}  // namespace moa
