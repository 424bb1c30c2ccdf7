#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "moa/backends/backend.hpp"
#include "moa/core/types.hpp"
#include "moa/guards/guards.hpp"
#include "moa/retrieval/chunk.hpp"

namespace moa {

enum class Mode { kSerial, kParallel };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);  // throws kInvalidValue

/// Everything one node saw and produced. Offsets are relative to the start
/// of the run.
struct NodeOutput {
    std::string agent_id;
    Role role = Role::kWorker;
    std::size_t layer = 0;
    std::string question;                   // what this node was asked (planner assignment or original)
    std::vector<std::string> upstream_ids;  // nodes whose answers it received
    std::string answer;
    std::vector<ScoredChunk> retrieved;
    std::string rendered_prompt;
    CompletionResult completion;
    GuardVerdict guard;
    std::chrono::microseconds started_at{0};
    std::chrono::microseconds ended_at{0};
    std::chrono::microseconds retrieval_time{0};
};

struct RunTrace {
    std::string run_id;
    std::string pipeline_id;
    std::string question;
    Mode mode = Mode::kSerial;
    std::vector<NodeOutput> node_outputs;  // canonical order: layer, then position in layer
    std::string final_answer;
    std::chrono::microseconds total_wall_time{0};
    std::string status = "ok";  // "ok" or "failed"
    std::optional<std::string> failing_node;
    std::optional<std::string> error;

    const NodeOutput* find(std::string_view agent_id) const;
    /// Total passages retrieved across all nodes of the run.
    std::size_t passages_considered() const;
};

/// Trace JSON, field-for-field as in the structs above. Chunk embeddings are
/// not stored; they are recomputable from the chunk text.
nlohmann::json trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(const nlohmann::json& doc);

/// Append-only store keyed by run_id: `<dir>/<run_id>.trace.json` when a
/// directory is configured, memory otherwise.
class TraceStore {
public:
    explicit TraceStore(std::optional<std::filesystem::path> directory = std::nullopt);

    /// Persists the trace and returns the exact text written.
    std::string save(const RunTrace& trace);

    /// Serialized trace text, or nullopt for unknown / malformed run ids.
    std::optional<std::string> load(const std::string& run_id) const;

    const std::optional<std::filesystem::path>& directory() const noexcept { return directory_; }

private:
    std::optional<std::filesystem::path> directory_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> memory_;
};

}  // namespace moa
