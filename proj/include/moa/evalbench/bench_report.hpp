#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moa/orchestrator/trace.hpp"

namespace moa {

/// The runs of one benchmark configuration.
struct TraceGroup {
    std::string label;
    std::vector<RunTrace> traces;
    std::optional<std::size_t> max_concurrent_users;  // supplied by config or a load test, never guessed
    std::map<std::string, std::string> metadata;      // passed through to the report
};

struct BenchRow {
    std::string label;
    double avg_response_speed = 0.0;  // seconds, mean total_wall_time
    double latency_penalty = 1.0;     // avg_response_speed / baseline's
    double avg_passages_considered = 0.0;
    double context_window_improvement = 1.0;  // avg_passages_considered / baseline's
    std::optional<std::size_t> max_concurrent_users;
    double avg_retrieval_time = 0.0;  // seconds, mean over runs of the summed per-node retrieval time
    std::size_t runs = 0;
    std::map<std::string, std::string> metadata;

    bool operator==(const BenchRow&) const = default;
};

struct BenchReport {
    std::string baseline_label;
    std::vector<BenchRow> rows;  // configuration order

    const BenchRow* find(const std::string& label) const;
    bool operator==(const BenchReport&) const = default;
};

/// Throws kEmptyTraceSet when there are no groups or a group has no traces,
/// kMissingBaseline when no group carries `baseline_label`.
BenchReport measure_run(const std::vector<TraceGroup>& groups, const std::string& baseline_label);

/// Metrics as rows and configurations as columns; the baseline's own ratios
/// print as "—".
std::string render_markdown(const BenchReport& report);

nlohmann::json report_to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& doc);

}  // namespace moa
