#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moa/backends/backend.hpp"
#include "moa/core/types.hpp"
#include "moa/evalbench/bench_report.hpp"
#include "moa/orchestrator/trace.hpp"
#include "moa/retrieval/chunker.hpp"
#include "moa/retrieval/synthetic.hpp"

namespace moa {

/// Where a benchmark KB's documents come from: generated, or the `.txt`
/// files of a directory.
struct BenchKbSource {
    std::optional<SyntheticCorpusSpec> synthetic;
    std::optional<std::filesystem::path> source_dir;
};

/// One column of the report. Exactly one of pipeline_id / agent is set; an
/// agent configuration runs that agent alone (the single-model baseline).
struct BenchConfiguration {
    std::string label;
    std::optional<std::string> pipeline_id;
    std::optional<std::string> agent;
    Mode mode = Mode::kParallel;
    std::optional<std::size_t> repetitions;  // overrides the suite default
    /// agent_id (or "*" for every model-backed agent) -> backend_id.
    std::map<std::string, std::string> backend_overrides;
    std::optional<std::size_t> max_concurrent_users;
    std::map<std::string, std::string> metadata;
};

struct SuiteConfig {
    std::string suite_id = "suite";
    std::string baseline;
    std::size_t repetitions = 5;
    std::vector<std::string> questions;  // repetition i asks questions[i % size]
    BackendMap backends;
    std::map<std::string, SubprocessHandler> handlers;
    ChunkingOptions chunking;
    std::map<std::string, BenchKbSource> knowledge_bases;
    std::vector<PipelineSpec> pipelines;
    std::map<std::string, AgentSpec> agents;
    std::chrono::milliseconds timeout_per_call{30000};  // for agent configurations
    std::size_t retries = 1;
    std::vector<BenchConfiguration> configurations;
    std::optional<std::filesystem::path> trace_dir;
};

/// Suite file format:
///
///   { "suite_id": "desk", "baseline": "Baseline", "repetitions": 5,
///     "questions": ["..."],
///     "backends": { ...backend registry... } | "backends_file": "backends.json",
///     "chunking": { "window": 1000, "overlap": 200 },
///     "knowledge_bases": { "kb": { "synthetic": { "documents": 40, "document_chars": 3000,
///                                                 "seed": 1, "topic": "revenue" } },
///                          "kb2": { "source_dir": "corpus/" } },
///     "pipelines": ["pipeline.json", { ...inline pipeline... }],
///     "agents": { "solo": { ...agent record... } },
///     "timeout_per_call_ms": 30000, "retries": 1, "trace_dir": "traces/",
///     "configurations": [ { "label": "...", "pipeline_id": "..." | "agent": "...",
///                           "mode": "serial" | "parallel", "repetitions": 5,
///                           "backend_overrides": { "*": "mock-fast" },
///                           "max_concurrent_users": 20, "metadata": { "k": "v" } } ] }
///
/// Relative paths resolve against `base_dir`. Throws kConfig (repetitions
/// of 0 included) or the pipeline parsing errors.
SuiteConfig suite_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
SuiteConfig load_suite(const std::filesystem::path& path);

struct BenchResult {
    BenchReport report;
    std::string markdown;
    nlohmann::json json;
    std::vector<TraceGroup> groups;
};

/// Builds the KBs, then runs every configuration in order, one run at a
/// time. A failed run aborts the suite with an error naming its run_id.
BenchResult run_benchmark(const SuiteConfig& suite);

}  // namespace moa
