#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moa/evalbench/benchmark.hpp"
#include "moa/orchestrator/trace.hpp"
#include "moa/retrieval/chunker.hpp"

namespace moa {

/// Deployment config shared by the CLI and the service:
///
///   { "listen": "127.0.0.1:8080",
///     "pipelines": ["pipelines/desk.json"],
///     "kb_dir": "var/kb",
///     "knowledge_bases": { "kb": { "source_dir": "corpus/" } },   // seeded when empty
///     "chunking": { "window": 1000, "overlap": 200 },
///     "backends": { ... } | "backends_file": "backends.json",
///     "trace_dir": "var/traces",
///     "default_mode": "parallel",
///     "max_inflight_runs": 16 }
///
/// Relative paths resolve against the config file's directory.
struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::vector<std::filesystem::path> pipelines;
    std::optional<std::filesystem::path> kb_dir;
    std::map<std::string, BenchKbSource> knowledge_bases;
    ChunkingOptions chunking;
    nlohmann::json backends = nlohmann::json::object();
    std::filesystem::path backends_base_dir;
    std::optional<std::filesystem::path> trace_dir;
    Mode default_mode = Mode::kParallel;
    std::size_t max_inflight_runs = 16;
};

/// Throws kConfig for malformed documents and kIo when a referenced input
/// path (pipeline file, backend file, seed directory) does not exist.
ServiceConfig service_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

}  // namespace moa
