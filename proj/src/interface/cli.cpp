#include "moa/interface/cli.hpp"

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moa/backends/mock_backend.hpp"
#include "moa/core/pipeline_config.hpp"
#include "moa/error.hpp"
#include "moa/evalbench/benchmark.hpp"
#include "moa/interface/app.hpp"
#include "moa/interface/service.hpp"
#include "moa/retrieval/kb_store.hpp"

namespace moa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int report_error(std::ostream& err, const Error& e) {
    json body = {{"error", {{"code", code_name(e.code())}, {"message", e.what()}}}};
    if (const auto* f = dynamic_cast<const RunFailure*>(&e)) {
        body["error"]["code"] = code_name(f->cause());
        body["run_id"] = f->trace().run_id;
        body["failing_node"] = f->failing_node();
    }
    err << body.dump() << "\n";
    return is_config_error(e.code()) ? 1 : 2;
}

ServiceConfig require_config(const std::optional<std::string>& path, const char* command) {
    if (!path) throw Error(ErrorCode::kConfig, std::string(command) + " needs --config");
    return load_service_config(*path);
}

// Lets `validate` check structure without a deployment: every referenced
// backend, KB and handler resolves to an inert stand-in.
Registry stand_in_registry(const PipelineSpec& spec) {
    Registry r;
    const auto embedder = make_embedder(HashedBagOfWordsEmbedder::kId);
    for (const auto& [id, agent] : spec.agents) {
        if (agent.model) r.backends.emplace(agent.model->backend_id, std::make_shared<MockBackend>(agent.model->backend_id, MockScript{}));
        if (agent.kb_binding) r.knowledge_bases.emplace(*agent.kb_binding, std::make_shared<KnowledgeBase>(*agent.kb_binding, embedder));
        if (agent.handler) r.handlers.emplace(*agent.handler, [](const SubprocessCall&) { return std::string(); });
    }
    return r;
}

void print_trace(std::ostream& out, const RunTrace& trace) {
    for (const auto& n : trace.node_outputs) {
        if (n.role != Role::kWorker && n.role != Role::kSubprocess) continue;
        if (n.agent_id == trace.node_outputs.back().agent_id) continue;
        out << "Agent " << n.agent_id << ":\n" << n.answer << "\n";
        if (n.guard.abstained) {
            out << "  (abstained)\n";
        } else if (!n.guard.passed) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "  (low grounding: %.2f)\n", n.guard.grounding_score);
            out << buf;
        }
        out << "\n";
    }
    out << "Final:\n" << trace.final_answer << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Layered mixture-of-agents RAG engine", "moa"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::string> config_path;
    app.add_option("--config", config_path, "deployment config (JSON)");

    auto* ingest = app.add_subcommand("ingest", "chunk, embed and store the .txt files of a directory");
    std::string kb_id, source_dir;
    std::optional<std::string> kb_dir;
    ingest->add_option("kb_id", kb_id)->required();
    ingest->add_option("dir", source_dir)->required()->check(CLI::ExistingDirectory);
    ingest->add_option("--kb-dir", kb_dir, "KB store directory (default: kb_dir of --config)");

    auto* query = app.add_subcommand("query", "run a pipeline on one question");
    std::string pipeline_id, question, mode_name;
    bool show_trace = false, query_json = false;
    query->add_option("pipeline_id", pipeline_id)->required();
    query->add_option("question", question)->required();
    query->add_option("--mode", mode_name, "serial or parallel (default: config default_mode)")
        ->check(CLI::IsMember({"serial", "parallel"}));
    query->add_flag("--trace", show_trace, "print every agent's answer before the final answer");
    query->add_flag("--json", query_json, "print the query response as JSON");

    auto* bench = app.add_subcommand("bench", "run a benchmark suite and print the report");
    std::string suite_path;
    bool bench_json = false;
    bench->add_option("suite", suite_path)->required()->check(CLI::ExistingFile);
    bench->add_flag("--json", bench_json, "print the report as JSON");

    auto* validate = app.add_subcommand("validate", "validate a pipeline config and print its plan");
    std::string pipeline_path;
    validate->add_option("pipeline", pipeline_path)->required();

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
    std::optional<int> port;
    serve_cmd->add_option("--port", port, "override the configured port")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) {
            std::optional<fs::path> dir = kb_dir ? std::optional<fs::path>(*kb_dir) : std::nullopt;
            ChunkingOptions chunking;
            if (!dir) {
                const ServiceConfig config = require_config(config_path, "ingest");
                if (!config.kb_dir) throw Error(ErrorCode::kConfig, "config has no kb_dir");
                dir = config.kb_dir;
                chunking = config.chunking;
            }
            KbStore store(dir, chunking);
            const IngestionReport report = store.ingest(kb_id, read_text_directory(source_dir));
            std::size_t total = 0;
            for (const auto& [doc, n] : report) total += n;
            out << json{{"kb_id", kb_id}, {"report", report}, {"chunks_ingested", total}}.dump(2) << "\n";
        } else if (query->parsed()) {
            App deployment(require_config(config_path, "query"));
            const Mode mode = mode_name.empty() ? deployment.config().default_mode : mode_from_string(mode_name);
            const RunTrace trace = deployment.engine().query(pipeline_id, question, mode);
            if (query_json) {
                out << query_response(trace).dump(2) << "\n";
            } else if (show_trace) {
                print_trace(out, trace);
            } else {
                out << trace.final_answer << "\n";
            }
        } else if (bench->parsed()) {
            SuiteConfig suite = load_suite(suite_path);
            for (auto& [id, h] : builtin_handlers()) suite.handlers.emplace(id, std::move(h));
            const BenchResult result = run_benchmark(suite);
            out << (bench_json ? result.json.dump(2) + "\n" : result.markdown);
        } else if (validate->parsed()) {
            const PipelineSpec spec = load_pipeline_file(pipeline_path);
            json summary;
            if (config_path) {
                App deployment(load_service_config(*config_path));
                Registry registry = deployment.engine().registry();
                summary = plan_summary(validate_pipeline(spec, registry));
                summary["references"] = "resolved";
            } else {
                summary = plan_summary(validate_pipeline(spec, stand_in_registry(spec)));
                summary["references"] = "not checked (no --config)";
            }
            out << summary.dump(2) << "\n";
        } else if (serve_cmd->parsed()) {
            ServiceConfig config = require_config(config_path, "serve");
            if (port) config.port = *port;
            serve(config, err);
        }
    } catch (const Error& e) {
        return report_error(err, e);
    } catch (const std::exception& e) {
        err << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace moa
