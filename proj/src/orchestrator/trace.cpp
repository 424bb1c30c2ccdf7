#include "moa/orchestrator/trace.hpp"

#include <fstream>
#include <sstream>

#include "moa/error.hpp"
#include "moa/retrieval/kb_store.hpp"

namespace moa {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Mode mode) { return mode == Mode::kParallel ? "parallel" : "serial"; }

Mode mode_from_string(std::string_view name) {
    if (name == "serial") return Mode::kSerial;
    if (name == "parallel") return Mode::kParallel;
    throw Error(ErrorCode::kInvalidValue, "unknown mode '" + std::string(name) + "' (expected serial or parallel)");
}

const NodeOutput* RunTrace::find(std::string_view agent_id) const {
    for (const auto& n : node_outputs) {
        if (n.agent_id == agent_id) return &n;
    }
    return nullptr;
}

std::size_t RunTrace::passages_considered() const {
    std::size_t n = 0;
    for (const auto& node : node_outputs) n += node.retrieved.size();
    return n;
}

namespace {

json node_to_json(const NodeOutput& n) {
    json retrieved = json::array();
    for (const auto& sc : n.retrieved) {
        retrieved.push_back({{"chunk_id", sc.chunk.chunk_id},
                             {"doc_id", sc.chunk.doc_id},
                             {"position", sc.chunk.position},
                             {"text", sc.chunk.text},
                             {"score", sc.score}});
    }
    json flagged = json::array();
    for (const auto& f : n.guard.flagged_sentences) {
        flagged.push_back({{"sentence", f.sentence}, {"max_similarity", f.max_similarity}});
    }
    return json{
        {"agent_id", n.agent_id},
        {"role", std::string(to_string(n.role))},
        {"layer", n.layer},
        {"question", n.question},
        {"upstream_ids", n.upstream_ids},
        {"answer", n.answer},
        {"retrieved", retrieved},
        {"rendered_prompt", n.rendered_prompt},
        {"completion",
         {{"text", n.completion.text},
          {"prompt_tokens", n.completion.prompt_tokens},
          {"output_tokens", n.completion.output_tokens},
          {"latency_us", n.completion.latency.count()},
          {"backend_id", n.completion.backend_id}}},
        {"guard",
         {{"abstained", n.guard.abstained},
          {"grounding_score", n.guard.grounding_score},
          {"flagged_sentences", flagged},
          {"passed", n.guard.passed}}},
        {"started_at_us", n.started_at.count()},
        {"ended_at_us", n.ended_at.count()},
        {"retrieval_time_us", n.retrieval_time.count()},
    };
}

NodeOutput node_from_json(const json& j) {
    NodeOutput n;
    n.agent_id = j.at("agent_id").get<std::string>();
    n.role = role_from_string(j.at("role").get<std::string>());
    n.layer = j.at("layer").get<std::size_t>();
    n.question = j.at("question").get<std::string>();
    n.upstream_ids = j.at("upstream_ids").get<std::vector<std::string>>();
    n.answer = j.at("answer").get<std::string>();
    for (const auto& r : j.at("retrieved")) {
        ScoredChunk sc;
        sc.chunk.chunk_id = r.at("chunk_id").get<std::string>();
        sc.chunk.doc_id = r.at("doc_id").get<std::string>();
        sc.chunk.position = r.at("position").get<std::size_t>();
        sc.chunk.text = r.at("text").get<std::string>();
        sc.score = r.at("score").get<double>();
        n.retrieved.push_back(std::move(sc));
    }
    n.rendered_prompt = j.at("rendered_prompt").get<std::string>();
    const auto& c = j.at("completion");
    n.completion.text = c.at("text").get<std::string>();
    n.completion.prompt_tokens = c.at("prompt_tokens").get<std::size_t>();
    n.completion.output_tokens = c.at("output_tokens").get<std::size_t>();
    n.completion.latency = std::chrono::microseconds(c.at("latency_us").get<std::int64_t>());
    n.completion.backend_id = c.at("backend_id").get<std::string>();
    const auto& g = j.at("guard");
    n.guard.abstained = g.at("abstained").get<bool>();
    n.guard.grounding_score = g.at("grounding_score").get<double>();
    for (const auto& f : g.at("flagged_sentences")) {
        n.guard.flagged_sentences.push_back({f.at("sentence").get<std::string>(), f.at("max_similarity").get<double>()});
    }
    n.guard.passed = g.at("passed").get<bool>();
    n.started_at = std::chrono::microseconds(j.at("started_at_us").get<std::int64_t>());
    n.ended_at = std::chrono::microseconds(j.at("ended_at_us").get<std::int64_t>());
    n.retrieval_time = std::chrono::microseconds(j.at("retrieval_time_us").get<std::int64_t>());
    return n;
}

}  // namespace

json trace_to_json(const RunTrace& t) {
    json nodes = json::array();
    for (const auto& n : t.node_outputs) nodes.push_back(node_to_json(n));
    json j{{"run_id", t.run_id},
           {"pipeline_id", t.pipeline_id},
           {"question", t.question},
           {"mode", std::string(to_string(t.mode))},
           {"node_outputs", nodes},
           {"final_answer", t.final_answer},
           {"total_wall_time_us", t.total_wall_time.count()},
           {"status", t.status}};
    j["failing_node"] = t.failing_node ? json(*t.failing_node) : json(nullptr);
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    return j;
}

RunTrace trace_from_json(const json& j) {
    try {
        RunTrace t;
        t.run_id = j.at("run_id").get<std::string>();
        t.pipeline_id = j.at("pipeline_id").get<std::string>();
        t.question = j.at("question").get<std::string>();
        t.mode = mode_from_string(j.at("mode").get<std::string>());
        for (const auto& n : j.at("node_outputs")) t.node_outputs.push_back(node_from_json(n));
        t.final_answer = j.at("final_answer").get<std::string>();
        t.total_wall_time = std::chrono::microseconds(j.at("total_wall_time_us").get<std::int64_t>());
        t.status = j.at("status").get<std::string>();
        if (j.contains("failing_node") && j["failing_node"].is_string()) t.failing_node = j["failing_node"].get<std::string>();
        if (j.contains("error") && j["error"].is_string()) t.error = j["error"].get<std::string>();
        return t;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidValue, std::string("malformed trace: ") + e.what());
    }
}

TraceStore::TraceStore(std::optional<fs::path> directory) : directory_(std::move(directory)) {
    if (directory_) {
        std::error_code ec;
        fs::create_directories(*directory_, ec);
        if (ec) throw Error(ErrorCode::kIo, "cannot create trace directory " + directory_->string() + ": " + ec.message());
    }
}

std::string TraceStore::save(const RunTrace& trace) {
    if (!is_safe_identifier(trace.run_id)) throw Error(ErrorCode::kInvalidValue, "invalid run_id '" + trace.run_id + "'");
    std::string text = trace_to_json(trace).dump(2);
    std::lock_guard lock(mu_);
    if (directory_) {
        const fs::path path = *directory_ / (trace.run_id + ".trace.json");
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
            out << text;
            if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) throw Error(ErrorCode::kIo, "cannot persist " + path.string() + ": " + ec.message());
    } else {
        memory_[trace.run_id] = text;
    }
    return text;
}

std::optional<std::string> TraceStore::load(const std::string& run_id) const {
    if (!is_safe_identifier(run_id)) return std::nullopt;
    std::lock_guard lock(mu_);
    if (!directory_) {
        const auto it = memory_.find(run_id);
        if (it == memory_.end()) return std::nullopt;
        return it->second;
    }
    std::ifstream in(*directory_ / (run_id + ".trace.json"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace moa
