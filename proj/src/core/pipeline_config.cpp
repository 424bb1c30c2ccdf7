#include "moa/core/pipeline_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "moa/error.hpp"

namespace moa {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string_view>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw Error(ErrorCode::kUnknownField, "unknown field '" + where + "." + key + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw Error(ErrorCode::kMissingField, "missing required field '" + where + "." + key + "'");
    return obj[key];
}

[[noreturn]] void bad_type(const std::string& path, const char* expected) {
    throw Error(ErrorCode::kInvalidValue, "field '" + path + "' must be " + expected);
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) bad_type(path, "a string");
    return v.get<std::string>();
}

std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad_type(path, "a non-negative integer");
    return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& path) {
    if (!v.is_number()) bad_type(path, "a number");
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) bad_type(path, "a boolean");
    return v.get<bool>();
}

std::vector<std::string> as_string_list(const json& v, const std::string& path) {
    if (!v.is_array()) bad_type(path, "an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v) out.push_back(as_string(item, path + "[]"));
    return out;
}

ModelRef model_from_json(const json& m, const std::string& where) {
    if (!m.is_object()) bad_type(where, "an object");
    reject_unknown(m, {"backend_id", "model_name", "temperature", "max_output_tokens"}, where);
    ModelRef ref;
    ref.backend_id = as_string(require(m, "backend_id", where), where + ".backend_id");
    if (m.contains("model_name")) ref.model_name = as_string(m["model_name"], where + ".model_name");
    if (m.contains("temperature")) ref.params.temperature = as_real(m["temperature"], where + ".temperature");
    if (m.contains("max_output_tokens")) {
        const auto& v = m["max_output_tokens"];
        if (!v.is_number_integer()) bad_type(where + ".max_output_tokens", "an integer");
        ref.params.max_output_tokens = v.get<int>();
    }
    return ref;
}

GuardPolicy guard_from_json(const json& g, const std::string& where) {
    if (!g.is_object()) bad_type(where, "an object");
    reject_unknown(g, {"abstention_enabled", "min_retrieval_score", "grounding_threshold", "abstention_phrases"},
                   where);
    GuardPolicy p;
    if (g.contains("abstention_enabled")) p.abstention_enabled = as_bool(g["abstention_enabled"], where + ".abstention_enabled");
    if (g.contains("min_retrieval_score")) p.min_retrieval_score = as_real(g["min_retrieval_score"], where + ".min_retrieval_score");
    if (g.contains("grounding_threshold")) p.grounding_threshold = as_real(g["grounding_threshold"], where + ".grounding_threshold");
    if (g.contains("abstention_phrases")) p.abstention_phrases = as_string_list(g["abstention_phrases"], where + ".abstention_phrases");
    return p;
}

std::string describe_position(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

AgentSpec agent_from_json(const std::string& agent_id, const json& record, const std::string& where_prefix) {
    const std::string where = where_prefix + "." + agent_id;
    if (!record.is_object()) bad_type(where, "an object");
    reject_unknown(record, {"role", "model", "system_prompt", "kb_binding", "top_k", "guard_policy", "handler", "upstream"},
                   where);
    AgentSpec a;
    a.agent_id = agent_id;
    a.role = role_from_string(as_string(require(record, "role", where), where + ".role"));
    if (record.contains("model")) a.model = model_from_json(record["model"], where + ".model");
    a.system_prompt = record.contains("system_prompt") ? as_string(record["system_prompt"], where + ".system_prompt")
                                                       : default_prompt(a.role);
    if (record.contains("kb_binding")) a.kb_binding = as_string(record["kb_binding"], where + ".kb_binding");
    if (record.contains("top_k")) a.top_k = as_count(record["top_k"], where + ".top_k");
    if (record.contains("guard_policy")) a.guard_policy = guard_from_json(record["guard_policy"], where + ".guard_policy");
    if (record.contains("handler")) a.handler = as_string(record["handler"], where + ".handler");
    if (record.contains("upstream")) a.upstream = as_string_list(record["upstream"], where + ".upstream");
    return a;
}

json agent_to_json(const AgentSpec& a) {
    json j;
    j["role"] = std::string(to_string(a.role));
    if (a.model) {
        j["model"] = {{"backend_id", a.model->backend_id},
                      {"model_name", a.model->model_name},
                      {"temperature", a.model->params.temperature},
                      {"max_output_tokens", a.model->params.max_output_tokens}};
    }
    j["system_prompt"] = a.system_prompt;
    if (a.kb_binding) j["kb_binding"] = *a.kb_binding;
    j["top_k"] = a.top_k;
    j["guard_policy"] = {{"abstention_enabled", a.guard_policy.abstention_enabled},
                         {"min_retrieval_score", a.guard_policy.min_retrieval_score},
                         {"grounding_threshold", a.guard_policy.grounding_threshold},
                         {"abstention_phrases", a.guard_policy.abstention_phrases}};
    if (a.handler) j["handler"] = *a.handler;
    if (a.upstream) j["upstream"] = *a.upstream;
    return j;
}

PipelineSpec pipeline_from_json(const json& doc) {
    const std::string where = "pipeline";
    if (!doc.is_object()) bad_type(where, "a JSON object");
    reject_unknown(doc, {"pipeline_id", "layers", "agents", "parallelism_limit", "timeout_per_call_ms", "retries"}, where);

    PipelineSpec spec;
    spec.pipeline_id = as_string(require(doc, "pipeline_id", where), "pipeline_id");

    const json& layers = require(doc, "layers", where);
    if (!layers.is_array()) bad_type("layers", "an array of arrays of agent ids");
    for (const auto& layer : layers) spec.layers.push_back(as_string_list(layer, "layers[]"));
    if (spec.layers.size() < 2) {
        throw Error(ErrorCode::kTooFewLayers, "pipeline must have ≥ 2 layers (got " + std::to_string(spec.layers.size()) + ")");
    }

    const json& agents = require(doc, "agents", where);
    if (!agents.is_object()) bad_type("agents", "an object keyed by agent id");
    for (const auto& [id, record] : agents.items()) spec.agents.emplace(id, agent_from_json(id, record));

    if (doc.contains("parallelism_limit")) spec.parallelism_limit = as_count(doc["parallelism_limit"], "parallelism_limit");
    if (doc.contains("timeout_per_call_ms")) {
        spec.timeout_per_call = std::chrono::milliseconds(as_count(doc["timeout_per_call_ms"], "timeout_per_call_ms"));
    }
    if (doc.contains("retries")) spec.retries = as_count(doc["retries"], "retries");
    return spec;
}

PipelineSpec parse_pipeline(std::string_view config_text) {
    json doc;
    try {
        doc = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kSyntax, "syntax error at " + describe_position(config_text, e.byte) + " (byte " +
                                            std::to_string(e.byte) + "): " + e.what());
    }
    return pipeline_from_json(doc);
}

PipelineSpec load_pipeline_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kConfig, "cannot read pipeline config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_pipeline(buf.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

json pipeline_to_json(const PipelineSpec& spec) {
    json agents = json::object();
    for (const auto& [id, a] : spec.agents) agents[id] = agent_to_json(a);
    return json{{"pipeline_id", spec.pipeline_id},
                {"layers", spec.layers},
                {"agents", agents},
                {"parallelism_limit", spec.parallelism_limit},
                {"timeout_per_call_ms", spec.timeout_per_call.count()},
                {"retries", spec.retries}};
}

std::string serialize_pipeline(const PipelineSpec& spec) { return pipeline_to_json(spec).dump(2); }

}  // namespace moa
