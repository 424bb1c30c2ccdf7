#include "moa/backends/backend_config.hpp"

#include <fstream>
#include <set>

#include "moa/backends/http_backend.hpp"
#include "moa/error.hpp"

namespace moa {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw Error(ErrorCode::kConfig, where + ": unknown field '" + key + "'");
    }
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorCode::kConfig, where + ": missing string field '" + key + "'");
    }
    return obj[key].get<std::string>();
}

}  // namespace

std::map<std::string, std::string> load_mock_responses(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kConfig, "cannot read mock script " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kConfig, "mock script " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kConfig, "mock script must be a JSON object");
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw Error(ErrorCode::kConfig, "mock script entry '" + key + "' is not a string");
        out[key] = value.get<std::string>();
    }
    return out;
}

BackendMap backends_from_json(const json& registry, const fs::path& base_dir) {
    if (!registry.is_object()) throw Error(ErrorCode::kConfig, "backend registry must be a JSON object");
    BackendMap out;
    for (const auto& [id, spec] : registry.items()) {
        const std::string where = "backend '" + id + "'";
        if (!spec.is_object()) throw Error(ErrorCode::kConfig, where + " must be an object");
        const std::string type = required_string(spec, "type", where);
        if (type == "mock") {
            reject_unknown(spec, {"type", "mode", "fixed_latency_ms", "script", "responses"}, where);
            MockScript script;
            const std::string mode = spec.value("mode", std::string("echo_context"));
            if (mode == "echo_context") {
                script.mode = MockMode::kEchoContext;
            } else if (mode == "canned") {
                script.mode = MockMode::kCanned;
            } else {
                throw Error(ErrorCode::kConfig, where + ": unknown mock mode '" + mode + "'");
            }
            const auto latency = spec.value("fixed_latency_ms", std::int64_t{0});
            if (latency < 0) throw Error(ErrorCode::kConfig, where + ": fixed_latency_ms must be >= 0");
            script.fixed_latency = std::chrono::milliseconds(latency);
            if (spec.contains("script")) {
                fs::path p = spec["script"].get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                script.canned_responses = load_mock_responses(p);
            }
            if (spec.contains("responses")) {
                for (const auto& [key, text] : spec["responses"].items()) {
                    script.canned_responses[key] = text.get<std::string>();
                }
            }
            out[id] = std::make_shared<MockBackend>(id, std::move(script));
        } else if (type == "http") {
            reject_unknown(spec, {"type", "base_url", "api_key_env", "model_name"}, where);
            HttpBackendConfig cfg;
            cfg.base_url = required_string(spec, "base_url", where);
            cfg.api_key_env = spec.value("api_key_env", std::string());
            cfg.model_name = spec.value("model_name", std::string());
            out[id] = std::make_shared<HttpBackend>(id, std::move(cfg));
        } else {
            throw Error(ErrorCode::kConfig, where + ": unknown type '" + type + "'");
        }
    }
    return out;
}

}  // namespace moa
