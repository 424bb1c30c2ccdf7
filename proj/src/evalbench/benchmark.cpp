#include "moa/evalbench/benchmark.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "moa/backends/backend_config.hpp"
#include "moa/core/pipeline_config.hpp"
#include "moa/core/plan.hpp"
#include "moa/error.hpp"
#include "moa/orchestrator/engine.hpp"
#include "moa/retrieval/kb_store.hpp"

namespace moa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, "suite: " + what); }

void allow_only(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    if (!obj.is_object()) bad(where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; })) {
            bad("unknown field '" + k + "' in " + where);
        }
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad(where + "." + key + " is missing or has the wrong type");
    }
}

std::size_t positive(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) bad(where + "." + key + " must be a positive integer");
    return v.get<std::size_t>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) bad(path.string() + " is not valid JSON");
    return doc;
}

BenchKbSource kb_source(const json& v, const fs::path& base, const std::string& where) {
    allow_only(v, {"synthetic", "source_dir"}, where);
    BenchKbSource src;
    if (v.contains("synthetic")) {
        const auto& s = v.at("synthetic");
        allow_only(s, {"documents", "document_chars", "seed", "topic"}, where + ".synthetic");
        SyntheticCorpusSpec spec;
        if (s.contains("documents")) spec.documents = positive(s, "documents", where);
        if (s.contains("document_chars")) spec.document_chars = positive(s, "document_chars", where);
        if (s.contains("seed")) spec.seed = get<std::uint64_t>(s, "seed", where);
        if (s.contains("topic")) spec.topic = get<std::string>(s, "topic", where);
        src.synthetic = spec;
    }
    if (v.contains("source_dir")) src.source_dir = resolve(base, get<std::string>(v, "source_dir", where));
    if (src.synthetic.has_value() == src.source_dir.has_value()) bad(where + " needs exactly one of synthetic, source_dir");
    return src;
}

BenchConfiguration configuration(const json& v, const std::string& where) {
    allow_only(v, {"label", "pipeline_id", "agent", "mode", "repetitions", "backend_overrides", "max_concurrent_users",
                   "metadata"},
               where);
    BenchConfiguration c;
    c.label = get<std::string>(v, "label", where);
    if (v.contains("pipeline_id")) c.pipeline_id = get<std::string>(v, "pipeline_id", where);
    if (v.contains("agent")) c.agent = get<std::string>(v, "agent", where);
    if (c.pipeline_id.has_value() == c.agent.has_value()) bad(where + " needs exactly one of pipeline_id, agent");
    if (v.contains("mode")) {
        try {
            c.mode = mode_from_string(get<std::string>(v, "mode", where));
        } catch (const Error& e) {
            bad(where + ".mode: " + e.what());
        }
    }
    if (v.contains("repetitions")) c.repetitions = positive(v, "repetitions", where);
    if (v.contains("backend_overrides")) {
        c.backend_overrides = get<std::map<std::string, std::string>>(v, "backend_overrides", where);
    }
    if (v.contains("max_concurrent_users")) c.max_concurrent_users = positive(v, "max_concurrent_users", where);
    if (v.contains("metadata")) c.metadata = get<std::map<std::string, std::string>>(v, "metadata", where);
    return c;
}

void apply_overrides(AgentSpec& agent, const std::map<std::string, std::string>& overrides) {
    if (!agent.model) return;
    if (const auto it = overrides.find(agent.agent_id); it != overrides.end()) {
        agent.model->backend_id = it->second;
    } else if (const auto all = overrides.find("*"); all != overrides.end()) {
        agent.model->backend_id = all->second;
    }
}

void check_override_keys(const BenchConfiguration& c, const std::set<std::string>& agent_ids) {
    for (const auto& [k, v] : c.backend_overrides) {
        if (k != "*" && !agent_ids.count(k)) {
            bad("configuration '" + c.label + "' overrides the backend of unknown agent '" + k + "'");
        }
    }
}

}  // namespace

SuiteConfig suite_from_json(const json& doc, const fs::path& base_dir) {
    allow_only(doc, {"suite_id", "baseline", "repetitions", "questions", "backends", "backends_file", "chunking",
                     "knowledge_bases", "pipelines", "agents", "timeout_per_call_ms", "retries", "trace_dir",
                     "configurations"},
               "suite");
    SuiteConfig s;
    if (doc.contains("suite_id")) s.suite_id = get<std::string>(doc, "suite_id", "suite");
    s.baseline = get<std::string>(doc, "baseline", "suite");
    if (doc.contains("repetitions")) {
        const auto& r = doc.at("repetitions");
        if (!r.is_number_integer() || r.get<long long>() < 1) bad("repetitions must be a positive integer");
        s.repetitions = r.get<std::size_t>();
    }
    s.questions = get<std::vector<std::string>>(doc, "questions", "suite");
    if (s.questions.empty()) bad("questions must not be empty");

    if (doc.contains("backends") == doc.contains("backends_file")) bad("needs exactly one of backends, backends_file");
    if (doc.contains("backends")) {
        s.backends = backends_from_json(doc.at("backends"), base_dir);
    } else {
        const fs::path file = resolve(base_dir, get<std::string>(doc, "backends_file", "suite"));
        s.backends = backends_from_json(read_json(file), file.parent_path());
    }

    if (doc.contains("chunking")) {
        const auto& c = doc.at("chunking");
        allow_only(c, {"window", "overlap"}, "suite.chunking");
        if (c.contains("window")) s.chunking.window = positive(c, "window", "suite.chunking");
        if (c.contains("overlap")) s.chunking.overlap = get<std::size_t>(c, "overlap", "suite.chunking");
    }
    if (doc.contains("knowledge_bases")) {
        for (const auto& [id, v] : doc.at("knowledge_bases").items()) {
            s.knowledge_bases[id] = kb_source(v, base_dir, "knowledge_bases." + id);
        }
    }
    if (doc.contains("pipelines")) {
        const auto& list = doc.at("pipelines");
        if (!list.is_array()) bad("pipelines must be an array");
        for (const auto& p : list) {
            if (p.is_string()) {
                s.pipelines.push_back(load_pipeline_file(resolve(base_dir, p.get<std::string>())));
            } else {
                s.pipelines.push_back(pipeline_from_json(p));
            }
        }
    }
    if (doc.contains("agents")) {
        const auto& agents = doc.at("agents");
        if (!agents.is_object()) bad("agents must be an object");
        for (const auto& [id, v] : agents.items()) s.agents.emplace(id, agent_from_json(id, v, "suite.agents"));
    }
    if (doc.contains("timeout_per_call_ms")) {
        s.timeout_per_call = std::chrono::milliseconds(positive(doc, "timeout_per_call_ms", "suite"));
    }
    if (doc.contains("retries")) s.retries = get<std::size_t>(doc, "retries", "suite");
    if (doc.contains("trace_dir")) s.trace_dir = resolve(base_dir, get<std::string>(doc, "trace_dir", "suite"));

    const auto& confs = doc.contains("configurations") ? doc.at("configurations") : json();
    if (!confs.is_array() || confs.empty()) bad("configurations must be a non-empty array");
    for (std::size_t i = 0; i < confs.size(); ++i) {
        s.configurations.push_back(configuration(confs[i], "configurations[" + std::to_string(i) + "]"));
    }
    return s;
}

SuiteConfig load_suite(const fs::path& path) { return suite_from_json(read_json(path), path.parent_path()); }

BenchResult run_benchmark(const SuiteConfig& suite) {
    if (suite.configurations.empty()) bad("no configurations");
    if (suite.questions.empty()) bad("no questions");
    if (suite.repetitions == 0) bad("repetitions must be at least 1");

    KbStore store(std::nullopt, suite.chunking);
    Registry registry;
    registry.backends = suite.backends;
    for (const auto& [id, h] : suite.handlers) registry.handlers.emplace(id, h);
    for (const auto& [kb_id, src] : suite.knowledge_bases) {
        const auto docs = src.synthetic ? synthesize_corpus(*src.synthetic) : read_text_directory(*src.source_dir);
        store.ingest(kb_id, docs);
        registry.knowledge_bases.emplace(kb_id, store.get(kb_id));
    }
    Engine engine(std::move(registry), suite.trace_dir);

    BenchResult result;
    for (const auto& conf : suite.configurations) {
        const std::size_t reps = conf.repetitions.value_or(suite.repetitions);
        if (reps == 0) bad("configuration '" + conf.label + "': repetitions must be at least 1");

        ExecutionPlan plan;
        if (conf.pipeline_id) {
            const auto it = std::find_if(suite.pipelines.begin(), suite.pipelines.end(),
                                         [&](const PipelineSpec& p) { return p.pipeline_id == *conf.pipeline_id; });
            if (it == suite.pipelines.end()) bad("configuration '" + conf.label + "': unknown pipeline '" + *conf.pipeline_id + "'");
            PipelineSpec spec = *it;
            std::set<std::string> ids;
            for (auto& [id, agent] : spec.agents) {
                ids.insert(id);
                apply_overrides(agent, conf.backend_overrides);
            }
            check_override_keys(conf, ids);
            plan = validate_pipeline(spec, engine.registry());
        } else {
            const auto it = suite.agents.find(*conf.agent);
            if (it == suite.agents.end()) bad("configuration '" + conf.label + "': unknown agent '" + *conf.agent + "'");
            AgentSpec agent = it->second;
            check_override_keys(conf, {agent.agent_id});
            apply_overrides(agent, conf.backend_overrides);
            plan = make_single_agent_plan(agent, engine.registry(), suite.timeout_per_call, suite.retries);
        }

        TraceGroup group{conf.label, {}, conf.max_concurrent_users, conf.metadata};
        for (std::size_t r = 0; r < reps; ++r) {
            const std::string& question = suite.questions[r % suite.questions.size()];
            try {
                group.traces.push_back(engine.run(plan, question, conf.mode));
            } catch (const RunFailure& f) {
                throw Error(ErrorCode::kNodeFailure, "benchmark aborted in configuration '" + conf.label + "': run '" +
                                                         f.trace().run_id + "' failed: " + f.what());
            }
        }
        result.groups.push_back(std::move(group));
    }
    result.report = measure_run(result.groups, suite.baseline);
    result.markdown = render_markdown(result.report);
    result.json = report_to_json(result.report);
    return result;
}

}  // namespace moa
