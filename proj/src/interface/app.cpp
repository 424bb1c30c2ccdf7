#include "moa/interface/app.hpp"

#include <set>

#include "moa/backends/backend_config.hpp"
#include "moa/backends/mock_backend.hpp"
#include "moa/core/pipeline_config.hpp"

namespace moa {

std::map<std::string, SubprocessHandler> builtin_handlers() {
    std::map<std::string, SubprocessHandler> out;
    out["passage_digest"] = [](const SubprocessCall& call) {
        std::string answer;
        for (std::size_t i = 0; i < call.retrieved.size() && i < 3; ++i) {
            if (!answer.empty()) answer.push_back(' ');
            answer += first_sentence(call.retrieved[i].chunk.text);
        }
        return answer.empty() ? std::string("I don't know.") : answer;
    };
    out["upstream_concat"] = [](const SubprocessCall& call) {
        std::string answer;
        for (const auto& [id, text] : call.upstream_answers) {
            if (!answer.empty()) answer.push_back('\n');
            answer += text;
        }
        return answer;
    };
    return out;
}

App::App(ServiceConfig config) : config_(std::move(config)) {
    store_ = std::make_unique<KbStore>(config_.kb_dir, config_.chunking);
    store_->load_all();

    std::vector<PipelineSpec> pipelines;
    for (const auto& path : config_.pipelines) pipelines.push_back(load_pipeline_file(path));

    for (const auto& [kb_id, src] : config_.knowledge_bases) {
        const auto kb = store_->open(kb_id);
        if (kb->size() > 0) continue;
        store_->ingest(kb_id, src.synthetic ? synthesize_corpus(*src.synthetic) : read_text_directory(*src.source_dir));
    }
    for (const auto& p : pipelines) {
        for (const auto& [id, agent] : p.agents) {
            if (agent.kb_binding) store_->open(*agent.kb_binding);
        }
    }

    Registry registry;
    registry.backends = backends_from_json(config_.backends, config_.backends_base_dir);
    for (const auto& id : store_->kb_ids()) registry.knowledge_bases.emplace(id, store_->get(id));
    for (auto& [id, h] : builtin_handlers()) registry.handlers.emplace(id, std::move(h));

    engine_ = std::make_unique<Engine>(std::move(registry), config_.trace_dir);
    for (const auto& p : pipelines) engine_->add_pipeline(p);
}

IngestionReport App::ingest(const std::string& kb_id, const std::vector<SourceDocument>& documents) {
    return store_->ingest(kb_id, documents);
}

nlohmann::json plan_summary(const ExecutionPlan& plan) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& layer : plan.pipeline.layers) {
        for (const auto& id : layer) {
            const AgentSpec& a = plan.pipeline.agent(id);
            nlohmann::json rec = {{"agent_id", id},
                                  {"role", to_string(a.role)},
                                  {"layer", plan.layer_of(id)},
                                  {"upstream", plan.edge_map.at(id)}};
            if (a.model) rec["backend_id"] = a.model->backend_id;
            if (a.kb_binding) {
                rec["kb_binding"] = *a.kb_binding;
                rec["top_k"] = a.top_k;
            }
            if (a.handler) rec["handler"] = *a.handler;
            agents.push_back(std::move(rec));
        }
    }
    return {{"pipeline_id", plan.pipeline.pipeline_id},
            {"layers", plan.pipeline.layers},
            {"node_count", plan.node_count()},
            {"parallelism_limit", plan.pipeline.parallelism_limit},
            {"agents", agents}};
}

nlohmann::json query_response(const RunTrace& trace) {
    nlohmann::json answers = nlohmann::json::array();
    for (const auto& n : trace.node_outputs) {
        if (n.role != Role::kWorker && n.role != Role::kSubprocess) continue;
        answers.push_back({{"agent_id", n.agent_id},
                           {"answer", n.answer},
                           {"abstained", n.guard.abstained},
                           {"grounding_score", n.guard.grounding_score}});
    }
    return {{"run_id", trace.run_id}, {"final_answer", trace.final_answer}, {"agent_answers", answers}};
}

}  // namespace moa
