#include "moa/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <set>
#include <thread>

#include "moa/guards/guards.hpp"
#include "moa/orchestrator/planner.hpp"
#include "moa/orchestrator/prompts.hpp"
#include "moa/retrieval/embedder.hpp"
#include "moa/util/text.hpp"

namespace moa {

RunFailure::RunFailure(RunTrace partial, ErrorCode cause, const std::string& message)
    : Error(ErrorCode::kNodeFailure, message), trace_(std::move(partial)), cause_(cause) {}

namespace {

using Clock = std::chrono::steady_clock;

const Embedder& default_embedder() {
    static const HashedBagOfWordsEmbedder embedder;
    return embedder;
}

class Run {
public:
    Run(const QueryRequest& request, const ExecutionPlan& plan)
        : request_(request), plan_(plan), start_(Clock::now()) {}

    RunTrace execute() {
        RunTrace trace;
        trace.run_id = request_.run_id;
        trace.pipeline_id = plan_.pipeline.pipeline_id;
        trace.question = request_.question;
        trace.mode = request_.mode;

        const auto& layers = plan_.pipeline.layers;
        for (std::size_t layer = 0; layer < layers.size(); ++layer) {
            auto [outputs, failure] = run_layer(layer);
            for (auto& out : outputs) {
                index_[out.agent_id] = done_.size();
                done_.push_back(std::move(out));
            }
            if (failure) {
                trace.node_outputs = done_;
                trace.status = "failed";
                trace.failing_node = failure->agent_id;
                trace.error = failure->message;
                trace.total_wall_time = elapsed();
                throw RunFailure(std::move(trace), failure->cause, failure->message);
            }
            if (layer == 0) assign_questions();
        }

        trace.node_outputs = done_;
        trace.final_answer = done_.at(index_.at(plan_.terminal_agent())).answer;
        trace.total_wall_time = elapsed();
        return trace;
    }

private:
    struct Failure {
        std::string agent_id;
        ErrorCode cause;
        std::string message;
    };

    std::chrono::microseconds elapsed() const {
        return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start_);
    }

    // Slots are written by distinct workers; earlier layers are read-only
    // while a layer runs.
    std::pair<std::vector<NodeOutput>, std::optional<Failure>> run_layer(std::size_t layer) {
        const auto& ids = plan_.pipeline.layers[layer];
        const std::size_t n = ids.size();
        std::vector<std::optional<NodeOutput>> results(n);
        std::vector<std::exception_ptr> errors(n);
        std::atomic<bool> failed{false};

        auto work = [&](std::size_t i) {
            try {
                results[i] = execute_node(ids[i], layer);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        };

        if (request_.mode == Mode::kSerial || n == 1) {
            for (std::size_t i = 0; i < n && !failed; ++i) work(i);
        } else {
            std::atomic<std::size_t> next{0};
            const std::size_t width = std::min(std::max<std::size_t>(plan_.pipeline.parallelism_limit, 1), n);
            std::vector<std::jthread> pool;
            pool.reserve(width);
            for (std::size_t t = 0; t < width; ++t) {
                pool.emplace_back([&] {
                    for (;;) {
                        if (failed) return;
                        const std::size_t i = next.fetch_add(1);
                        if (i >= n) return;
                        work(i);
                    }
                });
            }
        }

        std::vector<NodeOutput> outputs;
        std::optional<Failure> failure;
        for (std::size_t i = 0; i < n; ++i) {
            if (results[i]) outputs.push_back(std::move(*results[i]));
            if (errors[i] && !failure) failure = describe(ids[i], errors[i]);
        }
        return {std::move(outputs), std::move(failure)};
    }

    static Failure describe(const std::string& agent_id, const std::exception_ptr& error) {
        try {
            std::rethrow_exception(error);
        } catch (const Error& e) {
            return {agent_id, e.code(),
                    "node '" + agent_id + "' failed: " + std::string(code_name(e.code())) + ": " + e.what()};
        } catch (const std::exception& e) {
            return {agent_id, ErrorCode::kNodeFailure, "node '" + agent_id + "' failed: " + e.what()};
        }
    }

    void assign_questions() {
        const auto& layers = plan_.pipeline.layers;
        const std::string& first = layers[0].front();
        if (plan_.pipeline.agent(first).role != Role::kPlanner || layers.size() < 2) return;
        std::vector<std::string> workers;
        for (const auto& id : layers[1]) {
            if (plan_.pipeline.agent(id).role != Role::kAggregator) workers.push_back(id);
        }
        assignments_ = plan_assignments(done_.at(index_.at(first)).answer, workers, request_.question).assignments;
    }

    NodeOutput execute_node(const std::string& agent_id, std::size_t layer) const {
        const AgentSpec& agent = plan_.pipeline.agent(agent_id);
        NodeOutput out;
        out.agent_id = agent_id;
        out.role = agent.role;
        out.layer = layer;
        out.started_at = elapsed();
        if (const auto it = plan_.edge_map.find(agent_id); it != plan_.edge_map.end()) out.upstream_ids = it->second;
        const auto assigned = assignments_.find(agent_id);
        out.question = assigned != assignments_.end() ? assigned->second : request_.question;

        std::vector<NodeOutput> upstream;
        for (const auto& id : out.upstream_ids) upstream.push_back(done_.at(index_.at(id)));

        const KnowledgeBase* kb = nullptr;
        if (const auto it = plan_.resolved_kbs.find(agent_id); it != plan_.resolved_kbs.end()) kb = it->second.get();
        if (kb != nullptr && agent.top_k > 0) {
            const auto t0 = Clock::now();
            out.retrieved = search(*kb, out.question, agent.top_k);
            out.retrieval_time = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0);
        }
        const Embedder& embedder = kb != nullptr ? kb->embedder() : default_embedder();

        switch (agent.role) {
            case Role::kPlanner: {
                std::vector<AgentSpec> workers;
                if (plan_.pipeline.layers.size() > 1) {
                    for (const auto& id : plan_.pipeline.layers[1]) {
                        if (plan_.pipeline.agent(id).role != Role::kAggregator) {
                            workers.push_back(plan_.pipeline.agent(id));
                        }
                    }
                }
                out.rendered_prompt = render_planner_prompt(agent, out.question, workers);
                out.completion = call_model(agent, out.rendered_prompt, out.question);
                out.guard.grounding_score = 1.0;  // planner output is routing, not an answer
                out.guard.passed = true;
                break;
            }
            case Role::kWorker:
                out.rendered_prompt = render_worker_prompt(agent, out.question, out.retrieved, upstream);
                out.completion = call_model(agent, out.rendered_prompt, out.question);
                out.guard = grounding_check(out.completion.text, out.retrieved, agent.guard_policy, embedder);
                break;
            case Role::kAggregator: {
                out.rendered_prompt = render_aggregator_prompt(agent, out.question, upstream);
                out.completion = call_model(agent, out.rendered_prompt, out.question);
                const auto evidence = evidence_so_far();
                out.guard = grounding_check(out.completion.text, evidence, agent.guard_policy, embedder);
                break;
            }
            case Role::kSubprocess:
                out.completion = call_handler(agent, out.question, out.retrieved, upstream);
                out.guard = grounding_check(out.completion.text, out.retrieved, agent.guard_policy, embedder);
                break;
        }
        out.answer = out.completion.text;
        out.ended_at = elapsed();
        return out;
    }

    CompletionResult call_model(const AgentSpec& agent, const std::string& prompt, const std::string& question) const {
        const auto& backend = plan_.resolved_backends.at(agent.agent_id);
        CompletionRequest req{prompt, question, agent.model->params};
        CallContext ctx{agent.agent_id, agent.model->model_name, plan_.pipeline.timeout_per_call};
        return invoke(*backend, req, ctx, plan_.pipeline.retries);
    }

    CompletionResult call_handler(const AgentSpec& agent, const std::string& question,
                                  std::span<const ScoredChunk> retrieved,
                                  const std::vector<NodeOutput>& upstream) const {
        SubprocessCall call{agent.agent_id, question, retrieved, {}};
        for (const auto& up : upstream) {
            if (up.role != Role::kPlanner) call.upstream_answers.emplace_back(up.agent_id, up.answer);
        }
        const auto& handler = plan_.resolved_handlers.at(agent.agent_id);
        const auto t0 = Clock::now();
        CompletionResult result;
        result.text = handler(call);
        result.latency = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0);
        result.output_tokens = estimate_tokens(result.text);
        result.backend_id = "subprocess:" + *agent.handler;
        return result;
    }

    // The aggregator is graded against every passage retrieved earlier in
    // the run, since that is what its upstream answers were built from.
    std::vector<ScoredChunk> evidence_so_far() const {
        std::vector<ScoredChunk> evidence;
        std::set<std::string> seen;
        for (const auto& node : done_) {
            for (const auto& sc : node.retrieved) {
                if (seen.insert(sc.chunk.chunk_id).second) evidence.push_back(sc);
            }
        }
        return evidence;
    }

    const QueryRequest& request_;
    const ExecutionPlan& plan_;
    Clock::time_point start_;
    std::vector<NodeOutput> done_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::string> assignments_;
};

}  // namespace

RunTrace run_pipeline(const QueryRequest& request, const ExecutionPlan& plan) {
    if (trim(request.question).empty()) throw Error(ErrorCode::kPrecondition, "question must be non-empty");
    return Run(request, plan).execute();
}

}  // namespace moa
