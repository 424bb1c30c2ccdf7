#include <gtest/gtest.h>

#include <random>
#include <set>

#include "moa/core/pipeline_config.hpp"
#include "moa/core/plan.hpp"
#include "moa/error.hpp"
#include "test_support.hpp"

using namespace moa;
using namespace moa::testing;

namespace {

Error error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "expected an exception";
    return Error(ErrorCode::kConfig, "none");
}

const char* kThreePlusOne = R"({
  "pipeline_id": "desk",
  "layers": [["a", "b", "c"], ["agg"]],
  "agents": {
    "a": {"role": "worker", "model": {"backend_id": "mock", "model_name": "m"}, "kb_binding": "kb"},
    "b": {"role": "worker", "model": {"backend_id": "mock", "model_name": "m"}, "kb_binding": "kb", "top_k": 5},
    "c": {"role": "worker", "model": {"backend_id": "mock", "model_name": "m"}},
    "agg": {"role": "aggregator", "model": {"backend_id": "mock", "model_name": "m", "temperature": 0.7}}
  }
})";

Registry registry() {
    Registry r;
    r.backends.emplace("mock", echo_backend("mock"));
    r.knowledge_bases.emplace("kb", make_kb("kb", {{"d", "some text."}}));
    r.handlers.emplace("digest", [](const SubprocessCall&) { return std::string("digest"); });
    return r;
}

PipelineSpec planner_pipeline() {
    PipelineSpec p;
    p.pipeline_id = "planned";
    p.layers = {{"planner"}, {"w1", "w2"}, {"agg"}};
    p.agents.emplace("planner", planner("planner", "mock"));
    p.agents.emplace("w1", worker("w1", "mock", "kb"));
    p.agents.emplace("w2", worker("w2", "mock"));
    p.agents.emplace("agg", aggregator("agg", "mock"));
    return p;
}

}  // namespace

TEST(ParsePipeline, ThreeWorkersAndAggregatorWithDefaults) {
    const PipelineSpec p = parse_pipeline(kThreePlusOne);
    EXPECT_EQ(p.pipeline_id, "desk");
    ASSERT_EQ(p.layers.size(), 2u);
    EXPECT_EQ(p.agents.size(), 4u);
    EXPECT_EQ(p.parallelism_limit, 8u);
    EXPECT_EQ(p.timeout_per_call, std::chrono::milliseconds(30000));
    EXPECT_EQ(p.retries, 1u);
    const AgentSpec& a = p.agent("a");
    EXPECT_EQ(a.top_k, 30u);
    EXPECT_EQ(a.system_prompt, default_prompt(Role::kWorker));
    EXPECT_TRUE(a.guard_policy.abstention_enabled);
    EXPECT_DOUBLE_EQ(a.guard_policy.min_retrieval_score, 0.2);
    EXPECT_DOUBLE_EQ(a.guard_policy.grounding_threshold, 0.3);
    EXPECT_EQ(p.agent("b").top_k, 5u);
    EXPECT_DOUBLE_EQ(p.agent("agg").model->params.temperature, 0.7);
    EXPECT_EQ(p.agent("agg").model->params.max_output_tokens, 512);
}

TEST(ParsePipeline, ZeroLayers) {
    const Error e = error_of([] { parse_pipeline(R"({"pipeline_id": "p", "layers": [], "agents": {}})"); });
    EXPECT_EQ(e.code(), ErrorCode::kTooFewLayers);
    EXPECT_NE(std::string(e.what()).find("pipeline must have ≥ 2 layers"), std::string::npos);
}

TEST(ParsePipeline, SyntaxErrorCarriesPosition) {
    const Error e = error_of([] { parse_pipeline("{\n  \"pipeline_id\": \"p\",\n  \"layers\": [[\"a\"],\n}"); });
    EXPECT_EQ(e.code(), ErrorCode::kSyntax);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
}

TEST(ParsePipeline, UnknownAndMissingFields) {
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]], "agents": {}, "extra": 1})");
              }).code(),
              ErrorCode::kUnknownField);
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]],
                                     "agents": {"a": {"role": "worker", "colour": "red"}}})");
              }).code(),
              ErrorCode::kUnknownField);
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]],
                                     "agents": {"a": {"role": "worker", "model": {"backend_id": "x", "seed": 1}}}})");
              }).code(),
              ErrorCode::kUnknownField);
    EXPECT_EQ(error_of([] { parse_pipeline(R"({"layers": [["a"],["b"]], "agents": {}})"); }).code(),
              ErrorCode::kMissingField);
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]], "agents": {"a": {}}})");
              }).code(),
              ErrorCode::kMissingField);
}

TEST(ParsePipeline, WrongTypes) {
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]], "agents": {"a": {"role": "boss"}}})");
              }).code(),
              ErrorCode::kInvalidValue);
    EXPECT_EQ(error_of([] {
                  parse_pipeline(R"({"pipeline_id": "p", "layers": [["a"],["b"]],
                                     "agents": {"a": {"role": "worker", "top_k": -1}}})");
              }).code(),
              ErrorCode::kInvalidValue);
    EXPECT_EQ(error_of([] { parse_pipeline(R"({"pipeline_id": 3, "layers": [["a"],["b"]], "agents": {}})"); }).code(),
              ErrorCode::kInvalidValue);
}

TEST(ParsePipeline, RoundTripOnRandomSpecs) {
    std::mt19937_64 rng(99);
    auto coin = [&] { return rng() % 2 == 0; };
    auto pick = [&](std::initializer_list<const char*> xs) { return std::string(*(xs.begin() + rng() % xs.size())); };
    for (int round = 0; round < 300; ++round) {
        PipelineSpec p;
        p.pipeline_id = "p" + std::to_string(round);
        p.parallelism_limit = 1 + rng() % 16;
        p.timeout_per_call = std::chrono::milliseconds(1 + rng() % 100000);
        p.retries = rng() % 4;
        const std::size_t worker_layers = 1 + rng() % 3;
        int next = 0;
        if (coin()) {
            p.layers.push_back({"plan"});
            AgentSpec a = planner("plan", pick({"mock", "gpt"}));
            p.agents.emplace(a.agent_id, a);
        }
        for (std::size_t l = 0; l < worker_layers; ++l) {
            std::vector<std::string> layer;
            const std::size_t width = 1 + rng() % 4;
            for (std::size_t i = 0; i < width; ++i) {
                const std::string id = "n" + std::to_string(next++);
                AgentSpec a;
                if (rng() % 5 == 0) {
                    a.agent_id = id;
                    a.role = Role::kSubprocess;
                    a.handler = pick({"digest", "concat"});
                    a.system_prompt = "";
                } else {
                    a = worker(id, pick({"mock", "gpt"}), coin() ? std::optional<std::string>("kb") : std::nullopt,
                               1 + rng() % 50);
                    a.model->model_name = pick({"", "mistral-7b", "gpt-4o"});
                    a.model->params.temperature = static_cast<double>(rng() % 1000) / 333.0;
                    a.model->params.max_output_tokens = 1 + static_cast<int>(rng() % 4096);
                    a.system_prompt = pick({"Q: {question}\nC: {context}", "“quoted” {question} \\ {context} ✓",
                                            "{question}{context}{upstream}\t"});
                }
                a.guard_policy.abstention_enabled = coin();
                a.guard_policy.min_retrieval_score = static_cast<double>(rng() % 101) / 100.0;
                a.guard_policy.grounding_threshold = static_cast<double>(rng() % 101) / 100.0;
                if (coin()) a.guard_policy.abstention_phrases = {pick({"no idea", "unknown"}), "i don't know"};
                if (l > 0 && coin()) a.upstream = std::vector<std::string>{p.layers.back().front()};
                layer.push_back(id);
                p.agents.emplace(id, a);
            }
            p.layers.push_back(layer);
        }
        p.layers.push_back({"agg"});
        p.agents.emplace("agg", aggregator("agg", "mock"));

        const std::string text = serialize_pipeline(p);
        const PipelineSpec back = parse_pipeline(text);
        ASSERT_EQ(back, p) << text;
        ASSERT_EQ(serialize_pipeline(back), text);
    }
}

TEST(ValidatePipeline, PlannerLayerGetsBipartiteEdges) {
    const ExecutionPlan plan = validate_pipeline(planner_pipeline(), registry());
    EXPECT_TRUE(plan.edge_map.at("planner").empty());
    EXPECT_EQ(plan.edge_map.at("w1"), (std::vector<std::string>{"planner"}));
    EXPECT_EQ(plan.edge_map.at("w2"), (std::vector<std::string>{"planner"}));
    EXPECT_EQ(plan.edge_map.at("agg"), (std::vector<std::string>{"w1", "w2"}));
    EXPECT_EQ(plan.terminal_agent(), "agg");
    EXPECT_EQ(plan.node_count(), 4u);
    EXPECT_EQ(plan.resolved_backends.size(), 4u);
    EXPECT_EQ(plan.resolved_kbs.count("w1"), 1u);
}

TEST(ValidatePipeline, NoEdgeSpansMoreThanOneLayer) {
    PipelineSpec p;
    p.pipeline_id = "deep";
    p.layers = {{"a", "b"}, {"c", "d", "e"}, {"f"}, {"agg"}};
    for (const char* id : {"a", "b", "c", "d", "e", "f"}) p.agents.emplace(id, worker(id, "mock"));
    p.agents.at("d").upstream = std::vector<std::string>{"b"};
    p.agents.emplace("agg", aggregator("agg", "mock"));
    const ExecutionPlan plan = validate_pipeline(p, registry());
    for (const auto& [id, ups] : plan.edge_map) {
        for (const auto& up : ups) EXPECT_EQ(plan.layer_of(up) + 1, plan.layer_of(id)) << up << " -> " << id;
    }
    EXPECT_EQ(plan.edge_map.at("d"), (std::vector<std::string>{"b"}));
    EXPECT_EQ(plan.edge_map.at("c"), (std::vector<std::string>{"a", "b"}));
}

TEST(ValidatePipeline, DuplicateAgent) {
    PipelineSpec p;
    p.pipeline_id = "dup";
    p.layers = {{"w1"}, {"w2"}, {"w1"}};
    p.agents.emplace("w1", worker("w1", "mock"));
    p.agents.emplace("w2", worker("w2", "mock"));
    const Error e = error_of([&] { validate_pipeline(p, registry()); });
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateAgent);
    EXPECT_EQ(std::string(e.what()), "duplicate agent_id w1");
}

TEST(ValidatePipeline, SingleLayer) {
    PipelineSpec p;
    p.pipeline_id = "flat";
    p.layers = {{"w1", "agg"}};
    p.agents.emplace("w1", worker("w1", "mock"));
    p.agents.emplace("agg", aggregator("agg", "mock"));
    const Error e = error_of([&] { validate_pipeline(p, registry()); });
    EXPECT_EQ(e.code(), ErrorCode::kTooFewLayers);
    EXPECT_NE(std::string(e.what()).find("≥ 2 layers required"), std::string::npos);
}

TEST(ValidatePipeline, EachViolationHasItsOwnCode) {
    const PipelineSpec good = planner_pipeline();
    ASSERT_NO_THROW(validate_pipeline(good, registry()));

    std::vector<std::pair<std::string, std::function<void(PipelineSpec&)>>> mutations = {
        {"too few layers", [](PipelineSpec& p) { p.layers = {{"w1", "w2", "planner", "agg"}}; }},
        {"empty layer", [](PipelineSpec& p) { p.layers.insert(p.layers.begin() + 2, std::vector<std::string>{}); }},
        {"duplicate", [](PipelineSpec& p) { p.layers[1].push_back("w1"); }},
        {"unknown agent", [](PipelineSpec& p) { p.layers[1].push_back("ghost"); }},
        {"unreferenced", [](PipelineSpec& p) { p.agents.emplace("extra", worker("extra", "mock")); }},
        {"bad terminal", [](PipelineSpec& p) { p.layers.back().push_back("w3"), p.agents.emplace("w3", worker("w3", "mock")); }},
        {"aggregator misplaced",
         [](PipelineSpec& p) { p.layers[1].push_back("agg2"), p.agents.emplace("agg2", aggregator("agg2", "mock")); }},
        {"planner misplaced",
         [](PipelineSpec& p) { p.layers[1].push_back("p2"), p.agents.emplace("p2", planner("p2", "mock")); }},
        {"invalid agent", [](PipelineSpec& p) { p.agents.at("w1").top_k = 0; }},
        {"bad edge", [](PipelineSpec& p) { p.agents.at("agg").upstream = std::vector<std::string>{"planner"}; }},
        {"unresolved backend", [](PipelineSpec& p) { p.agents.at("w2").model->backend_id = "nowhere"; }},
        {"unresolved kb", [](PipelineSpec& p) { p.agents.at("w1").kb_binding = "nokb"; }},
        {"unresolved handler",
         [](PipelineSpec& p) {
             AgentSpec s;
             s.agent_id = "w2";
             s.role = Role::kSubprocess;
             s.handler = "missing";
             p.agents.at("w2") = s;
         }},
    };
    const std::vector<ErrorCode> expected = {
        ErrorCode::kTooFewLayers,     ErrorCode::kEmptyLayer,        ErrorCode::kDuplicateAgent,
        ErrorCode::kUnknownAgent,     ErrorCode::kUnreferencedAgent, ErrorCode::kBadTerminal,
        ErrorCode::kAggregatorMisplaced, ErrorCode::kPlannerMisplaced, ErrorCode::kInvalidAgent,
        ErrorCode::kBadEdge,          ErrorCode::kUnresolvedBackend, ErrorCode::kUnresolvedKb,
        ErrorCode::kUnresolvedHandler};
    std::set<ErrorCode> distinct;
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        PipelineSpec p = good;
        mutations[i].second(p);
        const Error e = error_of([&] { validate_pipeline(p, registry()); });
        EXPECT_EQ(e.code(), expected[i]) << mutations[i].first << ": " << e.what();
        distinct.insert(e.code());
    }
    EXPECT_EQ(distinct.size(), mutations.size());
}

TEST(ValidatePipeline, AgentInvariants) {
    auto check = [](const std::function<void(AgentSpec&)>& mutate) {
        PipelineSpec p = planner_pipeline();
        mutate(p.agents.at("w1"));
        return error_of([&] { validate_pipeline(p, registry()); }).code();
    };
    EXPECT_EQ(check([](AgentSpec& a) { a.model.reset(); }), ErrorCode::kInvalidAgent);
    EXPECT_EQ(check([](AgentSpec& a) { a.model->params.temperature = -0.1; }), ErrorCode::kInvalidAgent);
    EXPECT_EQ(check([](AgentSpec& a) { a.model->params.max_output_tokens = 0; }), ErrorCode::kInvalidAgent);
    EXPECT_EQ(check([](AgentSpec& a) { a.guard_policy.grounding_threshold = 1.5; }), ErrorCode::kInvalidAgent);
    EXPECT_EQ(check([](AgentSpec& a) { a.handler = "digest"; }), ErrorCode::kInvalidAgent);

    PipelineSpec p = planner_pipeline();
    p.agents.at("agg").kb_binding = "kb";
    EXPECT_EQ(error_of([&] { validate_pipeline(p, registry()); }).code(), ErrorCode::kInvalidAgent);
}

TEST(ValidatePipeline, SubprocessNodeResolvesHandler) {
    PipelineSpec p = planner_pipeline();
    AgentSpec s;
    s.agent_id = "w2";
    s.role = Role::kSubprocess;
    s.handler = "digest";
    p.agents.at("w2") = s;
    const ExecutionPlan plan = validate_pipeline(p, registry());
    EXPECT_EQ(plan.resolved_handlers.count("w2"), 1u);
    EXPECT_EQ(plan.resolved_backends.count("w2"), 0u);
}

TEST(SingleAgentPlan, OneNodeNoEdges) {
    const ExecutionPlan plan = make_single_agent_plan(worker("solo", "mock", "kb"), registry());
    EXPECT_TRUE(plan.single_agent);
    EXPECT_EQ(plan.node_count(), 1u);
    EXPECT_EQ(plan.terminal_agent(), "solo");
    EXPECT_EQ(error_of([] { make_single_agent_plan(aggregator("a", "mock"), registry()); }).code(),
              ErrorCode::kInvalidAgent);
}

TEST(Roles, StringRoundTrip) {
    for (Role r : {Role::kPlanner, Role::kWorker, Role::kAggregator, Role::kSubprocess}) {
        EXPECT_EQ(role_from_string(to_string(r)), r);
    }
    EXPECT_EQ(error_of([] { role_from_string("chief"); }).code(), ErrorCode::kInvalidValue);
}

TEST(ErrorCodes, ConfigVersusRuntime) {
    EXPECT_TRUE(is_config_error(ErrorCode::kDuplicateAgent));
    EXPECT_TRUE(is_config_error(ErrorCode::kSyntax));
    EXPECT_FALSE(is_config_error(ErrorCode::kTimeout));
    EXPECT_FALSE(is_config_error(ErrorCode::kNodeFailure));
    EXPECT_EQ(code_name(ErrorCode::kDuplicateAgent), "duplicate_agent");
}
