#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "moa/backends/backend_config.hpp"
#include "moa/backends/http_backend.hpp"
#include "moa/backends/mock_backend.hpp"
#include "moa/error.hpp"
#include "test_support.hpp"

using namespace moa;
using namespace std::chrono_literals;
using moa::testing::TempDir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorCode::kConfig;
}

CompletionRequest request(std::string system, std::string user = "question?") {
    return CompletionRequest{std::move(system), std::move(user), {}};
}

CallContext ctx(std::string agent = "a1", std::chrono::milliseconds timeout = 30000ms) {
    return CallContext{std::move(agent), "", timeout};
}

// Fails with `code` for the first `failures` calls, then answers "ok".
class FlakyBackend final : public Backend {
public:
    FlakyBackend(int failures, ErrorCode code) : failures_(failures), code_(code) {}
    const std::string& id() const noexcept override { return id_; }
    CompletionResult complete(const CompletionRequest&, const CallContext&) const override {
        if (calls_.fetch_add(1) < failures_) throw Error(code_, "flaky");
        return CompletionResult{"ok", 0, 1, {}, id_};
    }
    int calls() const { return calls_.load(); }

private:
    std::string id_ = "flaky";
    int failures_;
    ErrorCode code_;
    mutable std::atomic<int> calls_{0};
};

class StubServer {
public:
    StubServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(Fingerprint, StableAndParamIndependent) {
    const auto r = request("sys", "user");
    CompletionRequest copy = r;
    EXPECT_EQ(fingerprint(r), fingerprint(copy));
    copy.params.temperature = 1.0;
    copy.params.max_output_tokens = 7;
    EXPECT_EQ(fingerprint(r), fingerprint(copy));
    EXPECT_NE(fingerprint(request("ab", "c")), fingerprint(request("a", "bc")));
    EXPECT_EQ(fingerprint_hex(fingerprint(r)).size(), 16u);
}

TEST(Fingerprint, MatchesIndependentLengthPrefixedFnv) {
    auto fnv = [](std::uint64_t h, const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    };
    std::uint64_t h = 14695981039346656037ULL;
    for (const std::string field : {"system text", "user text"}) h = fnv(h, std::to_string(field.size()) + ":" + field);
    EXPECT_EQ(fingerprint(request("system text", "user text")), h);
}

TEST(Fingerprint, SingleCharacterPerturbationsChangeIt) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> ch(32, 126);
    int collisions = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string user(std::uniform_int_distribution<int>(1, 80)(rng), 'x');
        for (auto& c : user) c = static_cast<char>(ch(rng));
        CompletionRequest r = request("system prompt", user);
        CompletionRequest p = r;
        const std::size_t pos = rng() % user.size();
        char replacement;
        do {
            replacement = static_cast<char>(ch(rng));
        } while (replacement == user[pos]);
        p.user_message[pos] = replacement;
        if (fingerprint(r) == fingerprint(p)) ++collisions;
    }
    EXPECT_EQ(collisions, 0);
}

TEST(MockBackend, EchoReturnsFirstSentencesAfterFixedLatency) {
    MockBackend mock("m", MockScript{MockMode::kEchoContext, {}, 1000ms});
    const auto res = invoke(mock, request("Context:\n[d#0] X. Y."), ctx(), 0);
    EXPECT_EQ(res.text.rfind("X.", 0), 0u);
    EXPECT_GE(res.latency, 1000ms);
    EXPECT_LE(res.latency, 1050ms);
    EXPECT_EQ(res.backend_id, "m");
    EXPECT_GT(res.prompt_tokens, 0u);
}

TEST(MockBackend, EchoIsPureAndOrdered) {
    const auto r = request("Q\n[a#0] First one. More.\n[b#800] Second one! Rest\nnot a passage.");
    EXPECT_EQ(MockBackend::echo_context(r), "First one. Second one!");
    EXPECT_EQ(MockBackend::echo_context(r), MockBackend::echo_context(r));
}

TEST(MockBackend, EchoFallsBackToAgentLines) {
    const auto r = request("Agent answers:\nAgent a: alpha.\nAgent b: [LOW GROUNDING] beta.\n"
                           "Agent c: [NO ANSWER — INSUFFICIENT CONTEXT]");
    EXPECT_EQ(MockBackend::echo_context(r), "alpha. beta.");
    EXPECT_EQ(MockBackend::echo_context(request("Context:\nNO CONTEXT AVAILABLE")), "I don't know.");
}

TEST(MockBackend, EchoTruncatesToTokenBudget) {
    CompletionRequest r = request("[d#0] " + std::string(100, 'w') + ".");
    r.params.max_output_tokens = 5;
    EXPECT_EQ(MockBackend::echo_context(r).size(), 20u);
}

TEST(MockBackend, CannedByFingerprintThenWildcard) {
    const auto r = request("sys");
    const std::string key = MockBackend::canned_key("a1", fingerprint(r));
    MockBackend mock("m", MockScript{MockMode::kCanned, {{key, "exact"}, {"a2:*", "any"}}, 0ms});
    EXPECT_EQ(invoke(mock, r, ctx("a1"), 0).text, "exact");
    EXPECT_EQ(invoke(mock, request("other"), ctx("a2"), 0).text, "any");
    EXPECT_EQ(code_of([&] { invoke(mock, request("other"), ctx("a1"), 3); }), ErrorCode::kUnscripted);
    EXPECT_EQ(mock.call_count(), 3u);  // unscripted calls are not retried
}

TEST(Invoke, RejectsEmptyUserMessage) {
    MockBackend mock("m", MockScript{});
    EXPECT_EQ(code_of([&] { invoke(mock, request("sys", ""), ctx(), 0); }), ErrorCode::kPrecondition);
    EXPECT_EQ(mock.call_count(), 0u);
}

TEST(Invoke, RetriesTransportFailures) {
    FlakyBackend flaky(2, ErrorCode::kTransport);
    EXPECT_EQ(invoke(flaky, request("s"), ctx(), 2).text, "ok");
    EXPECT_EQ(flaky.calls(), 3);

    FlakyBackend hopeless(5, ErrorCode::kTransport);
    EXPECT_EQ(code_of([&] { invoke(hopeless, request("s"), ctx(), 1); }), ErrorCode::kTransport);
    EXPECT_EQ(hopeless.calls(), 2);

    FlakyBackend remote(1, ErrorCode::kRemoteStatus);
    EXPECT_EQ(code_of([&] { invoke(remote, request("s"), ctx(), 3); }), ErrorCode::kRemoteStatus);
    EXPECT_EQ(remote.calls(), 1);
}

TEST(Invoke, TimeoutIsBoundedByRetryCycles) {
    MockBackend slow("m", MockScript{MockMode::kEchoContext, {}, 2000ms});
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(code_of([&] { invoke(slow, request("[d#0] x."), ctx("a", 100ms), 1); }), ErrorCode::kTimeout);
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    EXPECT_GE(elapsed, 200ms);
    EXPECT_LT(elapsed, 400ms);
    EXPECT_EQ(slow.call_count(), 2u);
}

TEST(Invoke, UnknownBackendId) {
    BackendMap map;
    EXPECT_EQ(code_of([&] { invoke(map, "nope", request("s"), ctx(), 0); }), ErrorCode::kUnresolvedBackend);
}

TEST(HttpBackend, RoundTripsThroughStubServer) {
    StubServer stub;
    nlohmann::json seen;
    std::string auth;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"stub body"}}],)"
                        R"("usage":{"prompt_tokens":11,"completion_tokens":2}})",
                        "application/json");
    });
    ::setenv("MOA_TEST_KEY", "sekrit", 1);
    HttpBackend backend("h", HttpBackendConfig{stub.url(), "MOA_TEST_KEY", "default-model"});
    CompletionRequest r = request("be brief", "hello?");
    r.params.temperature = 0.5;
    r.params.max_output_tokens = 64;
    const auto res = invoke(backend, r, CallContext{"a", "agent-model", 5000ms}, 0);

    EXPECT_EQ(res.text, "stub body");
    EXPECT_EQ(res.prompt_tokens, 11u);
    EXPECT_EQ(res.output_tokens, 2u);
    EXPECT_EQ(res.backend_id, "h");
    EXPECT_EQ(auth, "Bearer sekrit");
    EXPECT_EQ(seen["model"], "agent-model");
    EXPECT_EQ(seen["messages"][0]["role"], "system");
    EXPECT_EQ(seen["messages"][1]["content"], "hello?");
    EXPECT_EQ(seen["temperature"], 0.5);
    EXPECT_EQ(seen["max_tokens"], 64);
    EXPECT_EQ(seen["stream"], false);
}

TEST(HttpBackend, EstimatesTokensWithoutUsage) {
    StubServer stub;
    stub.server().Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"content":"12345678"}}]})", "application/json");
    });
    HttpBackend backend("h", HttpBackendConfig{stub.url(), "", "m"});
    const auto res = invoke(backend, request("", "abcd"), ctx(), 0);
    EXPECT_EQ(res.output_tokens, 2u);
    EXPECT_EQ(res.prompt_tokens, 1u);
}

TEST(HttpBackend, PropagatesRemoteStatusWithBody) {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    HttpBackend backend("h", HttpBackendConfig{stub.url(), "", "m"});
    try {
        invoke(backend, request("s"), ctx(), 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kRemoteStatus);
        EXPECT_NE(std::string(e.what()).find("overloaded"), std::string::npos);
    }
    EXPECT_EQ(hits.load(), 1);
}

TEST(HttpBackend, TimesOutOnSlowServer) {
    StubServer stub;
    stub.server().Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(600ms);
        res.set_content(R"({"choices":[{"message":{"content":"late"}}]})", "application/json");
    });
    HttpBackend backend("h", HttpBackendConfig{stub.url(), "", "m"});
    EXPECT_EQ(code_of([&] { invoke(backend, request("s"), ctx("a", 200ms), 0); }), ErrorCode::kTimeout);
}

TEST(HttpBackend, ConnectionRefusedIsTransportError) {
    // Nothing listens on port 1 in the test environment.
    HttpBackend backend("h", HttpBackendConfig{"http://127.0.0.1:1", "", "m"});
    EXPECT_EQ(code_of([&] { invoke(backend, request("s"), ctx("a", 500ms), 1); }), ErrorCode::kTransport);
}

TEST(BackendConfig, BuildsMockAndHttpBackends) {
    TempDir dir;
    std::ofstream(dir / "script.json") << R"({"a1:*": "scripted"})";
    const auto map = backends_from_json(nlohmann::json::parse(R"({
        "m": {"type": "mock", "mode": "canned", "script": "script.json", "fixed_latency_ms": 5},
        "e": {"type": "mock"},
        "h": {"type": "http", "base_url": "http://127.0.0.1:1", "api_key_env": "X", "model_name": "y"}})"),
                                        dir.path());
    ASSERT_EQ(map.size(), 3u);
    const auto* mock = dynamic_cast<const MockBackend*>(map.at("m").get());
    ASSERT_NE(mock, nullptr);
    EXPECT_EQ(mock->script().fixed_latency, 5ms);
    EXPECT_EQ(invoke(*mock, request("s"), ctx("a1"), 0).text, "scripted");
    EXPECT_NE(dynamic_cast<const HttpBackend*>(map.at("h").get()), nullptr);
}

TEST(BackendConfig, RejectsUnknownFields) {
    EXPECT_EQ(code_of([] { backends_from_json(nlohmann::json::parse(R"({"m": {"type": "mock", "bogus": 1}})")); }),
              ErrorCode::kConfig);
    EXPECT_EQ(code_of([] { backends_from_json(nlohmann::json::parse(R"({"m": {"type": "grpc"}})")); }),
              ErrorCode::kConfig);
}
