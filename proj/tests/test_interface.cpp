#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "bench_support.hpp"
#include "deployment.hpp"
#include "moa/error.hpp"

using namespace moa;
using namespace moa::testing;
using nlohmann::json;

namespace {

const std::string kQuestion = "What was the context around revenue growth for the rest of the year?";

}  // namespace

// ---- HTTP ----

TEST(Service, HealthAndPipelines) {
    Deployment d;
    Server s(d);
    auto c = s.client();
    auto health = c.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    auto pipes = c.Get("/v1/pipelines");
    ASSERT_TRUE(pipes);
    std::set<std::string> ids;
    const auto listed = json::parse(pipes->body);
    for (const auto& p : listed.at("pipelines")) ids.insert(p.at("pipeline_id").get<std::string>());
    EXPECT_EQ(ids, (std::set<std::string>{"desk-3x1", "broken"}));
}

TEST(Service, QueryAndTrace) {
    Deployment d;
    Server s(d);
    auto c = s.client();
    auto res = post_query(c, "desk-3x1", kQuestion);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const auto body = json::parse(res->body);
    EXPECT_EQ(body.at("agent_answers").size(), 3u);
    EXPECT_FALSE(body.at("final_answer").get<std::string>().empty());

    const std::string run_id = body.at("run_id");
    auto trace = c.Get("/v1/runs/" + run_id + "/trace");
    ASSERT_TRUE(trace);
    EXPECT_EQ(trace->status, 200);
    EXPECT_EQ(trace->body, *s.app().engine().trace_text(run_id));
    EXPECT_EQ(json::parse(trace->body).at("final_answer"), body.at("final_answer"));
    std::ifstream in(d.dir() / ("traces/" + run_id + ".trace.json"));
    std::stringstream file;
    file << in.rdbuf();
    EXPECT_EQ(file.str(), trace->body);
}

TEST(Service, ClientErrors) {
    Deployment d;
    Server s(d);
    auto c = s.client();
    EXPECT_EQ(c.Get("/v1/runs/run-nope/trace")->status, 404);
    EXPECT_EQ(post_query(c, "no-such-pipeline", kQuestion)->status, 404);
    EXPECT_EQ(c.Post("/v1/query", "{not json", "application/json")->status, 400);
    EXPECT_EQ(c.Post("/v1/query", R"({"pipeline_id":"desk-3x1"})", "application/json")->status, 400);
    EXPECT_EQ(post_query(c, "desk-3x1", kQuestion, "sideways")->status, 400);
    EXPECT_EQ(post_query(c, "desk-3x1", "   ")->status, 400);
    const auto err = json::parse(c.Get("/v1/runs/run-nope/trace")->body);
    EXPECT_TRUE(err.at("error").contains("code"));
}

TEST(Service, RunFailureIs500WithFailingNode) {
    Deployment d;
    Server s(d);
    auto c = s.client();
    auto res = post_query(c, "broken", kQuestion);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 500);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body.at("failing_node"), "agg");
    const std::string run_id = body.at("run_id");
    auto trace = c.Get("/v1/runs/" + run_id + "/trace");
    ASSERT_TRUE(trace);
    EXPECT_EQ(trace->status, 200);
    EXPECT_EQ(json::parse(trace->body).at("status"), "failed");
}

TEST(Service, IngestMultipart) {
    Deployment d;
    Server s(d);
    auto c = s.client();
    httplib::MultipartFormDataItems items = {
        {"file", "Zephyr tablets shipped forty thousand units. Demand for Zephyr stayed strong.", "zephyr.txt", "text/plain"}};
    auto res = c.Post("/v1/kb/revenue/ingest", items);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const auto body = json::parse(res->body);
    EXPECT_EQ(body.at("kb_id"), "revenue");
    EXPECT_EQ(body.at("chunks_ingested"), 1);

    auto q = post_query(c, "desk-3x1", "How many Zephyr tablets shipped?");
    ASSERT_EQ(q->status, 200);
    const auto trace = json::parse(c.Get("/v1/runs/" + json::parse(q->body).at("run_id").get<std::string>() + "/trace")->body);
    bool found = false;
    for (const auto& n : trace.at("node_outputs")) {
        if (n.at("agent_id") != "revenue") continue;
        found = n.at("retrieved").at(0).at("doc_id") == "zephyr.txt";
    }
    EXPECT_TRUE(found);

    EXPECT_EQ(c.Post("/v1/kb/revenue/ingest", "plain", "text/plain")->status, 400);
}

TEST(Service, ConcurrentQueriesGetDistinctRuns) {
    Deployment d(20);
    Server s(d);
    std::vector<std::string> ids(8);
    std::vector<int> status(8);
    {
        std::vector<std::jthread> threads;
        for (int i = 0; i < 8; ++i) {
            threads.emplace_back([&, i] {
                auto c = s.client();
                auto res = post_query(c, "desk-3x1", kQuestion);
                status[i] = res ? res->status : -1;
                if (res && res->status == 200) ids[i] = json::parse(res->body).at("run_id");
            });
        }
    }
    for (int st : status) EXPECT_EQ(st, 200);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 8u);
}

TEST(Service, BackpressureReturns429) {
    Deployment d(400, 1);
    Server s(d);
    std::vector<int> status(4);
    {
        std::vector<std::jthread> threads;
        for (int i = 0; i < 4; ++i) {
            threads.emplace_back([&, i] {
                auto c = s.client();
                auto res = post_query(c, "desk-3x1", kQuestion);
                status[i] = res ? res->status : -1;
            });
        }
    }
    EXPECT_GE(std::count(status.begin(), status.end(), 200), 1);
    EXPECT_GE(std::count(status.begin(), status.end(), 429), 1);
    EXPECT_EQ(std::count(status.begin(), status.end(), 200) + std::count(status.begin(), status.end(), 429), 4);
}

// ---- CLI ----

TEST(Cli, ValidateWithoutConfig) {
    const auto r = run_cli({"validate", data_path("pipelines/desk_3x1.json").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("pipeline_id"), "desk-3x1");
    EXPECT_EQ(j.at("node_count"), 4);
}

TEST(Cli, ValidateReportsStructuralErrors) {
    TempDir dir;
    write(dir / "bad.json", R"({"pipeline_id":"x","layers":[["a"]],"agents":{"a":{"role":"worker","model":{"backend_id":"m"}}}})");
    const auto r = run_cli({"validate", (dir / "bad.json").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err).at("error").at("code"), "too_few_layers");
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ValidateAgainstDeployment) {
    Deployment d;
    const auto r = run_cli({"--config", d.config_path().string(), "validate", data_path("pipelines/desk_3x1.json").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("references"), "resolved");
    const auto missing =
        run_cli({"--config", d.config_path().string(), "validate", data_path("pipelines/desk_planner.json").string()});
    EXPECT_EQ(missing.code, 1);
    EXPECT_EQ(json::parse(missing.err).at("error").at("code"), "unresolved_backend");
}

TEST(Cli, QueryTracePrintsOneBlockPerAgent) {
    Deployment d;
    const auto r = run_cli({"--config", d.config_path().string(), "query", "desk-3x1", kQuestion, "--trace"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto* id : {"revenue", "margins", "risk"}) {
        EXPECT_NE(r.out.find(std::string("Agent ") + id + ":\n"), std::string::npos) << r.out;
    }
    std::size_t blocks = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) blocks += line.rfind("Agent ", 0) == 0;
    EXPECT_EQ(blocks, 3u);
    const auto final_at = r.out.find("Final:\n");
    ASSERT_NE(final_at, std::string::npos);
    EXPECT_GT(final_at, r.out.find("Agent risk:"));
}

TEST(Cli, QueryErrors) {
    Deployment d;
    const auto unknown = run_cli({"--config", d.config_path().string(), "query", "nope", kQuestion});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_EQ(json::parse(unknown.err).at("error").at("code"), "not_found");

    const auto failed = run_cli({"--config", d.config_path().string(), "query", "broken", kQuestion});
    EXPECT_EQ(failed.code, 2);
    const auto e = json::parse(failed.err);
    EXPECT_EQ(e.at("failing_node"), "agg");
    EXPECT_EQ(e.at("error").at("code"), "unscripted");

    EXPECT_EQ(run_cli({"query", "desk-3x1", kQuestion}).code, 1);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
    EXPECT_EQ(run_cli({}).code, 1);
}

TEST(Cli, IngestIntoDirectory) {
    TempDir dir;
    const auto r = run_cli({"ingest", "revenue", data_path("corpus/revenue").string(), "--kb-dir", (dir / "kb").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GT(json::parse(r.out).at("chunks_ingested").get<int>(), 0);
    EXPECT_EQ(run_cli({"ingest", "../evil", data_path("corpus/revenue").string(), "--kb-dir", (dir / "kb").string()}).code, 1);
}

TEST(Cli, BenchPrintsTheReport) {
    TempDir dir;
    write(dir / "suite.json", linear_suite(2, 0, 1).dump());
    const auto r = run_cli({"bench", (dir / "suite.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto* row : {"Average Response Speed", "Latency Penalty", "Average Passages Considered",
                            "Average Context Window Improvement", "Runs"}) {
        EXPECT_NE(r.out.find(row), std::string::npos) << row;
    }
    EXPECT_NE(r.out.find("| Average Context Window Improvement | — | 2.00x | 2.00x |"), std::string::npos) << r.out;

    // Timings differ between runs; everything else matches the library report.
    const auto direct = run_benchmark(suite_from_json(linear_suite(2, 0, 1)));
    auto without_timing = [](const std::string& md) {
        std::string keep;
        std::istringstream in(md);
        for (std::string line; std::getline(in, line);) {
            if (line.find("Speed") == std::string::npos && line.find("Penalty") == std::string::npos &&
                line.find("Retrieval Time") == std::string::npos) {
                keep += line + "\n";
            }
        }
        return keep;
    };
    EXPECT_EQ(without_timing(r.out), without_timing(direct.markdown));

    const auto j = run_cli({"bench", (dir / "suite.json").string(), "--json"});
    ASSERT_EQ(j.code, 0);
    EXPECT_EQ(json::parse(j.out).at("baseline"), "Baseline");
}

TEST(Parity, CliAndHttpAgree) {
    Deployment d;
    const auto cli = run_cli({"--config", d.config_path().string(), "query", "desk-3x1", kQuestion, "--json"});
    ASSERT_EQ(cli.code, 0) << cli.err;
    const auto from_cli = json::parse(cli.out);

    Server s(d);
    auto c = s.client();
    auto res = post_query(c, "desk-3x1", kQuestion);
    ASSERT_EQ(res->status, 200);
    const auto from_http = json::parse(res->body);
    EXPECT_EQ(from_cli.at("final_answer"), from_http.at("final_answer"));
    EXPECT_EQ(from_cli.at("agent_answers"), from_http.at("agent_answers"));
    EXPECT_NE(from_cli.at("run_id"), from_http.at("run_id"));
    auto t = c.Get("/v1/runs/" + from_cli.at("run_id").get<std::string>() + "/trace");
    ASSERT_TRUE(t);
    EXPECT_EQ(t->status, 200);
}
