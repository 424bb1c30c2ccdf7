#include "moa/evalbench/bench_report.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>

#include "moa/error.hpp"

namespace moa {
namespace {

double seconds(std::chrono::microseconds us) { return static_cast<double>(us.count()) / 1e6; }

double ratio(double value, double base, const std::string& what) {
    if (base > 0.0) return value / base;
    if (value == 0.0) return 1.0;
    throw Error(ErrorCode::kPrecondition, "baseline " + what + " is zero; ratio undefined");
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string fmt_count(double v) {
    if (std::fabs(v - std::round(v)) < 1e-9) return fmt("%.0f", v);
    return fmt("%.2f", v);
}

}  // namespace

const BenchRow* BenchReport::find(const std::string& label) const {
    for (const auto& r : rows) {
        if (r.label == label) return &r;
    }
    return nullptr;
}

BenchReport measure_run(const std::vector<TraceGroup>& groups, const std::string& baseline_label) {
    if (groups.empty()) throw Error(ErrorCode::kEmptyTraceSet, "no configurations to measure");
    BenchReport report;
    report.baseline_label = baseline_label;
    for (const auto& g : groups) {
        if (g.traces.empty()) throw Error(ErrorCode::kEmptyTraceSet, "configuration '" + g.label + "' has no runs");
        BenchRow row;
        row.label = g.label;
        row.runs = g.traces.size();
        row.max_concurrent_users = g.max_concurrent_users;
        row.metadata = g.metadata;
        double wall = 0.0, passages = 0.0, retrieval = 0.0;
        for (const auto& t : g.traces) {
            wall += seconds(t.total_wall_time);
            passages += static_cast<double>(t.passages_considered());
            for (const auto& n : t.node_outputs) retrieval += seconds(n.retrieval_time);
        }
        const double n = static_cast<double>(g.traces.size());
        row.avg_response_speed = wall / n;
        row.avg_passages_considered = passages / n;
        row.avg_retrieval_time = retrieval / n;
        report.rows.push_back(std::move(row));
    }
    const BenchRow* base = report.find(baseline_label);
    if (base == nullptr) throw Error(ErrorCode::kMissingBaseline, "baseline '" + baseline_label + "' was not measured");
    const double base_speed = base->avg_response_speed;
    const double base_passages = base->avg_passages_considered;
    for (auto& row : report.rows) {
        row.latency_penalty = ratio(row.avg_response_speed, base_speed, "response speed");
        row.context_window_improvement = ratio(row.avg_passages_considered, base_passages, "passage count");
    }
    return report;
}

std::string render_markdown(const BenchReport& report) {
    std::vector<std::string> metadata_keys;
    for (const auto& row : report.rows) {
        for (const auto& [k, v] : row.metadata) {
            if (std::find(metadata_keys.begin(), metadata_keys.end(), k) == metadata_keys.end()) metadata_keys.push_back(k);
        }
    }
    const std::string dash = "—";
    auto line = [&](const std::string& metric, auto&& cell) {
        std::string out = "| " + metric + " |";
        for (const auto& row : report.rows) out += " " + cell(row) + " |";
        return out + "\n";
    };
    const bool any_users = std::any_of(report.rows.begin(), report.rows.end(),
                                       [](const BenchRow& r) { return r.max_concurrent_users.has_value(); });

    std::string out = line("Metric", [](const BenchRow& r) { return r.label; });
    out += line("---", [](const BenchRow&) { return std::string("---"); });
    out += line("Average Response Speed", [](const BenchRow& r) { return fmt("%.4fs", r.avg_response_speed); });
    out += line("Latency Penalty", [&](const BenchRow& r) {
        return r.label == report.baseline_label ? dash : fmt("%.2fx", r.latency_penalty);
    });
    out += line("Average Passages Considered", [](const BenchRow& r) { return fmt_count(r.avg_passages_considered); });
    out += line("Average Context Window Improvement", [&](const BenchRow& r) {
        return r.label == report.baseline_label ? dash : fmt("%.2fx", r.context_window_improvement);
    });
    out += line("Average Retrieval Time", [](const BenchRow& r) { return fmt("%.4fs", r.avg_retrieval_time); });
    if (any_users) {
        out += line("Max Concurrent Users", [&](const BenchRow& r) {
            return r.max_concurrent_users ? std::to_string(*r.max_concurrent_users) : dash;
        });
    }
    for (const auto& key : metadata_keys) {
        out += line(key, [&](const BenchRow& r) {
            const auto it = r.metadata.find(key);
            return it == r.metadata.end() ? dash : it->second;
        });
    }
    out += line("Runs", [](const BenchRow& r) { return std::to_string(r.runs); });
    return out;
}

nlohmann::json report_to_json(const BenchReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"label", r.label},
                        {"avg_response_speed", r.avg_response_speed},
                        {"latency_penalty", r.latency_penalty},
                        {"avg_passages_considered", r.avg_passages_considered},
                        {"context_window_improvement", r.context_window_improvement},
                        {"max_concurrent_users", r.max_concurrent_users ? nlohmann::json(*r.max_concurrent_users)
                                                                        : nlohmann::json(nullptr)},
                        {"avg_retrieval_time", r.avg_retrieval_time},
                        {"runs", r.runs},
                        {"metadata", r.metadata}});
    }
    return {{"baseline", report.baseline_label}, {"rows", rows}};
}

BenchReport report_from_json(const nlohmann::json& doc) {
    try {
        BenchReport report;
        report.baseline_label = doc.at("baseline").get<std::string>();
        for (const auto& r : doc.at("rows")) {
            BenchRow row;
            row.label = r.at("label").get<std::string>();
            row.avg_response_speed = r.at("avg_response_speed").get<double>();
            row.latency_penalty = r.at("latency_penalty").get<double>();
            row.avg_passages_considered = r.at("avg_passages_considered").get<double>();
            row.context_window_improvement = r.at("context_window_improvement").get<double>();
            if (!r.at("max_concurrent_users").is_null()) {
                row.max_concurrent_users = r.at("max_concurrent_users").get<std::size_t>();
            }
            row.avg_retrieval_time = r.value("avg_retrieval_time", 0.0);
            row.runs = r.value("runs", std::size_t{0});
            row.metadata = r.value("metadata", std::map<std::string, std::string>{});
            report.rows.push_back(std::move(row));
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfig, std::string("bench report: ") + e.what());
    }
}

}  // namespace moa
