#include "moa/orchestrator/planner.hpp"

#include <algorithm>
#include <optional>

#include <nlohmann/json.hpp>

namespace moa {
namespace {

std::optional<nlohmann::json> parse_array(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_array()) return doc;
    // Models like to wrap the array in prose or a code fence.
    const auto open = text.find('[');
    const auto close = text.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    doc = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) return std::nullopt;
    return doc;
}

}  // namespace

PlannerAssignment plan_assignments(std::string_view planner_output, std::span<const std::string> workers,
                                   std::string_view question) {
    PlannerAssignment out;
    if (const auto doc = parse_array(planner_output)) {
        for (const auto& record : *doc) {
            if (!record.is_object()) continue;
            const auto id = record.find("agent_id");
            const auto q = record.find("question");
            if (id == record.end() || q == record.end() || !id->is_string() || !q->is_string()) continue;
            const auto& agent_id = id->get_ref<const std::string&>();
            const auto& sub = q->get_ref<const std::string&>();
            if (sub.empty() || std::find(workers.begin(), workers.end(), agent_id) == workers.end()) continue;
            out.assignments.emplace(agent_id, sub);  // first record for an agent wins
        }
    }
    for (const auto& w : workers) out.assignments.emplace(w, std::string(question));
    return out;
}

}  // namespace moa
