#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

namespace moa {

struct PlannerAssignment {
    std::map<std::string, std::string> assignments;  // worker agent_id -> sub-question

    bool operator==(const PlannerAssignment&) const = default;
};

/// Parses planner output as a JSON array of {"agent_id", "question"}
/// records. Text around the outermost brackets is ignored. Records naming
/// unknown agents, repeated agents or lacking a non-empty question are
/// dropped; every worker left without an assignment gets `question`. Output
/// that does not parse as an array assigns `question` to every worker.
PlannerAssignment plan_assignments(std::string_view planner_output, std::span<const std::string> workers,
                                   std::string_view question);

}  // namespace moa
