#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace moa {

/// A fact is present when every keyword of at least one group occurs in the
/// response (case-insensitive substring match).
struct Fact {
    std::string fact_id;
    std::string description;
    std::vector<std::vector<std::string>> matchers;
};

struct Checklist {
    std::string question;
    std::vector<Fact> facts;
};

struct FactResult {
    std::string fact_id;
    bool matched = false;
    std::vector<std::string> matched_keywords;  // keywords found, over all groups, in matcher order
};

struct ChecklistScore {
    std::size_t matched = 0;
    std::size_t total = 0;
    std::vector<FactResult> detail;
};

Checklist checklist_from_json(const nlohmann::json& doc);  // throws kConfig
Checklist load_checklist(const std::filesystem::path& path);

ChecklistScore score_checklist(std::string_view response, const Checklist& checklist);

nlohmann::json score_to_json(const ChecklistScore& score);

}  // namespace moa
