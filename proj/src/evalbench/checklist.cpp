#include "moa/evalbench/checklist.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "moa/error.hpp"
#include "moa/util/text.hpp"

namespace moa {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, "checklist: " + what); }

std::string string_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) bad(where + "." + key + " must be a string");
    return it->get<std::string>();
}

}  // namespace

Checklist checklist_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) bad("document must be an object");
    Checklist out;
    out.question = string_field(doc, "question", "checklist");
    const auto facts = doc.find("facts");
    if (facts == doc.end() || !facts->is_array() || facts->empty()) bad("facts must be a non-empty array");
    for (std::size_t i = 0; i < facts->size(); ++i) {
        const auto& f = (*facts)[i];
        const std::string where = "facts[" + std::to_string(i) + "]";
        if (!f.is_object()) bad(where + " must be an object");
        Fact fact;
        fact.fact_id = string_field(f, "fact_id", where);
        if (f.contains("description")) fact.description = string_field(f, "description", where);
        const auto groups = f.find("matchers");
        if (groups == f.end() || !groups->is_array() || groups->empty()) bad(where + ".matchers must be a non-empty array");
        for (const auto& g : *groups) {
            if (!g.is_array() || g.empty()) bad(where + ".matchers: every group must be a non-empty array");
            std::vector<std::string> group;
            for (const auto& k : g) {
                if (!k.is_string() || k.get_ref<const std::string&>().empty()) {
                    bad(where + ".matchers: keywords must be non-empty strings");
                }
                group.push_back(k.get<std::string>());
            }
            fact.matchers.push_back(std::move(group));
        }
        out.facts.push_back(std::move(fact));
    }
    return out;
}

Checklist load_checklist(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) bad(path.string() + " is not valid JSON");
    return checklist_from_json(doc);
}

ChecklistScore score_checklist(std::string_view response, const Checklist& checklist) {
    const std::string text = to_lower_ascii(normalize_apostrophes(response));
    ChecklistScore score;
    score.total = checklist.facts.size();
    for (const auto& fact : checklist.facts) {
        FactResult r;
        r.fact_id = fact.fact_id;
        for (const auto& group : fact.matchers) {
            bool all = true;
            for (const auto& keyword : group) {
                if (text.find(to_lower_ascii(keyword)) == std::string::npos) {
                    all = false;
                    continue;
                }
                if (std::find(r.matched_keywords.begin(), r.matched_keywords.end(), keyword) == r.matched_keywords.end()) {
                    r.matched_keywords.push_back(keyword);
                }
            }
            r.matched = r.matched || all;
        }
        if (r.matched) ++score.matched;
        score.detail.push_back(std::move(r));
    }
    return score;
}

nlohmann::json score_to_json(const ChecklistScore& score) {
    nlohmann::json detail = nlohmann::json::array();
    for (const auto& r : score.detail) {
        detail.push_back({{"fact_id", r.fact_id}, {"matched", r.matched}, {"matched_keywords", r.matched_keywords}});
    }
    return {{"matched", score.matched}, {"total", score.total}, {"detail", detail}};
}

}  // namespace moa
