#include "moa/guards/guards.hpp"

#include <algorithm>

#include "moa/util/text.hpp"

namespace moa {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

bool detect_abstention(std::string_view answer, const GuardPolicy& policy) {
    const std::string normalized = to_lower_ascii(normalize_apostrophes(trim(answer)));
    if (normalized.empty()) return true;
    const std::vector<std::size_t> bounds = utf8_boundaries(normalized);
    const std::size_t chars = std::min(kAbstentionWindow, bounds.size() - 1);
    const std::string_view window = std::string_view(normalized).substr(0, bounds[chars]);
    return std::any_of(policy.abstention_phrases.begin(), policy.abstention_phrases.end(), [&](const std::string& p) {
        const std::string phrase = to_lower_ascii(normalize_apostrophes(p));
        return !phrase.empty() && window.find(phrase) != std::string_view::npos;
    });
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_ws(text[i + 1]))) {
            const auto piece = trim(text.substr(start, i + 1 - start));
            if (!piece.empty()) out.emplace_back(piece);
            start = i + 1;
        }
    }
    const auto tail = trim(text.substr(std::min(start, text.size())));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

GuardVerdict grounding_check(std::string_view answer, std::span<const ScoredChunk> retrieved,
                             const GuardPolicy& policy, const Embedder& embedder) {
    GuardVerdict verdict;
    if (detect_abstention(answer, policy)) {
        verdict.abstained = true;
        verdict.grounding_score = 1.0;
        verdict.passed = true;
        return verdict;
    }

    std::vector<std::string> units;
    for (auto& s : split_sentences(answer)) {
        if (tokenize(s).size() >= kMinSentenceTokens) units.push_back(std::move(s));
    }
    if (units.empty()) units.emplace_back(trim(answer));

    std::vector<std::vector<double>> evidence;
    evidence.reserve(retrieved.size());
    for (const auto& sc : retrieved) {
        if (!sc.chunk.embedding.empty()) {
            evidence.push_back(sc.chunk.embedding);
        } else if (!tokenize(sc.chunk.text).empty()) {
            evidence.push_back(embedder.embed(sc.chunk.text));
        }
    }

    double total = 0.0;
    for (const auto& unit : units) {
        double best = 0.0;
        if (!evidence.empty() && !tokenize(unit).empty()) {
            const auto e = embedder.embed(unit);
            for (const auto& ev : evidence) best = std::max(best, clamp_unit(dot(e, ev)));
        }
        total += best;
        if (best < policy.grounding_threshold) verdict.flagged_sentences.push_back({unit, best});
    }
    verdict.grounding_score = clamp_unit(total / static_cast<double>(units.size()));
    verdict.passed = verdict.grounding_score >= policy.grounding_threshold;
    return verdict;
}

GuardVerdict grounding_check(std::string_view answer, std::span<const ScoredChunk> retrieved,
                             const GuardPolicy& policy, std::string_view embedder_id) {
    return grounding_check(answer, retrieved, policy, *make_embedder(embedder_id));
}

}  // namespace moa
