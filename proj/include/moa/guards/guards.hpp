#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moa/core/types.hpp"
#include "moa/retrieval/chunk.hpp"
#include "moa/retrieval/embedder.hpp"

namespace moa {

struct FlaggedSentence {
    std::string sentence;
    double max_similarity = 0.0;

    bool operator==(const FlaggedSentence&) const = default;
};

/// Invariants: passed == (abstained || grounding_score >= threshold), and
/// flagged_sentences holds exactly the scored sentences whose max_similarity
/// is below the threshold.
struct GuardVerdict {
    bool abstained = false;
    double grounding_score = 0.0;
    std::vector<FlaggedSentence> flagged_sentences;
    bool passed = false;

    bool operator==(const GuardVerdict&) const = default;
};

inline constexpr std::size_t kAbstentionWindow = 200;  // characters scanned for abstention phrases
inline constexpr std::size_t kMinSentenceTokens = 5;

/// True iff the trimmed, lowercased answer is empty or one of the policy's
/// abstention phrases occurs in its first 200 characters.
bool detect_abstention(std::string_view answer, const GuardPolicy& policy);

/// Splits on '.', '!' or '?' followed by whitespace or end of text. Pieces
/// are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Sentence-level grounding: each sentence of >= 5 tokens is embedded and
/// scored by its best cosine similarity against the retrieved chunks; the
/// grounding score is the mean of those maxima. When no sentence is long
/// enough the whole answer is scored as one unit. Abstentions pass with
/// score 1.0; a non-abstaining answer with nothing retrieved fails with 0.
GuardVerdict grounding_check(std::string_view answer, std::span<const ScoredChunk> retrieved,
                             const GuardPolicy& policy, const Embedder& embedder);

GuardVerdict grounding_check(std::string_view answer, std::span<const ScoredChunk> retrieved,
                             const GuardPolicy& policy, std::string_view embedder_id);

}  // namespace moa
