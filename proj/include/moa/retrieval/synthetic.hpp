#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "moa/retrieval/kb_store.hpp"

namespace moa {

struct SyntheticCorpusSpec {
    std::size_t documents = 40;
    std::size_t document_chars = 3000;
    std::uint64_t seed = 1;
    std::string topic = "finance";  // prefixed to doc ids and mixed into the text
};

/// Deterministic filler corpus of finance-flavoured sentences. Identical
/// output for identical specs on every platform (splitmix64, no std
/// distributions).
std::vector<SourceDocument> synthesize_corpus(const SyntheticCorpusSpec& spec);

}  // namespace moa
