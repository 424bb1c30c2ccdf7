#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace moa {

/// One retrievable passage. Positions and lengths are in characters
/// (UTF-8 code points), not bytes.
struct DocumentChunk {
    std::string chunk_id;
    std::string doc_id;
    std::string text;
    std::vector<double> embedding;  // unit norm once embedded
    std::size_t position = 0;
    std::map<std::string, std::string> metadata;
};

struct ScoredChunk {
    DocumentChunk chunk;
    double score = 0.0;  // cosine similarity to the query
};

/// "<doc_id>#<position>", also the label used in rendered prompts.
std::string make_chunk_id(const std::string& doc_id, std::size_t position);

}  // namespace moa
