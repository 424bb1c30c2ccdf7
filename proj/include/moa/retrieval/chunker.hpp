#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "moa/retrieval/chunk.hpp"

namespace moa {

struct ChunkingOptions {
    std::size_t window = 1000;
    std::size_t overlap = 200;
};

/// Splits `text` into windows of `window` characters, each sharing `overlap`
/// characters with its predecessor. The last window may be shorter; no window
/// is emitted that lies entirely inside the previous one. Returned chunks are
/// not embedded.
std::vector<DocumentChunk> chunk_document(const std::string& doc_id, std::string_view text,
                                          std::size_t window, std::size_t overlap);

inline std::vector<DocumentChunk> chunk_document(const std::string& doc_id, std::string_view text,
                                                 const ChunkingOptions& options = {}) {
    return chunk_document(doc_id, text, options.window, options.overlap);
}

}  // namespace moa
