#include "moa/retrieval/chunker.hpp"

#include "moa/error.hpp"
#include "moa/util/text.hpp"

namespace moa {

std::string make_chunk_id(const std::string& doc_id, std::size_t position) {
    return doc_id + "#" + std::to_string(position);
}

std::vector<DocumentChunk> chunk_document(const std::string& doc_id, std::string_view text,
                                          std::size_t window, std::size_t overlap) {
    if (text.empty()) {
        throw Error(ErrorCode::kEmptyText, "cannot chunk empty document '" + doc_id + "'");
    }
    if (window == 0) {
        throw Error(ErrorCode::kPrecondition, "chunk window must be positive");
    }
    if (overlap >= window) {
        throw Error(ErrorCode::kPrecondition, "chunk overlap (" + std::to_string(overlap) +
                                                  ") must be smaller than window (" +
                                                  std::to_string(window) + ")");
    }

    const std::vector<std::size_t> bounds = utf8_boundaries(text);
    const std::size_t length = bounds.size() - 1;  // characters
    const std::size_t step = window - overlap;

    std::vector<DocumentChunk> chunks;
    for (std::size_t start = 0;; start += step) {
        const std::size_t end = std::min(length, start + window);
        DocumentChunk chunk;
        chunk.doc_id = doc_id;
        chunk.position = start;
        chunk.chunk_id = make_chunk_id(doc_id, start);
        chunk.text = std::string(text.substr(bounds[start], bounds[end] - bounds[start]));
        chunk.metadata["source"] = doc_id;
        chunks.push_back(std::move(chunk));
        if (end == length) break;
    }
    return chunks;
}

}  // namespace moa
