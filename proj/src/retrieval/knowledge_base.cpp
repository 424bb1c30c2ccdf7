#include "moa/retrieval/knowledge_base.hpp"

#include <algorithm>

#include "moa/error.hpp"

namespace moa {

KnowledgeBase::KnowledgeBase(std::string kb_id, std::shared_ptr<const Embedder> embedder)
    : kb_id_(std::move(kb_id)),
      embedder_(std::move(embedder)),
      chunks_(std::make_shared<const std::vector<DocumentChunk>>()) {}

KnowledgeBase::Snapshot KnowledgeBase::snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return chunks_;
}

bool KnowledgeBase::contains_document(const std::string& doc_id) const {
    const auto snap = snapshot();
    return std::any_of(snap->begin(), snap->end(), [&](const DocumentChunk& c) { return c.doc_id == doc_id; });
}

KnowledgeBase::Snapshot KnowledgeBase::replace_documents(const std::set<std::string>& doc_ids,
                                                         std::vector<DocumentChunk> chunks) {
    const auto current = snapshot();
    auto next = std::make_shared<std::vector<DocumentChunk>>();
    next->reserve(current->size() + chunks.size());
    for (const auto& c : *current) {
        if (!doc_ids.contains(c.doc_id)) next->push_back(c);
    }
    for (auto& c : chunks) {
        if (c.embedding.size() != dimension()) {
            throw Error(ErrorCode::kEmbedderMismatch,
                        "chunk " + c.chunk_id + " has dimension " + std::to_string(c.embedding.size()) +
                            ", KB '" + kb_id_ + "' expects " + std::to_string(dimension()));
        }
        next->push_back(std::move(c));
    }
    Snapshot frozen = std::move(next);
    std::lock_guard lock(snapshot_mu_);
    chunks_ = frozen;
    return frozen;
}

std::vector<ScoredChunk> search(const std::vector<DocumentChunk>& chunks, std::span<const double> query_embedding,
                                std::size_t k) {
    struct Candidate {
        double score;
        const DocumentChunk* chunk;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(chunks.size());
    for (const auto& c : chunks) candidates.push_back({dot(query_embedding, c.embedding), &c});

    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk->chunk_id < b.chunk->chunk_id;
    };
    const std::size_t n = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                      better);

    std::vector<ScoredChunk> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({*candidates[i].chunk, candidates[i].score});
    return out;
}

std::vector<ScoredChunk> search(const KnowledgeBase& kb, const Embedder& embedder, std::string_view query,
                                std::size_t k) {
    if (embedder.id() != kb.embedder_id()) {
        throw Error(ErrorCode::kEmbedderMismatch, "KB '" + kb.kb_id() + "' was built with " +
                                                      std::string(kb.embedder_id()) + ", query embedder is " +
                                                      std::string(embedder.id()));
    }
    const auto snap = kb.snapshot();
    if (snap->empty() || k == 0) return {};
    const auto q = embedder.embed(query);
    return search(*snap, q, k);
}

}  // namespace moa
