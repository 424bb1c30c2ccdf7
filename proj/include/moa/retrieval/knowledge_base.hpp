#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moa/retrieval/chunk.hpp"
#include "moa/retrieval/embedder.hpp"

namespace moa {

/// A named collection of embedded chunks owned by one or more agents.
///
/// Readers take an immutable snapshot and never block; writers build a new
/// chunk vector and swap it in under the writer lock, so a search always sees
/// one consistent version of the collection.
class KnowledgeBase {
public:
    using Snapshot = std::shared_ptr<const std::vector<DocumentChunk>>;

    KnowledgeBase(std::string kb_id, std::shared_ptr<const Embedder> embedder);

    const std::string& kb_id() const noexcept { return kb_id_; }
    std::string_view embedder_id() const noexcept { return embedder_->id(); }
    std::size_t dimension() const noexcept { return embedder_->dimension(); }
    const Embedder& embedder() const noexcept { return *embedder_; }

    Snapshot snapshot() const;
    std::size_t size() const { return snapshot()->size(); }
    bool contains_document(const std::string& doc_id) const;

    /// Drops every chunk of the listed documents and adds `chunks` (which
    /// must already be embedded with this KB's embedder). Returns the new
    /// snapshot. Concurrent writers must hold writer_mutex().
    Snapshot replace_documents(const std::set<std::string>& doc_ids, std::vector<DocumentChunk> chunks);

    /// Serializes writers (ingestion holds it across persist + swap).
    std::mutex& writer_mutex() const noexcept { return writer_mu_; }

private:
    std::string kb_id_;
    std::shared_ptr<const Embedder> embedder_;
    mutable std::mutex snapshot_mu_;
    mutable std::mutex writer_mu_;
    Snapshot chunks_;
};

/// Top-k by cosine similarity, score descending, ties by ascending chunk_id.
/// Returns min(k, |chunks|) results.
std::vector<ScoredChunk> search(const std::vector<DocumentChunk>& chunks, std::span<const double> query_embedding,
                                std::size_t k);

/// Embeds `query` with `embedder` and searches `kb`. Throws kEmbedderMismatch
/// when `embedder` is not the one the KB was built with.
std::vector<ScoredChunk> search(const KnowledgeBase& kb, const Embedder& embedder, std::string_view query,
                                std::size_t k);

inline std::vector<ScoredChunk> search(const KnowledgeBase& kb, std::string_view query, std::size_t k) {
    return search(kb, kb.embedder(), query, k);
}

}  // namespace moa
