#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moa/retrieval/chunker.hpp"
#include "moa/retrieval/knowledge_base.hpp"

namespace moa {

struct SourceDocument {
    std::string doc_id;
    std::string text;
};

/// doc_id -> number of chunks stored for it.
using IngestionReport = std::map<std::string, std::size_t>;

/// Owns the knowledge bases of one deployment. When constructed with a
/// directory, each KB is persisted as `<dir>/<kb_id>.jsonl` (one chunk record
/// per line) and loaded fully into memory on open.
class KbStore {
public:
    explicit KbStore(std::optional<std::filesystem::path> directory = std::nullopt, ChunkingOptions chunking = {},
                     std::string embedder_id = std::string(HashedBagOfWordsEmbedder::kId));

    /// Returns the KB, loading it from disk or creating it empty.
    std::shared_ptr<KnowledgeBase> open(const std::string& kb_id);

    /// nullptr when the KB was never opened and has no file on disk.
    std::shared_ptr<KnowledgeBase> find(const std::string& kb_id);

    /// Like find() but throws kUnknownKb.
    std::shared_ptr<KnowledgeBase> get(const std::string& kb_id);

    /// Opens every `*.jsonl` file in the store directory.
    void load_all();

    std::vector<std::string> kb_ids() const;

    /// Chunks, embeds and persists `documents` into `kb_id` (created on
    /// demand). Re-ingesting a doc_id replaces its previous chunks.
    IngestionReport ingest(const std::string& kb_id, const std::vector<SourceDocument>& documents);

    const std::optional<std::filesystem::path>& directory() const noexcept { return directory_; }
    const ChunkingOptions& chunking() const noexcept { return chunking_; }

    std::filesystem::path kb_path(const std::string& kb_id) const;

private:
    std::shared_ptr<KnowledgeBase> load_file(const std::string& kb_id, const std::filesystem::path& path) const;

    std::optional<std::filesystem::path> directory_;
    ChunkingOptions chunking_;
    std::shared_ptr<const Embedder> embedder_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<KnowledgeBase>> kbs_;
};

/// Identifiers used as file names or URL segments: [A-Za-z0-9._-]+, not
/// starting with '.'.
bool is_safe_identifier(std::string_view id);

/// Reads every regular `.txt` file in `dir` (non-recursive); doc_id is the
/// file name. Sorted by doc_id.
std::vector<SourceDocument> read_text_directory(const std::filesystem::path& dir);

}  // namespace moa
