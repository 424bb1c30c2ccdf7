#include "moa/retrieval/kb_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moa/error.hpp"

namespace moa {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json chunk_record(const DocumentChunk& c) {
    return json{{"chunk_id", c.chunk_id},
                {"doc_id", c.doc_id},
                {"position", c.position},
                {"text", c.text},
                {"embedding", c.embedding}};
}

void write_records(std::ostream& out, const std::vector<DocumentChunk>& chunks) {
    for (const auto& c : chunks) out << chunk_record(c).dump() << '\n';
}

}  // namespace

bool is_safe_identifier(std::string_view id) {
    if (id.empty() || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

KbStore::KbStore(std::optional<fs::path> directory, ChunkingOptions chunking, std::string embedder_id)
    : directory_(std::move(directory)), chunking_(chunking), embedder_(make_embedder(embedder_id)) {
    if (directory_) {
        std::error_code ec;
        fs::create_directories(*directory_, ec);
        if (ec) throw Error(ErrorCode::kIo, "cannot create KB directory " + directory_->string() + ": " + ec.message());
    }
}

fs::path KbStore::kb_path(const std::string& kb_id) const {
    if (!directory_) return {};
    return *directory_ / (kb_id + ".jsonl");
}

std::shared_ptr<KnowledgeBase> KbStore::load_file(const std::string& kb_id, const fs::path& path) const {
    auto kb = std::make_shared<KnowledgeBase>(kb_id, embedder_);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());

    // Later records win, keyed by chunk_id.
    std::map<std::string, DocumentChunk> by_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            DocumentChunk c;
            c.chunk_id = j.at("chunk_id").get<std::string>();
            c.doc_id = j.at("doc_id").get<std::string>();
            c.position = j.at("position").get<std::size_t>();
            c.text = j.at("text").get<std::string>();
            c.embedding = j.at("embedding").get<std::vector<double>>();
            c.metadata["source"] = c.doc_id;
            by_id[c.chunk_id] = std::move(c);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::vector<DocumentChunk> chunks;
    std::set<std::string> docs;
    for (auto& [id, c] : by_id) {
        docs.insert(c.doc_id);
        chunks.push_back(std::move(c));
    }
    kb->replace_documents(docs, std::move(chunks));
    return kb;
}

std::shared_ptr<KnowledgeBase> KbStore::open(const std::string& kb_id) {
    if (!is_safe_identifier(kb_id)) throw Error(ErrorCode::kInvalidValue, "invalid kb_id '" + kb_id + "'");
    std::lock_guard lock(mu_);
    if (auto it = kbs_.find(kb_id); it != kbs_.end()) return it->second;
    std::shared_ptr<KnowledgeBase> kb;
    if (directory_ && fs::exists(kb_path(kb_id))) {
        kb = load_file(kb_id, kb_path(kb_id));
    } else {
        kb = std::make_shared<KnowledgeBase>(kb_id, embedder_);
    }
    kbs_.emplace(kb_id, kb);
    return kb;
}

std::shared_ptr<KnowledgeBase> KbStore::find(const std::string& kb_id) {
    {
        std::lock_guard lock(mu_);
        if (auto it = kbs_.find(kb_id); it != kbs_.end()) return it->second;
    }
    if (directory_ && is_safe_identifier(kb_id) && fs::exists(kb_path(kb_id))) return open(kb_id);
    return nullptr;
}

std::shared_ptr<KnowledgeBase> KbStore::get(const std::string& kb_id) {
    auto kb = find(kb_id);
    if (!kb) throw Error(ErrorCode::kUnknownKb, "unknown kb_id '" + kb_id + "'");
    return kb;
}

void KbStore::load_all() {
    if (!directory_) return;
    for (const auto& entry : fs::directory_iterator(*directory_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
        const std::string kb_id = entry.path().stem().string();
        if (is_safe_identifier(kb_id)) open(kb_id);
    }
}

std::vector<std::string> KbStore::kb_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, kb] : kbs_) ids.push_back(id);
    return ids;
}

IngestionReport KbStore::ingest(const std::string& kb_id, const std::vector<SourceDocument>& documents) {
    if (documents.empty()) throw Error(ErrorCode::kEmptyDocumentList, "empty document list");

    // Chunk and embed outside the writer lock; only the swap is exclusive.
    IngestionReport report;
    std::vector<DocumentChunk> fresh;
    std::set<std::string> doc_ids;
    for (const auto& doc : documents) {
        if (doc.doc_id.empty()) throw Error(ErrorCode::kInvalidValue, "document without doc_id");
        if (doc_ids.contains(doc.doc_id)) {
            throw Error(ErrorCode::kInvalidValue, "document '" + doc.doc_id + "' listed twice");
        }
        auto chunks = chunk_document(doc.doc_id, doc.text, chunking_);
        for (auto& c : chunks) c.embedding = embedder_->embed(c.text);
        report[doc.doc_id] = chunks.size();
        doc_ids.insert(doc.doc_id);
        std::move(chunks.begin(), chunks.end(), std::back_inserter(fresh));
    }

    auto kb = open(kb_id);
    std::lock_guard writer(kb->writer_mutex());
    const auto current = kb->snapshot();
    const bool replaces = std::any_of(current->begin(), current->end(),
                                      [&](const DocumentChunk& c) { return doc_ids.contains(c.doc_id); });

    // Persist first so a failed write leaves memory and disk in agreement.
    if (directory_) {
        const fs::path path = kb_path(kb_id);
        if (replaces) {
            const fs::path tmp = path.string() + ".tmp";
            {
                std::ofstream out(tmp, std::ios::trunc);
                if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
                for (const auto& c : *current) {
                    if (!doc_ids.contains(c.doc_id)) out << chunk_record(c).dump() << '\n';
                }
                write_records(out, fresh);
                if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
            }
            std::error_code ec;
            fs::rename(tmp, path, ec);
            if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
        } else {
            std::ofstream out(path, std::ios::app);
            if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
            write_records(out, fresh);
            if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
        }
    }
    kb->replace_documents(doc_ids, std::move(fresh));
    return report;
}

std::vector<SourceDocument> read_text_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
    std::vector<SourceDocument> docs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) throw Error(ErrorCode::kIo, "cannot read " + entry.path().string());
        std::ostringstream buf;
        buf << in.rdbuf();
        docs.push_back({entry.path().filename().string(), buf.str()});
    }
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    return docs;
}

}  // namespace moa
