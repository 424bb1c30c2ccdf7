#include "moa/interface/service_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "moa/error.hpp"

namespace moa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, "service config: " + what); }

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

fs::path existing(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw Error(ErrorCode::kIo, what + " " + p.string() + " does not exist");
    return p;
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) bad(path.string() + " is not valid JSON");
    return doc;
}

std::string str(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_string()) bad(std::string(key) + " must be a string");
    return v.get<std::string>();
}

std::size_t positive(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) bad(std::string(key) + " must be a positive integer");
    return v.get<std::size_t>();
}

}  // namespace

ServiceConfig service_config_from_json(const json& doc, const fs::path& base_dir) {
    static constexpr const char* kKeys[] = {"listen",   "pipelines", "kb_dir",       "knowledge_bases",
                                            "chunking", "backends",  "backends_file", "trace_dir",
                                            "default_mode", "max_inflight_runs"};
    if (!doc.is_object()) bad("document must be an object");
    for (const auto& [k, v] : doc.items()) {
        if (std::none_of(std::begin(kKeys), std::end(kKeys), [&](const char* key) { return k == key; })) {
            bad("unknown field '" + k + "'");
        }
    }
    ServiceConfig c;
    if (doc.contains("listen")) {
        const std::string listen = str(doc, "listen");
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos || colon == 0) bad("listen must be host:port");
        c.host = listen.substr(0, colon);
        try {
            std::size_t used = 0;
            c.port = std::stoi(listen.substr(colon + 1), &used);
            if (used != listen.size() - colon - 1 || c.port < 0 || c.port > 65535) throw std::out_of_range("port");
        } catch (const std::exception&) {
            bad("listen port is invalid in '" + listen + "'");
        }
    }
    if (doc.contains("pipelines")) {
        const auto& list = doc.at("pipelines");
        if (!list.is_array()) bad("pipelines must be an array of paths");
        for (const auto& p : list) {
            if (!p.is_string()) bad("pipelines must be an array of paths");
            c.pipelines.push_back(existing(resolve(base_dir, p.get<std::string>()), "pipeline file"));
        }
    }
    if (doc.contains("kb_dir")) c.kb_dir = resolve(base_dir, str(doc, "kb_dir"));
    if (doc.contains("trace_dir")) c.trace_dir = resolve(base_dir, str(doc, "trace_dir"));
    if (doc.contains("chunking")) {
        const auto& ch = doc.at("chunking");
        if (!ch.is_object()) bad("chunking must be an object");
        if (ch.contains("window")) c.chunking.window = positive(ch, "window");
        if (ch.contains("overlap")) {
            if (!ch.at("overlap").is_number_unsigned()) bad("overlap must be a non-negative integer");
            c.chunking.overlap = ch.at("overlap").get<std::size_t>();
        }
        if (c.chunking.overlap >= c.chunking.window) bad("chunking overlap must be smaller than window");
    }
    if (doc.contains("knowledge_bases")) {
        const auto& kbs = doc.at("knowledge_bases");
        if (!kbs.is_object()) bad("knowledge_bases must be an object");
        for (const auto& [id, v] : kbs.items()) {
            if (!v.is_object()) bad("knowledge_bases." + id + " must be an object");
            BenchKbSource src;
            for (const auto& [k, x] : v.items()) {
                if (k == "source_dir") {
                    if (!x.is_string()) bad("knowledge_bases." + id + ".source_dir must be a string");
                    src.source_dir = existing(resolve(base_dir, x.get<std::string>()), "seed directory");
                } else if (k == "synthetic") {
                    if (!x.is_object()) bad("knowledge_bases." + id + ".synthetic must be an object");
                    SyntheticCorpusSpec spec;
                    for (const auto& [sk, sv] : x.items()) {
                        if (sk == "documents") spec.documents = positive(x, "documents");
                        else if (sk == "document_chars") spec.document_chars = positive(x, "document_chars");
                        else if (sk == "seed" && sv.is_number_unsigned()) spec.seed = sv.get<std::uint64_t>();
                        else if (sk == "topic" && sv.is_string()) spec.topic = sv.get<std::string>();
                        else bad("knowledge_bases." + id + ".synthetic: bad field '" + sk + "'");
                    }
                    src.synthetic = spec;
                } else {
                    bad("unknown field '" + k + "' in knowledge_bases." + id);
                }
            }
            if (src.synthetic.has_value() == src.source_dir.has_value()) {
                bad("knowledge_bases." + id + " needs exactly one of synthetic, source_dir");
            }
            c.knowledge_bases.emplace(id, std::move(src));
        }
    }
    if (doc.contains("backends") && doc.contains("backends_file")) bad("give either backends or backends_file");
    c.backends_base_dir = base_dir;
    if (doc.contains("backends")) {
        c.backends = doc.at("backends");
    } else if (doc.contains("backends_file")) {
        const fs::path file = existing(resolve(base_dir, str(doc, "backends_file")), "backend file");
        c.backends = read_json(file);
        c.backends_base_dir = file.parent_path();
    }
    if (doc.contains("default_mode")) {
        try {
            c.default_mode = mode_from_string(str(doc, "default_mode"));
        } catch (const Error& e) {
            bad(std::string("default_mode: ") + e.what());
        }
    }
    if (doc.contains("max_inflight_runs")) c.max_inflight_runs = positive(doc, "max_inflight_runs");
    return c;
}

ServiceConfig load_service_config(const fs::path& path) {
    return service_config_from_json(read_json(existing(path, "config file")), path.parent_path());
}

}  // namespace moa
