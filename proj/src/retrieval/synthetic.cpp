#include "moa/retrieval/synthetic.hpp"

#include <array>
#include <cstdio>
#include <string_view>

namespace moa {
namespace {

struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

constexpr std::array<std::string_view, 12> kSubjects = {
    "revenue",        "gross margin", "operating income", "services revenue", "free cash flow", "net sales",
    "deferred revenue", "share repurchases", "foreign exchange", "guidance", "installed base", "dividends"};
constexpr std::array<std::string_view, 10> kVerbs = {
    "increased", "declined", "remained stable", "accelerated", "softened",
    "improved",  "was pressured", "is expected to grow", "was flat", "recovered"};
constexpr std::array<std::string_view, 10> kContexts = {
    "in the december quarter",        "compared with the prior year",   "on a constant currency basis",
    "despite macroeconomic headwinds", "across emerging markets",        "due to supply constraints",
    "in the americas segment",         "driven by higher iphone demand", "amid digital advertising weakness",
    "over the first six months"};

}  // namespace

std::vector<SourceDocument> synthesize_corpus(const SyntheticCorpusSpec& spec) {
    SplitMix64 rng{spec.seed};
    std::vector<SourceDocument> docs;
    docs.reserve(spec.documents);
    for (std::size_t d = 0; d < spec.documents; ++d) {
        std::string text;
        text.reserve(spec.document_chars + 128);
        while (text.size() < spec.document_chars) {
            text += spec.topic;
            text += ' ';
            text += kSubjects[rng.below(kSubjects.size())];
            text += ' ';
            text += kVerbs[rng.below(kVerbs.size())];
            text += ' ';
            text += kContexts[rng.below(kContexts.size())];
            text += " according to report ";
            text += std::to_string(rng.below(1000));
            text += ". ";
        }
        text.resize(spec.document_chars);
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu.txt", d);
        docs.push_back({spec.topic + "-" + name, std::move(text)});
    }
    return docs;
}

}  // namespace moa
