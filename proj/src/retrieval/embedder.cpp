#include "moa/retrieval/embedder.hpp"

#include <cmath>
#include <string>

#include "moa/error.hpp"
#include "moa/util/hash.hpp"
#include "moa/util/text.hpp"

namespace moa {

std::size_t HashedBagOfWordsEmbedder::bucket(std::string_view token) {
    return static_cast<std::size_t>(fnv1a64(token) % kDimension);
}

std::vector<double> HashedBagOfWordsEmbedder::embed(std::string_view text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::kEmptyText, "cannot embed text without tokens");
    }
    std::vector<double> v(kDimension, 0.0);
    for (const auto& t : tokens) v[bucket(t)] += 1.0;

    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::shared_ptr<const Embedder> make_embedder(std::string_view embedder_id) {
    if (embedder_id == HashedBagOfWordsEmbedder::kId) {
        static const auto shared = std::make_shared<const HashedBagOfWordsEmbedder>();
        return shared;
    }
    throw Error(ErrorCode::kEmbedderMismatch, "unknown embedder '" + std::string(embedder_id) + "'");
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace moa
