#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace moa {

class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::string_view id() const = 0;
    virtual std::size_t dimension() const = 0;

    /// Unit-norm embedding. Throws kEmptyText for text with no tokens.
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Hashed bag of words: lowercase, split on non-alphanumerics, FNV-1a 64 of
/// each token modulo 256 picks a bucket, counts are L2-normalized.
/// Deterministic on every platform, which is what golden tests need.
class HashedBagOfWordsEmbedder final : public Embedder {
public:
    static constexpr std::string_view kId = "hashed-bow-256";
    static constexpr std::size_t kDimension = 256;

    std::string_view id() const override { return kId; }
    std::size_t dimension() const override { return kDimension; }
    std::vector<double> embed(std::string_view text) const override;

    static std::size_t bucket(std::string_view token);
};

/// Resolves an embedder id; throws kEmbedderMismatch for unknown ids.
std::shared_ptr<const Embedder> make_embedder(std::string_view embedder_id);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace moa
