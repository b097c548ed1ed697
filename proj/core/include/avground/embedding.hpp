#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace avground {

/// Cosine of the angle between two vectors, clamped to [-1, 1].
/// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Jaccard overlap of the character-trigram sets of two strings (each string
/// padded with one boundary space per side). Deterministic, dependency-free
/// stand-in for cosine when a name has no embedding.
double trigram_jaccard(std::string_view a, std::string_view b);

/// Immutable token -> vector table in word2vec text format:
/// a "count dim" header line, then "token v1 ... vD" per line.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;

    /// Throws SchemaError on malformed input, dimension drift, non-finite
    /// components, or an all-zero vector.
    static EmbeddingTable load(std::istream& in);
    static EmbeddingTable load_file(const std::string& path);

    /// Inserts one vector; first insert fixes the dimension.
    void insert(std::string token, std::vector<double> vector);

    const std::vector<double>* find(std::string_view token) const;
    size_t size() const { return entries_.size(); }
    int dimension() const { return dimension_; }

    /// Embedding of a possibly multi-word name: mean of the in-vocabulary
    /// token vectors after dropping stop words. Empty result (no usable
    /// token, or a zero mean) is reported as nullopt.
    std::optional<std::vector<double>> name_embedding(
        std::string_view name, std::span<const std::string> stop_words) const;

  private:
    int dimension_ = 0;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

}  // namespace avground
