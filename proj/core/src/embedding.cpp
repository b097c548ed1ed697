#include "avground/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "avground/errors.hpp"

namespace avground {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine_similarity: dimensions " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ZeroVector("cosine_similarity: zero-norm vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double trigram_jaccard(std::string_view a, std::string_view b) {
    auto grams = [](std::string_view s) {
        std::string padded = " " + std::string(s) + " ";
        std::set<std::string> out;
        for (size_t i = 0; i + 3 <= padded.size(); ++i) out.insert(padded.substr(i, 3));
        return out;
    };
    std::set<std::string> ga = grams(a);
    std::set<std::string> gb = grams(b);
    if (ga.empty() && gb.empty()) return 1.0;
    size_t inter = 0;
    for (const std::string& g : ga) inter += gb.count(g);
    size_t uni = ga.size() + gb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void EmbeddingTable::insert(std::string token, std::vector<double> vector) {
    if (vector.empty()) throw SchemaError("embedding: empty vector for \"" + token + "\"");
    if (dimension_ == 0 && entries_.empty()) {
        dimension_ = static_cast<int>(vector.size());
    }
    if (static_cast<int>(vector.size()) != dimension_) {
        throw SchemaError("embedding: vector for \"" + token + "\" has dimension " +
                          std::to_string(vector.size()) + ", expected " +
                          std::to_string(dimension_));
    }
    bool all_zero = true;
    for (double v : vector) {
        if (!std::isfinite(v)) {
            throw SchemaError("embedding: non-finite component for \"" + token + "\"");
        }
        if (v != 0.0) all_zero = false;
    }
    if (all_zero) throw SchemaError("embedding: zero vector for \"" + token + "\"");
    entries_[std::move(token)] = std::move(vector);
}

EmbeddingTable EmbeddingTable::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw SchemaError("embedding: empty file");
    std::istringstream hs(header);
    long long count = 0;
    int dim = 0;
    if (!(hs >> count >> dim) || count < 0 || dim <= 0) {
        throw SchemaError("embedding: bad header, expected \"count dim\"");
    }
    EmbeddingTable table;
    table.dimension_ = dim;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        std::vector<double> vec(dim);
        for (int i = 0; i < dim; ++i) {
            if (!(ls >> vec[i])) {
                throw SchemaError("embedding: truncated vector for \"" + token + "\"");
            }
        }
        double extra;
        if (ls >> extra) {
            throw SchemaError("embedding: too many components for \"" + token + "\"");
        }
        table.insert(std::move(token), std::move(vec));
    }
    if (static_cast<long long>(table.size()) != count) {
        throw SchemaError("embedding: header declares " + std::to_string(count) +
                          " entries, found " + std::to_string(table.size()));
    }
    return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open embedding file: " + path);
    return load(in);
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::vector<double>> EmbeddingTable::name_embedding(
    std::string_view name, std::span<const std::string> stop_words) const {
    std::vector<double> sum(static_cast<size_t>(std::max(dimension_, 0)), 0.0);
    int used = 0;
    size_t pos = 0;
    while (pos < name.size()) {
        while (pos < name.size() && name[pos] == ' ') ++pos;
        size_t end = name.find(' ', pos);
        std::string_view token =
            end == std::string_view::npos ? name.substr(pos) : name.substr(pos, end - pos);
        pos = end == std::string_view::npos ? name.size() : end + 1;
        if (token.empty()) continue;
        if (std::find(stop_words.begin(), stop_words.end(), token) != stop_words.end()) {
            continue;
        }
        if (const std::vector<double>* vec = find(token)) {
            for (size_t i = 0; i < vec->size(); ++i) sum[i] += (*vec)[i];
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    bool all_zero = true;
    for (double& v : sum) {
        v /= used;
        if (v != 0.0) all_zero = false;
    }
    if (all_zero) return std::nullopt;  // cancelled out, cosine undefined
    return sum;
}

}  // namespace avground
