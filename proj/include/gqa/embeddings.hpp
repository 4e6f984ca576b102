#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace gqa {

// Frozen word-embedding table (GloVe-style text file). Lookups are
// lowercase; unknown tokens resolve to the <unk> row. Rows for the special
// symbols below are synthesized deterministically from the token's hash when
// the file does not provide them, so they do not depend on the file or on
// load order.
class EmbeddingTable {
public:
    static constexpr const char* kStart = "<s>";
    static constexpr const char* kEnd = "<f>";
    static constexpr const char* kEntity = "<e>";
    static constexpr const char* kUnknown = "<unk>";
    static constexpr const char* kQNode = "<q>";
    static constexpr const char* kArgMax = "<argmax>";
    static constexpr const char* kArgMin = "<argmin>";

    static const std::vector<std::string>& special_tokens();

    static EmbeddingTable load(const std::string& path);
    // Synthetic table over a fixed vocabulary; rows are seeded per token.
    static EmbeddingTable random(const std::vector<std::string>& tokens, size_t dim,
                                 uint64_t seed);

    void save(const std::string& path) const;

    size_t dim() const { return dim_; }
    size_t size() const { return rows_.size(); }
    bool contains(const std::string& token) const;

    // Row for `token`, falling back to <unk>.
    const std::vector<double>& row(const std::string& token) const;

    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    size_t dim_ = 0;
    std::vector<std::string> tokens_;
    std::vector<std::vector<double>> rows_;
    std::unordered_map<std::string, size_t> index_;

    void add(const std::string& token, std::vector<double> row, size_t line);
    void ensure_special_rows();
};

}  // namespace gqa
