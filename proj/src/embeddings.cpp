#include "gqa/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gqa/error.hpp"
#include "gqa/rng.hpp"

namespace gqa {

namespace {

std::string lowercased(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<double> synthesized_row(const std::string& token, size_t dim) {
    Rng rng(seed_mix(fnv1a64(token), 0x0e5bed));
    std::vector<double> row(dim);
    for (double& x : row) x = rng.uniform(-0.5, 0.5);
    return row;
}

}  // namespace

const std::vector<std::string>& EmbeddingTable::special_tokens() {
    static const std::vector<std::string> toks = {kStart, kEnd,  kEntity, kUnknown,
                                                  kQNode, kArgMax, kArgMin};
    return toks;
}

void EmbeddingTable::add(const std::string& token, std::vector<double> row, size_t line) {
    if (token.empty()) throw ParseError("empty embedding token", line);
    if (dim_ == 0) dim_ = row.size();
    if (row.size() != dim_)
        throw ParseError("embedding row for '" + token + "' has " + std::to_string(row.size()) +
                             " values, expected " + std::to_string(dim_),
                         line);
    if (index_.count(token))
        throw ParseError("duplicate embedding token '" + token + "'", line);
    index_.emplace(token, rows_.size());
    tokens_.push_back(token);
    rows_.push_back(std::move(row));
}

void EmbeddingTable::ensure_special_rows() {
    for (const std::string& tok : special_tokens()) {
        if (!index_.count(tok)) add(tok, synthesized_row(tok, dim_), 0);
    }
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings file '" + path + "'");
    EmbeddingTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> row;
        double x;
        while (ss >> x) row.push_back(x);
        if (!ss.eof())
            throw ParseError("malformed embedding value for '" + token + "'", lineno);
        if (row.empty()) throw ParseError("embedding row for '" + token + "' is empty", lineno);
        table.add(lowercased(token), std::move(row), lineno);
    }
    if (table.rows_.empty()) throw Error("embeddings file '" + path + "' is empty");
    table.ensure_special_rows();
    return table;
}

EmbeddingTable EmbeddingTable::random(const std::vector<std::string>& tokens, size_t dim,
                                      uint64_t seed) {
    if (dim == 0) throw Error("embedding dimension must be positive");
    EmbeddingTable table;
    table.dim_ = dim;
    for (const std::string& raw : tokens) {
        const std::string tok = lowercased(raw);
        if (table.index_.count(tok)) continue;
        Rng rng(seed_mix(seed, fnv1a64(tok)));
        std::vector<double> row(dim);
        for (double& x : row) x = rng.uniform(-0.5, 0.5);
        table.add(tok, std::move(row), 0);
    }
    table.ensure_special_rows();
    return table;
}

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write embeddings file '" + path + "'");
    out << std::setprecision(9);
    for (size_t i = 0; i < tokens_.size(); ++i) {
        out << tokens_[i];
        for (double x : rows_[i]) out << ' ' << x;
        out << '\n';
    }
}

bool EmbeddingTable::contains(const std::string& token) const {
    return index_.count(lowercased(token)) > 0;
}

const std::vector<double>& EmbeddingTable::row(const std::string& token) const {
    auto it = index_.find(lowercased(token));
    if (it == index_.end()) it = index_.find(kUnknown);
    if (it == index_.end()) throw Error("embedding table has no <unk> row");
    return rows_[it->second];
}

}  // namespace gqa
